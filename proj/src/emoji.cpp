#include "fetch/emoji.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "fetch/common.hpp"

namespace fetch {
namespace {

using namespace std::string_view_literals;

constexpr std::pair<std::string_view, std::string_view> kEmojiTable[] = {
#include "emoji_table.inc"
};

struct EmojiIndex {
  std::unordered_map<std::string_view, std::string_view> by_emoji;
  std::unordered_map<std::string, std::string_view> by_name;
  std::size_t max_len = 0;

  EmojiIndex() {
    by_emoji.reserve(std::size(kEmojiTable));
    for (const auto& [emoji, name] : kEmojiTable) {
      by_emoji.emplace(emoji, name);
      // Several sequences share a name (qualified/unqualified); keep the first.
      by_name.emplace(ascii_lower(name), emoji);
      max_len = std::max(max_len, emoji.size());
    }
  }
};

const EmojiIndex& index() {
  static const EmojiIndex idx;
  return idx;
}

bool may_start_emoji(std::string_view text, std::size_t pos) {
  auto c = static_cast<unsigned char>(text[pos]);
  if (c >= 0x80) return true;
  // Keycap sequences start with an ASCII character followed by U+FE0F/U+20E3.
  bool keycap_base = c == '#' || c == '*' || (c >= '0' && c <= '9');
  return keycap_base && pos + 1 < text.size() &&
         static_cast<unsigned char>(text[pos + 1]) >= 0x80;
}

}  // namespace

std::optional<EmojiMatch> match_emoji(std::string_view text, std::size_t pos) {
  if (pos >= text.size() || !may_start_emoji(text, pos)) return std::nullopt;
  const auto& idx = index();
  std::size_t longest = std::min(idx.max_len, text.size() - pos);
  for (std::size_t len = longest; len > 0; --len) {
    auto it = idx.by_emoji.find(text.substr(pos, len));
    if (it != idx.by_emoji.end()) return EmojiMatch{len, it->second};
  }
  return std::nullopt;
}

std::optional<std::string> emoji_alias(std::string_view emoji) {
  const auto& idx = index();
  auto it = idx.by_emoji.find(emoji);
  if (it == idx.by_emoji.end()) return std::nullopt;
  return ":" + std::string(it->second) + ":";
}

std::optional<std::string> emoji_by_name(std::string_view name) {
  if (name.size() >= 2 && name.front() == ':' && name.back() == ':') {
    name = name.substr(1, name.size() - 2);
  }
  const auto& idx = index();
  auto it = idx.by_name.find(ascii_lower(name));
  if (it == idx.by_name.end()) return std::nullopt;
  return std::string(it->second);
}

}  // namespace fetch
