#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace fetch {

struct EmojiMatch {
  std::size_t length = 0;  // bytes consumed
  std::string_view name;   // English short name without colons, e.g. "glass_of_milk"
};

// Longest emoji sequence starting at byte offset `pos`, if any.
std::optional<EmojiMatch> match_emoji(std::string_view text, std::size_t pos);

// ":name:" alias for an exact emoji sequence, or nullopt when unknown.
std::optional<std::string> emoji_alias(std::string_view emoji);

// Inverse lookup by short name (case-insensitive, colons optional).
std::optional<std::string> emoji_by_name(std::string_view name);

}  // namespace fetch
