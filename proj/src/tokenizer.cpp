#include "fetch/tokenizer.hpp"

#include <array>

#include "fetch/common.hpp"
#include "fetch/emoji.hpp"

namespace fetch {
namespace {

// Longest first so ":-)" wins over ":-".
constexpr std::array<std::string_view, 34> kEmoticons = {
    ">:-(", ">:(", ":'-(", ":'(", ":-)", ":-(", ":-D", ":-P", ":-p", ":-/", ":-|", ":-O",
    ":-o", ";-)", "<3", "</3", "^_^", "-_-", "o_O", "O_o", ":)", ":(", ":D", ":P",
    ":p", ":/", ":|", ":O", ":o", ";)", ";(", ":3", "xD", "XD"};

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    while (pos_ < text_.size()) {
      auto c = static_cast<unsigned char>(text_[pos_]);
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      if (scan_url() || scan_mention() || scan_hashtag() || scan_alias() ||
          scan_emoticon() || scan_emoji() || scan_word() || scan_ellipsis()) {
        continue;
      }
      scan_other();
    }
    return std::move(out_);
  }

 private:
  // Word character at `pos`, either ASCII alnum/_ or a non-symbol code point.
  std::size_t word_char_len(std::size_t pos) const {
    if (pos >= text_.size()) return 0;
    auto c = static_cast<unsigned char>(text_[pos]);
    if (c < 0x80) return is_ascii_word_char(c) ? 1 : 0;
    if (match_emoji(text_, pos)) return 0;
    std::size_t len = 0;
    char32_t cp = decode_utf8(text_, pos, len);
    return is_symbol_codepoint(cp) ? 0 : len;
  }

  bool prev_is_word_char() const {
    if (pos_ == 0) return false;
    return is_ascii_word_char(static_cast<unsigned char>(text_[pos_ - 1]));
  }

  void emit(std::size_t begin, std::size_t end, TokenKind kind) {
    out_.push_back(Token{std::string(text_.substr(begin, end - begin)), kind, begin});
    pos_ = end;
  }

  bool scan_url() {
    if (!(starts_with_ci(text_, pos_, "http://") || starts_with_ci(text_, pos_, "https://") ||
          starts_with_ci(text_, pos_, "www."))) {
      return false;
    }
    std::size_t end = pos_;
    while (end < text_.size() && !is_space(static_cast<unsigned char>(text_[end]))) ++end;
    while (end > pos_ + 4 && std::string_view(".,;:!?)\"'").find(text_[end - 1]) !=
                                 std::string_view::npos) {
      --end;
    }
    emit(pos_, end, TokenKind::kUrl);
    return true;
  }

  bool scan_mention() {
    if (text_[pos_] != '@' || prev_is_word_char()) return false;
    std::size_t end = pos_ + 1;
    while (end < text_.size() && is_ascii_word_char(static_cast<unsigned char>(text_[end]))) {
      ++end;
    }
    if (end == pos_ + 1) return false;
    emit(pos_, end, TokenKind::kMention);
    return true;
  }

  bool scan_hashtag() {
    if (text_[pos_] != '#' || prev_is_word_char()) return false;
    std::size_t end = pos_ + 1;
    while (std::size_t len = word_char_len(end)) end += len;
    if (end == pos_ + 1) return false;
    emit(pos_, end, TokenKind::kHashtag);
    return true;
  }

  bool scan_alias() {
    if (text_[pos_] != ':' || prev_is_word_char()) return false;
    std::size_t end = pos_ + 1;
    bool has_letter = false;
    while (end < text_.size() && end - pos_ <= 80) {
      auto c = static_cast<unsigned char>(text_[end]);
      if (c == ':' || is_space(c)) break;
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) has_letter = true;
      ++end;
    }
    if (end >= text_.size() || text_[end] != ':' || end == pos_ + 1 || !has_letter) {
      return false;
    }
    emit(pos_, end + 1, TokenKind::kAlias);
    return true;
  }

  bool scan_emoticon() {
    if (prev_is_word_char()) return false;
    for (std::string_view e : kEmoticons) {
      if (text_.substr(pos_, e.size()) != e) continue;
      std::size_t end = pos_ + e.size();
      if (end < text_.size() && is_ascii_word_char(static_cast<unsigned char>(text_[end]))) {
        continue;
      }
      emit(pos_, end, TokenKind::kEmoticon);
      return true;
    }
    return false;
  }

  bool scan_emoji() {
    auto m = match_emoji(text_, pos_);
    if (!m) return false;
    emit(pos_, pos_ + m->length, TokenKind::kEmoji);
    return true;
  }

  bool scan_word() {
    std::size_t end = pos_;
    bool all_digits = true;
    while (true) {
      if (std::size_t len = word_char_len(end)) {
        auto c = static_cast<unsigned char>(text_[end]);
        if (!(c >= '0' && c <= '9')) all_digits = false;
        end += len;
        continue;
      }
      if (end == pos_ || end + 1 >= text_.size()) break;
      char joiner = text_[end];
      auto next = static_cast<unsigned char>(text_[end + 1]);
      bool next_digit = next >= '0' && next <= '9';
      bool prev_digit = text_[end - 1] >= '0' && text_[end - 1] <= '9';
      if ((joiner == '\'' || joiner == '-') && word_char_len(end + 1) > 0) {
        all_digits = false;
        end += 1;
      } else if ((joiner == '.' || joiner == ',') && prev_digit && next_digit && all_digits) {
        end += 1;
      } else {
        break;
      }
    }
    if (end == pos_) return false;
    emit(pos_, end, all_digits ? TokenKind::kNumber : TokenKind::kWord);
    return true;
  }

  bool scan_ellipsis() {
    if (text_.substr(pos_, 3) != "...") return false;
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] == '.') ++end;
    emit(pos_, end, TokenKind::kPunct);
    return true;
  }

  void scan_other() {
    std::size_t len = 0;
    char32_t cp = decode_utf8(text_, pos_, len);
    if (cp == 0xFE0F || cp == 0xFE0E || cp == 0x200D) {
      pos_ += len;
      return;
    }
    emit(pos_, pos_ + len, TokenKind::kPunct);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Token> out_;
};

}  // namespace

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& length) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  unsigned char c = byte(pos);
  std::size_t need = 0;
  char32_t cp = 0;
  if (c < 0x80) {
    length = 1;
    return c;
  } else if ((c & 0xE0) == 0xC0) {
    need = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    need = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    need = 3;
    cp = c & 0x07;
  } else {
    length = 1;
    return 0xFFFD;
  }
  if (pos + need >= s.size()) {
    length = 1;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i <= need; ++i) {
    unsigned char cc = byte(pos + i);
    if ((cc & 0xC0) != 0x80) {
      length = 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  length = need + 1;
  return cp;
}

bool is_symbol_codepoint(char32_t cp) {
  return (cp >= 0x00A0 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0x1F000 && cp <= 0x1FAFF) || cp >= 0xE0000 || cp == 0xFFFD;
}

std::vector<Token> tweet_tokenize(std::string_view text) { return Scanner(text).run(); }

}  // namespace fetch
