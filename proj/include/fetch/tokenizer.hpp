#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fetch {

enum class TokenKind {
  kWord,
  kNumber,
  kUrl,
  kMention,
  kHashtag,
  kEmoticon,
  kEmoji,
  kAlias,  // ":short_name:" emoji alias already present in the text
  kPunct,
};

struct Token {
  std::string text;
  TokenKind kind;
  std::size_t offset;  // byte offset into the source text
};

// Tweet-style tokenizer. A deterministic scanner that keeps URLs, @-handles,
// #hashtags, emoticons, emoji sequences and ":alias:" tokens whole, splits
// punctuation off words, and keeps in-word apostrophes and hyphens
// ("don't", "black-on-black"). Case is preserved.
//
// Rules, tried in order at each non-space position:
//   url       http:// | https:// | www.  up to whitespace, trailing .,;:!?)"' trimmed
//   mention   @ followed by [A-Za-z0-9_]+
//   hashtag   # followed by word characters
//   alias     : [^\s:]+ : containing at least one letter
//   emoticon  fixed list, not glued to a following word character
//   emoji     longest match against the emoji table
//   word      word characters with internal ' - joins; digits with internal . , are numbers
//   ellipsis  ... (or longer runs of dots)
//   punct     any other single code point (variation selectors / ZWJ dropped)
std::vector<Token> tweet_tokenize(std::string_view text);

// Non-ASCII code points that act as symbols/punctuation rather than letters.
bool is_symbol_codepoint(char32_t cp);

// Decodes one UTF-8 code point at `pos`; invalid bytes decode as U+FFFD with
// length 1.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& length);

}  // namespace fetch
