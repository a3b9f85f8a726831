#include "fetch/lemmatizer.hpp"

#include <algorithm>

namespace fetch {
namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// "runn" -> "run", but keep "fall", "miss", "buzz".
std::string undouble(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

}  // namespace

std::string SuffixLemmatizer::strip_once(const std::string& w) {
  const std::size_t n = w.size();
  if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, n - 2);
  if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
      ends_with(w, "zzes")) {
    return w.substr(0, n - 2);
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, n - 1);
  }
  if (ends_with(w, "ing")) {
    std::string stem = w.substr(0, n - 3);
    if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
  }
  if (ends_with(w, "ied") && n > 4) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "ed") && !ends_with(w, "eed")) {
    std::string stem = w.substr(0, n - 2);
    if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
  }
  return w;
}

std::string SuffixLemmatizer::lemmatize(std::string_view word) const {
  std::string w(word);
  bool eligible = w.size() > 3 && std::all_of(w.begin(), w.end(), [](char c) {
                    return c >= 'a' && c <= 'z';
                  });
  if (!eligible) return w;
  // Each step strictly shortens the word, so this terminates.
  while (w.size() > 3) {
    std::string next = strip_once(w);
    if (next == w) break;
    w = std::move(next);
  }
  return w;
}

}  // namespace fetch
