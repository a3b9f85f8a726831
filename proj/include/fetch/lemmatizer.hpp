#pragma once

#include <string>
#include <string_view>

namespace fetch {

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemmatize(std::string_view word) const = 0;
};

// Rule-based English suffix stripper: plural -s/-es/-ies, -ing and -ed with
// consonant-doubling repair ("running" -> "run", "stopped" -> "stop").
// Only lowercase ASCII alphabetic words longer than three letters are touched.
// Rules are applied to a fixpoint, so lemmatize(lemmatize(w)) == lemmatize(w).
class SuffixLemmatizer final : public Lemmatizer {
 public:
  std::string lemmatize(std::string_view word) const override;

 private:
  static std::string strip_once(const std::string& word);
};

}  // namespace fetch
