#pragma once

// Straight-line recomputation of the scoring rules, kept deliberately naive so
// it shares no code with the library: linear scans, no indexes.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "fetch/lexicon.hpp"

namespace oracle {

struct Scores {
  double precision = 0, dpr = 0, f_half = 0;
  std::set<std::string> matched;
};

inline std::string norm(const std::string& in) {
  std::string s;
  for (char c : in) s.push_back(c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  // trim, drop one leading '#', collapse spaces
  std::size_t a = s.find_first_not_of(" \t\n\r");
  if (a == std::string::npos) return "";
  s = s.substr(a, s.find_last_not_of(" \t\n\r") - a + 1);
  if (!s.empty() && s[0] == '#') s.erase(0, 1);
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

inline bool matches(const std::string& term, const fetch::GlossaryEntry& e) {
  std::string t = norm(term);
  if (t.empty()) return false;
  if (t == norm(e.root)) return true;
  for (const auto& s : e.surfaces) {
    if (norm(s) == t) return true;
  }
  return false;
}

inline double f_half(double p, double r) {
  if (p + r == 0) return 0;
  const double b2 = 0.25;
  return (1 + b2) * p * r / (b2 * p + r);
}

inline Scores score(const std::vector<std::string>& preds, const std::vector<fetch::GlossaryEntry>& test,
                    const std::set<std::string>& present, std::size_t k,
                    const std::vector<fetch::GlossaryEntry>& train = {}) {
  std::vector<std::string> kept;
  for (const auto& p : preds) {
    bool seed = false;
    for (const auto& e : train) seed = seed || matches(p, e);
    if (!seed) kept.push_back(p);
  }
  std::vector<std::string> uniq;
  for (std::size_t i = 0; i < kept.size() && i < k; ++i) {
    std::string t = norm(kept[i]);
    if (std::find(uniq.begin(), uniq.end(), t) == uniq.end()) uniq.push_back(t);
  }
  Scores s;
  std::size_t hits = 0;
  for (const auto& t : uniq) {
    bool hit = false;
    for (const auto& e : test) {
      if (matches(t, e)) {
        hit = true;
        if (present.count(e.root)) s.matched.insert(e.root);
      }
    }
    hits += hit;
  }
  std::size_t denom = 0;
  for (const auto& e : test) denom += present.count(e.root);
  s.precision = uniq.empty() ? 0 : 100.0 * hits / uniq.size();
  s.dpr = denom ? 100.0 * s.matched.size() / denom : 0;
  s.f_half = f_half(s.precision, s.dpr);
  return s;
}

}  // namespace oracle
