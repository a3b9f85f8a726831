#include "fetch/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "fetch/common.hpp"

namespace fetch {

std::string normalize_term(std::string_view term) {
  std::string s(trim(term));
  if (!s.empty() && s.front() == '#') s.erase(0, 1);
  std::replace(s.begin(), s.end(), '_', ' ');
  return collapse_ws(s);
}

bool match_prediction(std::string_view term, const GlossaryEntry& entry) {
  std::string t = normalize_term(term);
  if (t.empty()) return false;
  if (t == normalize_term(entry.root)) return true;
  for (const auto& s : entry.surfaces) {
    if (t == normalize_term(s)) return true;
  }
  return false;
}

double f_half_score(double precision, double dpr) {
  if (precision == 0.0 && dpr == 0.0) return 0.0;
  return 1.25 * precision * dpr / (0.25 * precision + dpr);
}

nlohmann::json EvalReport::to_json() const {
  return {{"k", k},
          {"precision", precision},
          {"dpr", dpr},
          {"f_half", f_half},
          {"matched_roots", matched_roots},
          {"n_predictions", n_predictions},
          {"best", best}};
}

namespace {

// surface -> indices of test entries that list it
std::unordered_map<std::string, std::vector<std::size_t>> surface_index(
    const std::vector<GlossaryEntry>& entries) {
  std::unordered_map<std::string, std::vector<std::size_t>> idx;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::set<std::string> forms;
    forms.insert(normalize_term(entries[i].root));
    for (const auto& s : entries[i].surfaces) forms.insert(normalize_term(s));
    for (const auto& f : forms) idx[f].push_back(i);
  }
  return idx;
}

std::vector<std::string> without_train(const std::vector<std::string>& predictions,
                                       const std::vector<GlossaryEntry>* train) {
  if (!train) return predictions;
  auto seeds = normalized_surfaces(*train);
  std::vector<std::string> out;
  for (const auto& p : predictions) {
    if (!seeds.count(normalize_term(p))) out.push_back(p);
  }
  return out;
}

EvalReport score_prefix(const std::vector<std::string>& preds,
                        const std::vector<GlossaryEntry>& test,
                        const std::unordered_map<std::string, std::vector<std::size_t>>& index,
                        const std::set<std::string>& present_roots, std::size_t k,
                        const EvalOptions& opts) {
  EvalReport r;
  r.k = k;
  std::size_t denominator_roots = 0;
  for (const auto& e : test) denominator_roots += present_roots.count(e.root);

  std::unordered_set<std::string> seen;
  std::size_t considered = 0, hits = 0;
  const std::size_t n = std::min(k, preds.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string t = normalize_term(preds[i]);
    bool fresh = seen.insert(t).second;
    if (opts.unique_terms && !fresh) continue;
    ++considered;
    auto it = t.empty() ? index.end() : index.find(t);
    if (it == index.end()) continue;
    ++hits;
    for (std::size_t e : it->second) {
      if (present_roots.count(test[e].root)) r.matched_roots.insert(test[e].root);
      if (!opts.credit_all_roots) break;
    }
  }
  r.n_predictions = considered;
  r.precision = considered ? 100.0 * static_cast<double>(hits) / static_cast<double>(considered) : 0.0;
  r.dpr = denominator_roots ? 100.0 * static_cast<double>(r.matched_roots.size()) /
                                  static_cast<double>(denominator_roots)
                            : 0.0;
  r.f_half = f_half_score(r.precision, r.dpr);
  return r;
}

}  // namespace

EvalReport compute_metrics(const std::vector<std::string>& predictions,
                           const std::vector<GlossaryEntry>& test,
                           const std::set<std::string>& present_roots, std::size_t k,
                           const EvalOptions& opts, const std::vector<GlossaryEntry>* train) {
  if (k < 1) throw Error("compute_metrics: k must be >= 1");
  auto preds = without_train(predictions, train);
  return score_prefix(preds, test, surface_index(test), present_roots, k, opts);
}

std::vector<EvalReport> sweep_thresholds(const std::vector<std::string>& predictions,
                                         const std::vector<GlossaryEntry>& test,
                                         const std::set<std::string>& present_roots,
                                         const std::vector<std::size_t>& ks, bool ranked,
                                         const EvalOptions& opts,
                                         const std::vector<GlossaryEntry>* train) {
  auto preds = without_train(predictions, train);
  auto index = surface_index(test);
  std::vector<std::size_t> cuts;
  if (ranked) {
    for (std::size_t k : ks) {
      if (k >= 1 && k <= preds.size()) cuts.push_back(k);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  if (cuts.empty() || cuts.back() != preds.size()) cuts.push_back(preds.size());

  std::vector<EvalReport> reports;
  for (std::size_t k : cuts) reports.push_back(score_prefix(preds, test, index, present_roots, k, opts));
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].f_half > reports[best].f_half) best = i;
  }
  reports[best].best = true;
  return reports;
}

const EvalReport* best_report(const std::vector<EvalReport>& reports) {
  for (const auto& r : reports) {
    if (r.best) return &r;
  }
  return reports.empty() ? nullptr : &reports.front();
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

void write_report_tsv(std::ostream& out, std::string_view model,
                      const std::vector<EvalReport>& reports) {
  out << "Model\tThreshold\tPrec\tDPR\tF0.5\n";
  for (const auto& r : reports) {
    out << model << '\t' << r.k << '\t' << format_percent(r.precision) << '\t'
        << format_percent(r.dpr) << '\t' << format_percent(r.f_half) << '\n';
  }
}

std::set<std::string> normalized_surfaces(const std::vector<GlossaryEntry>& entries) {
  std::set<std::string> out;
  for (const auto& e : entries) {
    out.insert(normalize_term(e.root));
    for (const auto& s : e.surfaces) out.insert(normalize_term(s));
  }
  return out;
}

std::size_t remove_seed_surfaces(CandidateList& list, const std::vector<GlossaryEntry>& seeds) {
  auto banned = normalized_surfaces(seeds);
  std::size_t before = list.items.size();
  std::erase_if(list.items, [&](const CandidateItem& it) { return banned.count(normalize_term(it.term)); });
  for (std::size_t i = 0; i < list.items.size(); ++i) list.items[i].rank = i + 1;
  return before - list.items.size();
}

}  // namespace fetch
