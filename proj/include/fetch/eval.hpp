#pragma once

#include <cstddef>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fetch/keywords.hpp"
#include "fetch/lexicon.hpp"

namespace fetch {

// Case-folds, drops a leading '#', turns phrase-token underscores into spaces
// and collapses whitespace.
std::string normalize_term(std::string_view term);

// True iff the normalized term equals the root or one of the surfaces.
bool match_prediction(std::string_view term, const GlossaryEntry& entry);

inline const std::vector<std::size_t> kDefaultSweep = {50,   100,  200,  400,   800,
                                                       1600, 3200, 6400, 12800, 25600};

struct EvalOptions {
  // Precision denominator: unique normalized terms (default) or every
  // returned item.
  bool unique_terms = true;
  // A term matching several roots credits all of them for DPR (default), or
  // only the first in glossary order.
  bool credit_all_roots = true;
};

struct EvalReport {
  std::size_t k = 0;
  double precision = 0.0;  // percent
  double dpr = 0.0;        // percent
  double f_half = 0.0;     // percent
  std::set<std::string> matched_roots;
  std::size_t n_predictions = 0;
  bool best = false;

  nlohmann::json to_json() const;
};

double f_half_score(double precision, double dpr);

// Scores the first `k` items. Items matching a train entry (when given) are
// dropped beforehand, so seeds count in neither numerator nor denominator.
EvalReport compute_metrics(const std::vector<std::string>& predictions,
                           const std::vector<GlossaryEntry>& test,
                           const std::set<std::string>& present_roots, std::size_t k,
                           const EvalOptions& opts = {},
                           const std::vector<GlossaryEntry>* train = nullptr);

// One report per k in `ks` not larger than the prediction count, plus one at
// the full count; the best F0.5 (smallest k on ties) is flagged. `ranked` =
// false scores the list once, at full size.
std::vector<EvalReport> sweep_thresholds(const std::vector<std::string>& predictions,
                                         const std::vector<GlossaryEntry>& test,
                                         const std::set<std::string>& present_roots,
                                         const std::vector<std::size_t>& ks = kDefaultSweep,
                                         bool ranked = true, const EvalOptions& opts = {},
                                         const std::vector<GlossaryEntry>* train = nullptr);

const EvalReport* best_report(const std::vector<EvalReport>& reports);

// Model / Threshold / Prec / DPR / F0.5, two decimals, tab separated.
void write_report_tsv(std::ostream& out, std::string_view model,
                      const std::vector<EvalReport>& reports);
std::string format_percent(double value);

// Removes every item whose normalized term is a surface of any seed entry,
// then renumbers ranks. Returns the number of items removed.
std::size_t remove_seed_surfaces(CandidateList& list, const std::vector<GlossaryEntry>& seeds);

// Normalized surfaces of the given entries.
std::set<std::string> normalized_surfaces(const std::vector<GlossaryEntry>& entries);

}  // namespace fetch
