#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "strata/population.hpp"

namespace strata {

// Per-stratum outcome-cell probabilities under independent response and
// answer: ((1-p)(1-q), (1-p)q, p(1-q), pq).
struct CellProbabilities {
  std::array<double, 4> cells{};

  double response_rate() const noexcept { return cells[2] + cells[3]; }
};

CellProbabilities cell_probabilities(double response_prob, double yes_prob);

// Complete-data counts for one stratum. The first two cells are latent
// (nonresponders split by what they would have answered); estimators only
// see z3 and z4 but the simulator draws all four.
struct StratumCounts {
  std::int64_t z1 = 0;  // no response, would have said no
  std::int64_t z2 = 0;  // no response, would have said yes
  std::int64_t z3 = 0;  // responded no
  std::int64_t z4 = 0;  // responded yes

  std::int64_t observed() const noexcept { return z3 + z4; }
  std::int64_t total() const noexcept { return z1 + z2 + z3 + z4; }
};

struct ObservedSample {
  std::vector<StratumCounts> counts;
};

// Post-stratification weight (N_h/N * sum_i o_i) / o_h for stratum h.
// Throws ZeroRespondents when o_h = 0.
double poststrat_weight(std::size_t h, const ObservedSample& sample,
                        const Population& pop);

// Yes fraction among respondents, z4/(z3+z4). The stratum index is only
// used to label the ZeroRespondents error.
double estimate_stratum(const StratumCounts& counts, std::size_t h = 0);

// Size-weighted mean of the stratum estimates, (1/N) sum N_h z4/(z3+z4).
// Requires every stratum to have at least one respondent.
double estimate_total(const ObservedSample& sample, const Population& pop);

}  // namespace strata
