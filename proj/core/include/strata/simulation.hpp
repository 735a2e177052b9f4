#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "strata/allocation.hpp"
#include "strata/estimator.hpp"
#include "strata/population.hpp"

namespace strata {

enum class EmptyStratumPolicy { Discard, Error };

struct SimConfig {
  DesignSpec design;
  ResponseScenario scenario;
  Method method = Method::PS;
  std::int64_t replications = 1;
  std::uint64_t seed = 0;
  EmptyStratumPolicy policy = EmptyStratumPolicy::Discard;
};

struct SimResult {
  double mean_estimate = 0.0;
  double empirical_variance = 0.0;  // unbiased, divisor R-1
  std::int64_t replicate_count_used = 0;
  std::int64_t discarded_replicates = 0;
  std::vector<double> per_stratum_mean_estimates;
};

// Independent generator for one replicate, keyed by (seed, replicate).
// Replicates see decorrelated streams no matter which worker runs them.
std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate);

// One multinomial draw via the conditional-binomial decomposition.
StratumCounts draw_stratum(std::int64_t n, const CellProbabilities& cells,
                           std::mt19937_64& rng);

// Runs the full Monte Carlo. Deterministic for a fixed config regardless of
// the thread count: each replicate derives its own stream and the final
// reduction is serial, in replicate order, with compensated summation.
SimResult run_monte_carlo(const SimConfig& config, unsigned threads = 1);

struct AsymptoticComparison {
  double empirical_variance = 0.0;
  double analytic_variance = 0.0;
  double relative_error = 0.0;
  SimResult sim;
};

// Empirical variance (integer-rounded allocation) against the analytic
// total (real-valued allocation).
AsymptoticComparison empirical_vs_asymptotic(const SimConfig& config,
                                             unsigned threads = 1);

}  // namespace strata
