#include "strata/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "strata/summation.hpp"
#include "strata/variance.hpp"

namespace strata {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate) {
  std::uint64_t state = seed ^ (replicate * 0xda942042e4dd58b5ULL + 1);
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  const std::uint64_t c = splitmix64(state);
  const std::uint64_t d = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c),
                    static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(d),
                    static_cast<std::uint32_t>(d >> 32)};
  return std::mt19937_64(seq);
}

StratumCounts draw_stratum(std::int64_t n, const CellProbabilities& cells,
                           std::mt19937_64& rng) {
  if (n < 1) {
    throw ValidationError("stratum draw needs n >= 1");
  }
  std::int64_t z[4] = {0, 0, 0, 0};
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t j = 0; j < 3 && remaining > 0; ++j) {
    double pj = mass > 0.0 ? cells.cells[j] / mass : 0.0;
    pj = std::clamp(pj, 0.0, 1.0);
    if (pj >= 1.0) {
      z[j] = remaining;
      remaining = 0;
    } else if (pj > 0.0) {
      std::binomial_distribution<std::int64_t> bin(remaining, pj);
      z[j] = bin(rng);
      remaining -= z[j];
    }
    mass -= cells.cells[j];
  }
  z[3] = remaining;
  return StratumCounts{z[0], z[1], z[2], z[3]};
}

SimResult run_monte_carlo(const SimConfig& config, unsigned threads) {
  if (config.replications < 1) {
    throw ValidationError("replications must be >= 1");
  }
  check_aligned(config.design.population, config.scenario);

  const Population& pop = config.design.population;
  const std::size_t strata = pop.stratum_count();
  const IntegerAllocation alloc =
      round_allocation(allocate(config.design, config.method));

  std::vector<CellProbabilities> cells;
  cells.reserve(strata);
  for (std::size_t h = 0; h < strata; ++h) {
    cells.push_back(cell_probabilities(config.scenario.true_rates()[h],
                                       pop.strata()[h].yes_prob));
  }

  const std::size_t reps = static_cast<std::size_t>(config.replications);
  constexpr double kDiscarded = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> estimates(reps, kDiscarded);
  std::vector<double> stratum_estimates(reps * strata, kDiscarded);
  // -1 = ok, otherwise the index of the first empty stratum.
  std::vector<int> failed(reps, -1);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    ObservedSample sample;
    sample.counts.resize(strata);
    for (std::size_t rep = begin; rep < end; ++rep) {
      std::mt19937_64 rng = replicate_engine(config.seed, rep);
      int failure = -1;
      for (std::size_t h = 0; h < strata; ++h) {
        if (alloc.per_stratum[h] == 0) {
          sample.counts[h] = StratumCounts{};
        } else {
          sample.counts[h] = draw_stratum(alloc.per_stratum[h], cells[h], rng);
        }
        if (failure < 0 && sample.counts[h].observed() == 0) {
          failure = static_cast<int>(h);
        }
      }
      if (failure >= 0) {
        failed[rep] = failure;
        continue;
      }
      for (std::size_t h = 0; h < strata; ++h) {
        stratum_estimates[rep * strata + h] =
            estimate_stratum(sample.counts[h], h);
      }
      estimates[rep] = estimate_total(sample, pop);
    }
  };

  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, reps));
  if (threads <= 1) {
    run_range(0, reps);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(reps, begin + chunk);
      if (begin < end) {
        pool.emplace_back(run_range, begin, end);
      }
    }
    for (std::thread& th : pool) {
      th.join();
    }
  }

  SimResult result;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (failed[rep] >= 0) {
      if (config.policy == EmptyStratumPolicy::Error) {
        throw ZeroRespondents(static_cast<std::size_t>(failed[rep]));
      }
      ++result.discarded_replicates;
    } else {
      ++result.replicate_count_used;
    }
  }
  if (result.replicate_count_used == 0) {
    throw AllDiscarded();
  }

  CompensatedSum mean_sum;
  std::vector<CompensatedSum> stratum_sums(strata);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (failed[rep] >= 0) {
      continue;
    }
    mean_sum.add(estimates[rep]);
    for (std::size_t h = 0; h < strata; ++h) {
      stratum_sums[h].add(stratum_estimates[rep * strata + h]);
    }
  }
  const double used = static_cast<double>(result.replicate_count_used);
  result.mean_estimate = mean_sum.value() / used;
  result.per_stratum_mean_estimates.reserve(strata);
  for (std::size_t h = 0; h < strata; ++h) {
    result.per_stratum_mean_estimates.push_back(stratum_sums[h].value() / used);
  }

  if (result.replicate_count_used > 1) {
    CompensatedSum sq;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      if (failed[rep] >= 0) {
        continue;
      }
      const double d = estimates[rep] - result.mean_estimate;
      sq.add(d * d);
    }
    result.empirical_variance = sq.value() / (used - 1.0);
    if (result.empirical_variance < 0.0) {
      result.empirical_variance = 0.0;
    }
  }
  return result;
}

AsymptoticComparison empirical_vs_asymptotic(const SimConfig& config,
                                             unsigned threads) {
  AsymptoticComparison out;
  out.sim = run_monte_carlo(config, threads);
  out.empirical_variance = out.sim.empirical_variance;
  out.analytic_variance =
      config.method == Method::PS
          ? variance_ps_total(config.design, config.scenario)
          : variance_err_total(config.design, config.scenario);
  if (out.analytic_variance > 0.0) {
    out.relative_error =
        std::abs(out.empirical_variance - out.analytic_variance) /
        out.analytic_variance;
  } else {
    out.relative_error = out.empirical_variance == 0.0
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace strata
