#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "strata/estimator.hpp"

using namespace strata;

namespace {

Population make_pop(std::vector<std::int64_t> sizes) {
  std::vector<Stratum> strata;
  for (std::int64_t s : sizes) {
    strata.push_back(Stratum{s, 0.5, 0.5});
  }
  return Population(std::move(strata));
}

// Independent route: apply the per-stratum weights to every cell and take
// weighted yes over weighted observed, without the cancellation shortcut.
double weighted_route(const ObservedSample& sample, const Population& pop) {
  const double total_size = static_cast<double>(pop.total_size());
  double observed_total = 0.0;
  for (const StratumCounts& c : sample.counts) {
    observed_total += static_cast<double>(c.observed());
  }
  double yes = 0.0;
  double answered = 0.0;
  for (std::size_t h = 0; h < sample.counts.size(); ++h) {
    const StratumCounts& c = sample.counts[h];
    const double w = static_cast<double>(pop.strata()[h].size) / total_size *
                     observed_total / static_cast<double>(c.observed());
    yes += w * static_cast<double>(c.z4);
    answered += w * static_cast<double>(c.z3 + c.z4);
  }
  return yes / answered;
}

ObservedSample random_sample(std::mt19937_64& rng, std::size_t strata) {
  std::uniform_int_distribution<std::int64_t> latent(0, 50);
  std::uniform_int_distribution<std::int64_t> observed(0, 200);
  ObservedSample sample;
  for (std::size_t h = 0; h < strata; ++h) {
    StratumCounts c{latent(rng), latent(rng), observed(rng), observed(rng)};
    if (c.observed() == 0) {
      c.z3 = 1;
    }
    sample.counts.push_back(c);
  }
  return sample;
}

}  // namespace

TEST_CASE("cell probabilities") {
  const CellProbabilities cells = cell_probabilities(0.8, 0.25);
  CHECK(cells.cells[0] == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(cells.cells[1] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(cells.cells[2] == doctest::Approx(0.60).epsilon(1e-14));
  CHECK(cells.cells[3] == doctest::Approx(0.20).epsilon(1e-14));

  const CellProbabilities full = cell_probabilities(1.0, 0.3);
  CHECK(full.cells[0] == 0.0);
  CHECK(full.cells[1] == 0.0);
  CHECK(full.cells[2] == doctest::Approx(0.7));
  CHECK(full.cells[3] == doctest::Approx(0.3));

  const CellProbabilities no_yes = cell_probabilities(0.4, 0.0);
  CHECK(no_yes.cells[1] == 0.0);
  CHECK(no_yes.cells[3] == 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double p = std::max(1e-6, unit(rng));
    const double q = unit(rng);
    const CellProbabilities c = cell_probabilities(p, q);
    const double sum = c.cells[0] + c.cells[1] + c.cells[2] + c.cells[3];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Independence of response and answer.
    CHECK(c.cells[0] * c.cells[3] ==
          doctest::Approx(c.cells[1] * c.cells[2]).epsilon(1e-12));
  }
}

TEST_CASE("post-stratification weights") {
  const Population single = make_pop({777});
  ObservedSample one{{StratumCounts{0, 0, 3, 9}}};
  CHECK(poststrat_weight(0, one, single) == doctest::Approx(1.0).epsilon(1e-14));

  const Population two = make_pop({500, 500});
  ObservedSample sample{{StratumCounts{0, 0, 20, 20}, StratumCounts{0, 0, 30, 30}}};
  CHECK(poststrat_weight(0, sample, two) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(poststrat_weight(1, sample, two) ==
        doctest::Approx(100.0 / 120.0).epsilon(1e-12));

  // Observed counts already proportional to the frame.
  ObservedSample prop{{StratumCounts{0, 0, 25, 25}, StratumCounts{0, 0, 10, 40}}};
  CHECK(poststrat_weight(0, prop, two) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(poststrat_weight(1, prop, two) == doctest::Approx(1.0).epsilon(1e-12));

  ObservedSample empty{{StratumCounts{5, 5, 0, 0}, StratumCounts{0, 0, 1, 1}}};
  CHECK_THROWS_AS(poststrat_weight(0, empty, two), ZeroRespondents);
}

TEST_CASE("weights preserve the total observed size") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t strata = 1 + rng() % 6;
    std::vector<std::int64_t> sizes;
    for (std::size_t h = 0; h < strata; ++h) {
      sizes.push_back(1 + static_cast<std::int64_t>(rng() % 3000));
    }
    const Population pop = make_pop(sizes);
    const ObservedSample sample = random_sample(rng, strata);
    double weighted = 0.0;
    double observed = 0.0;
    for (std::size_t h = 0; h < strata; ++h) {
      weighted += poststrat_weight(h, sample, pop) *
                  static_cast<double>(sample.counts[h].observed());
      observed += static_cast<double>(sample.counts[h].observed());
    }
    CHECK(weighted == doctest::Approx(observed).epsilon(1e-9));
  }
}

TEST_CASE("stratum estimate") {
  CHECK(estimate_stratum(StratumCounts{10, 20, 30, 70}) ==
        doctest::Approx(0.7).epsilon(1e-14));
  CHECK(estimate_stratum(StratumCounts{0, 0, 0, 50}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_stratum(StratumCounts{5, 5, 0, 0}), ZeroRespondents);
}

TEST_CASE("total estimate") {
  const Population two = make_pop({500, 500});
  ObservedSample sample{{StratumCounts{0, 0, 80, 20}, StratumCounts{0, 0, 40, 60}}};
  CHECK(estimate_total(sample, two) == doctest::Approx(0.4).epsilon(1e-12));

  ObservedSample constant{{StratumCounts{0, 0, 30, 70}, StratumCounts{0, 0, 3, 7}}};
  CHECK(estimate_total(constant, two) == doctest::Approx(0.7).epsilon(1e-12));

  ObservedSample one_empty{{StratumCounts{0, 0, 10, 10}, StratumCounts{9, 9, 0, 0}}};
  try {
    estimate_total(one_empty, two);
    FAIL("expected ZeroRespondents");
  } catch (const ZeroRespondents& e) {
    CHECK(e.stratum() == 1);
  }
}

TEST_CASE("simplified and fully weighted routes agree") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t strata = 1 + rng() % 6;
    std::vector<std::int64_t> sizes;
    for (std::size_t h = 0; h < strata; ++h) {
      sizes.push_back(1 + static_cast<std::int64_t>(rng() % 3000));
    }
    const Population pop = make_pop(sizes);
    const ObservedSample sample = random_sample(rng, strata);
    const double simplified = estimate_total(sample, pop);
    const double weighted = weighted_route(sample, pop);
    CHECK(std::abs(simplified - weighted) <=
          1e-12 * std::max(simplified, 1e-300));
  }
}

TEST_CASE("total estimate is permutation invariant and bounded") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t strata = 2 + rng() % 5;
    std::vector<std::int64_t> sizes;
    for (std::size_t h = 0; h < strata; ++h) {
      sizes.push_back(1 + static_cast<std::int64_t>(rng() % 3000));
    }
    const ObservedSample sample = random_sample(rng, strata);
    const Population pop = make_pop(sizes);
    const double value = estimate_total(sample, pop);

    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t h = 0; h < strata; ++h) {
      const double est = estimate_stratum(sample.counts[h]);
      lo = std::min(lo, est);
      hi = std::max(hi, est);
    }
    CHECK(value >= lo - 1e-12);
    CHECK(value <= hi + 1e-12);

    std::vector<std::size_t> perm(strata);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::int64_t> perm_sizes;
    ObservedSample perm_sample;
    for (std::size_t h : perm) {
      perm_sizes.push_back(sizes[h]);
      perm_sample.counts.push_back(sample.counts[h]);
    }
    CHECK(estimate_total(perm_sample, make_pop(perm_sizes)) ==
          doctest::Approx(value).epsilon(1e-12));
  }
}
