#pragma once

#include <cstdint>
#include <vector>

#include "strata/population.hpp"

namespace strata {

enum class Method { PS, ERR };

const char* method_name(Method m) noexcept;

// Real-valued allocated sample sizes. These are canonical: all variance
// formulas consume this form, never the rounded one.
struct Allocation {
  Method method = Method::PS;
  std::vector<double> per_stratum;
  double total = 0.0;
};

// Integer sizes for Monte Carlo draws, produced by largest-remainder
// rounding so the rounded total is preserved exactly.
struct IntegerAllocation {
  Method method = Method::PS;
  std::vector<std::int64_t> per_stratum;
  std::int64_t total = 0;
};

// Proportional-to-size: n_h = (1/r)(N_h/N)m with r the average expected
// rate, so the sampling fraction n_h/N_h is the same in every stratum.
Allocation allocate_ps(const DesignSpec& design);

// Expected-response-rate: n_h = (1/r_h)(N_h/N)m, inflating each stratum by
// its own expected rate.
Allocation allocate_err(const DesignSpec& design);

Allocation allocate(const DesignSpec& design, Method method);

// Largest-remainder rounding; ties broken by lowest stratum index.
IntegerAllocation round_allocation(const Allocation& alloc);

// sum n_h p_h under the scenario's true rates.
double expected_respondents(const Allocation& alloc,
                            const ResponseScenario& scenario);

}  // namespace strata
