#pragma once

#include <array>
#include <vector>

#include "strata/estimator.hpp"
#include "strata/population.hpp"

namespace strata {

// Gradient of f(Z) = Z4/(Z3+Z4) at the cell expectations. The first two
// entries are identically zero: the latent cells do not move the estimator.
using GradientVector = std::array<double, 4>;

using CovarianceMatrix = std::array<std::array<double, 4>, 4>;

GradientVector yes_fraction_gradient(double n, const CellProbabilities& cells);

// Multinomial(n, cells) covariance: n p_i(1-p_i) on the diagonal,
// -n p_i p_j off it. Rows sum to zero.
CovarianceMatrix multinomial_covariance(double n, const CellProbabilities& cells);

// Full quadratic form D' Sigma D. Agrees with delta_variance_stratum to
// 1e-12 relative; both are kept on purpose as cross-checking routes.
double delta_variance_general(double n, const CellProbabilities& cells);

// Closed form q(1-q)/(n p).
double delta_variance_stratum(double n_h, double p_h, double q_h);

// Total-sample asymptotic variance under the PS allocation:
// (1/(Nm)) sum N_h q_h(1-q_h) r/p_h with r the average expected rate.
// Evaluated both directly and by plugging the allocation into the
// per-stratum form; disagreement beyond 1e-12 relative throws logic_error.
double variance_ps_total(const DesignSpec& design,
                         const ResponseScenario& scenario);

// Same under the ERR allocation: (1/(Nm)) sum N_h q_h(1-q_h) r_h/p_h.
double variance_err_total(const DesignSpec& design,
                          const ResponseScenario& scenario);

struct VarianceReport {
  std::vector<double> per_stratum_ps;
  std::vector<double> per_stratum_err;
  double total_ps = 0.0;
  double total_err = 0.0;
  double ratio = 0.0;          // total_err / total_ps, meaningful iff defined
  bool ratio_defined = false;  // false when total_ps = 0
  bool correctly_specified = false;
};

VarianceReport compare(const DesignSpec& design,
                       const ResponseScenario& scenario);

}  // namespace strata
