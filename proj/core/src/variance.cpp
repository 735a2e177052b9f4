#include "strata/variance.hpp"

#include <cmath>
#include <stdexcept>

#include "strata/allocation.hpp"
#include "strata/summation.hpp"

namespace strata {

namespace {

constexpr double kIdentityTol = 1e-12;

double stratum_share(const Population& pop, std::size_t h) {
  return static_cast<double>(pop.strata()[h].size) /
         static_cast<double>(pop.total_size());
}

// Per-stratum variances from an explicit allocation, combined with
// (N_h/N)^2 weights into the total.
double total_via_allocation(const DesignSpec& design,
                            const ResponseScenario& scenario, Method method) {
  const Population& pop = design.population;
  const Allocation alloc = allocate(design, method);
  CompensatedSum sum;
  for (std::size_t h = 0; h < pop.stratum_count(); ++h) {
    const double share = stratum_share(pop, h);
    sum.add(share * share *
            delta_variance_stratum(alloc.per_stratum[h],
                                   scenario.true_rates()[h],
                                   pop.strata()[h].yes_prob));
  }
  return sum.value();
}

double total_direct(const DesignSpec& design, const ResponseScenario& scenario,
                    Method method) {
  const Population& pop = design.population;
  const double r_bar = average_expected_rate(pop);
  CompensatedSum sum;
  for (std::size_t h = 0; h < pop.stratum_count(); ++h) {
    const Stratum& s = pop.strata()[h];
    const double q = s.yes_prob;
    const double rate = method == Method::PS ? r_bar : s.expected_rate;
    sum.add(static_cast<double>(s.size) * q * (1.0 - q) * rate /
            scenario.true_rates()[h]);
  }
  return sum.value() / (static_cast<double>(pop.total_size()) *
                        static_cast<double>(design.intended_size));
}

double total_checked(const DesignSpec& design, const ResponseScenario& scenario,
                     Method method) {
  check_aligned(design.population, scenario);
  const double direct = total_direct(design, scenario, method);
  const double plugged = total_via_allocation(design, scenario, method);
  const double scale = std::max({std::abs(direct), std::abs(plugged), 1e-300});
  if (std::abs(direct - plugged) > kIdentityTol * scale) {
    throw std::logic_error("variance routes disagree");
  }
  return direct;
}

}  // namespace

GradientVector yes_fraction_gradient(double n, const CellProbabilities& cells) {
  const double resp = cells.response_rate();
  if (!(resp > 0.0)) {
    throw DegenerateStratum();
  }
  const double denom = (n * resp) * (n * resp);
  return {0.0, 0.0, -n * cells.cells[3] / denom, n * cells.cells[2] / denom};
}

CovarianceMatrix multinomial_covariance(double n,
                                        const CellProbabilities& cells) {
  CovarianceMatrix sigma{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      sigma[i][j] = i == j
                        ? n * cells.cells[i] * (1.0 - cells.cells[i])
                        : -n * cells.cells[i] * cells.cells[j];
    }
  }
  return sigma;
}

double delta_variance_general(double n, const CellProbabilities& cells) {
  if (!(n > 0.0)) {
    throw ValidationError("sample size must be positive");
  }
  const GradientVector d = yes_fraction_gradient(n, cells);
  const CovarianceMatrix sigma = multinomial_covariance(n, cells);
  double out = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      out += d[i] * sigma[i][j] * d[j];
    }
  }
  // Roundoff can push the quadratic form a hair below zero at q near 0 or 1.
  return out < 0.0 ? 0.0 : out;
}

double delta_variance_stratum(double n_h, double p_h, double q_h) {
  if (!(n_h > 0.0)) {
    throw ValidationError("sample size must be positive");
  }
  if (!(p_h > 0.0) || p_h > 1.0) {
    throw ValidationError("response rate must be in (0, 1]");
  }
  if (!std::isfinite(q_h) || q_h < 0.0 || q_h > 1.0) {
    throw ValidationError("yes probability must be in [0, 1]");
  }
  return q_h * (1.0 - q_h) / (n_h * p_h);
}

double variance_ps_total(const DesignSpec& design,
                         const ResponseScenario& scenario) {
  return total_checked(design, scenario, Method::PS);
}

double variance_err_total(const DesignSpec& design,
                          const ResponseScenario& scenario) {
  return total_checked(design, scenario, Method::ERR);
}

VarianceReport compare(const DesignSpec& design,
                       const ResponseScenario& scenario) {
  check_aligned(design.population, scenario);
  const Population& pop = design.population;

  VarianceReport report;
  const Allocation ps = allocate_ps(design);
  const Allocation err = allocate_err(design);
  for (std::size_t h = 0; h < pop.stratum_count(); ++h) {
    const double p = scenario.true_rates()[h];
    const double q = pop.strata()[h].yes_prob;
    report.per_stratum_ps.push_back(
        delta_variance_stratum(ps.per_stratum[h], p, q));
    report.per_stratum_err.push_back(
        delta_variance_stratum(err.per_stratum[h], p, q));
  }
  report.total_ps = variance_ps_total(design, scenario);
  report.total_err = variance_err_total(design, scenario);
  report.ratio_defined = report.total_ps > 0.0;
  report.ratio = report.ratio_defined ? report.total_err / report.total_ps : 0.0;

  report.correctly_specified = true;
  for (std::size_t h = 0; h < pop.stratum_count(); ++h) {
    if (scenario.true_rates()[h] != pop.strata()[h].expected_rate) {
      report.correctly_specified = false;
      break;
    }
  }
  return report;
}

}  // namespace strata
