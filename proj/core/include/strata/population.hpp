#pragma once

#include <cstdint>
#include <vector>

#include "strata/errors.hpp"

namespace strata {

// One design stratum: frame size N_h, the response rate assumed at design
// time (r_h) and the population 'yes' probability (q_h).
struct Stratum {
  std::int64_t size = 0;
  double expected_rate = 0.0;  // in (0, 1]; zero would break ERR allocation
  double yes_prob = 0.0;       // in [0, 1]; endpoints allowed
};

// Ordered list of strata; everything downstream aligns by position.
class Population {
public:
  explicit Population(std::vector<Stratum> strata);

  const std::vector<Stratum>& strata() const noexcept { return strata_; }
  std::size_t stratum_count() const noexcept { return strata_.size(); }
  std::int64_t total_size() const noexcept { return total_size_; }

private:
  std::vector<Stratum> strata_;
  std::int64_t total_size_ = 0;
};

// Response rates that actually govern fieldwork (p_h). Under correct
// specification these equal each stratum's expected_rate.
class ResponseScenario {
public:
  explicit ResponseScenario(std::vector<double> true_rates);

  // p_h = r_h for every stratum.
  static ResponseScenario matching(const Population& pop);

  const std::vector<double>& true_rates() const noexcept { return true_rates_; }
  std::size_t size() const noexcept { return true_rates_.size(); }

private:
  std::vector<double> true_rates_;
};

// Population plus the intended (target respondent) sample size m.
struct DesignSpec {
  Population population;
  std::int64_t intended_size;  // m >= 1

  DesignSpec(Population pop, std::int64_t m);
};

// Size-weighted mean of the expected rates: sum r_h N_h / N.
double average_expected_rate(const Population& pop);

// Intended respondents implied by an allocated size under a flat rate r.
double intended_from_allocated(double n_allocated, double r);

// Throws ValidationError unless the scenario has one rate per stratum.
void check_aligned(const Population& pop, const ResponseScenario& scenario);

}  // namespace strata
