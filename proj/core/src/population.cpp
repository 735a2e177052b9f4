#include "strata/population.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace strata {

namespace {

void check_probability(double x, const char* name, bool zero_ok,
                       std::size_t index) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0 || (!zero_ok && x == 0.0)) {
    throw ValidationError(std::string(name) + " out of range at stratum " +
                          std::to_string(index) + ": " + std::to_string(x));
  }
}

}  // namespace

Population::Population(std::vector<Stratum> strata)
    : strata_(std::move(strata)) {
  if (strata_.empty()) {
    throw ValidationError("population needs at least one stratum");
  }
  for (std::size_t h = 0; h < strata_.size(); ++h) {
    const Stratum& s = strata_[h];
    if (s.size < 1) {
      throw ValidationError("stratum " + std::to_string(h) +
                            " size must be >= 1");
    }
    check_probability(s.expected_rate, "expected_rate", /*zero_ok=*/false, h);
    check_probability(s.yes_prob, "yes_prob", /*zero_ok=*/true, h);
    total_size_ += s.size;
  }
}

ResponseScenario::ResponseScenario(std::vector<double> true_rates)
    : true_rates_(std::move(true_rates)) {
  if (true_rates_.empty()) {
    throw ValidationError("scenario needs at least one rate");
  }
  for (std::size_t h = 0; h < true_rates_.size(); ++h) {
    check_probability(true_rates_[h], "true_rate", /*zero_ok=*/false, h);
  }
}

ResponseScenario ResponseScenario::matching(const Population& pop) {
  std::vector<double> rates;
  rates.reserve(pop.stratum_count());
  for (const Stratum& s : pop.strata()) {
    rates.push_back(s.expected_rate);
  }
  return ResponseScenario(std::move(rates));
}

DesignSpec::DesignSpec(Population pop, std::int64_t m)
    : population(std::move(pop)), intended_size(m) {
  if (m < 1) {
    throw ValidationError("intended_size must be >= 1");
  }
}

double average_expected_rate(const Population& pop) {
  double weighted = 0.0;
  for (const Stratum& s : pop.strata()) {
    weighted += s.expected_rate * static_cast<double>(s.size);
  }
  return weighted / static_cast<double>(pop.total_size());
}

double intended_from_allocated(double n_allocated, double r) {
  if (!(n_allocated >= 0.0)) {
    throw ValidationError("allocated size must be nonnegative");
  }
  if (!(r > 0.0) || r > 1.0) {
    throw ValidationError("response rate must be in (0, 1]");
  }
  return n_allocated * r;
}

void check_aligned(const Population& pop, const ResponseScenario& scenario) {
  if (scenario.size() != pop.stratum_count()) {
    throw ValidationError("scenario has " + std::to_string(scenario.size()) +
                          " rates for " + std::to_string(pop.stratum_count()) +
                          " strata");
  }
}

}  // namespace strata
