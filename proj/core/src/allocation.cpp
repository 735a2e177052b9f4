#include "strata/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strata/summation.hpp"

namespace strata {

const char* method_name(Method m) noexcept {
  return m == Method::PS ? "PS" : "ERR";
}

Allocation allocate_ps(const DesignSpec& design) {
  const Population& pop = design.population;
  const double r = average_expected_rate(pop);
  const double m = static_cast<double>(design.intended_size);
  const double n = static_cast<double>(pop.total_size());

  Allocation out;
  out.method = Method::PS;
  out.per_stratum.reserve(pop.stratum_count());
  for (const Stratum& s : pop.strata()) {
    out.per_stratum.push_back(m * static_cast<double>(s.size) / (n * r));
  }
  out.total = m / r;
  return out;
}

Allocation allocate_err(const DesignSpec& design) {
  const Population& pop = design.population;
  const double m = static_cast<double>(design.intended_size);
  const double n = static_cast<double>(pop.total_size());

  Allocation out;
  out.method = Method::ERR;
  out.per_stratum.reserve(pop.stratum_count());
  CompensatedSum total;
  for (const Stratum& s : pop.strata()) {
    const double nh = m * static_cast<double>(s.size) / (n * s.expected_rate);
    out.per_stratum.push_back(nh);
    total.add(nh);
  }
  out.total = total.value();
  return out;
}

Allocation allocate(const DesignSpec& design, Method method) {
  return method == Method::PS ? allocate_ps(design) : allocate_err(design);
}

IntegerAllocation round_allocation(const Allocation& alloc) {
  const std::size_t h = alloc.per_stratum.size();

  IntegerAllocation out;
  out.method = alloc.method;
  out.per_stratum.resize(h);
  out.total = std::llround(alloc.total);

  std::vector<double> frac(h);
  std::int64_t floored = 0;
  for (std::size_t i = 0; i < h; ++i) {
    const double f = std::floor(alloc.per_stratum[i]);
    out.per_stratum[i] = static_cast<std::int64_t>(f);
    frac[i] = alloc.per_stratum[i] - f;
    floored += out.per_stratum[i];
  }

  std::int64_t deficit = out.total - floored;
  // deficit in [0, h]: the rounded total can exceed the floors by at most
  // the number of fractional parts.
  std::vector<std::size_t> order(h);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac[a] > frac[b];
  });
  for (std::size_t i = 0; i < h && deficit > 0; ++i, --deficit) {
    ++out.per_stratum[order[i]];
  }
  return out;
}

double expected_respondents(const Allocation& alloc,
                            const ResponseScenario& scenario) {
  if (alloc.per_stratum.size() != scenario.size()) {
    throw ValidationError("allocation and scenario lengths differ");
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < alloc.per_stratum.size(); ++i) {
    sum.add(alloc.per_stratum[i] * scenario.true_rates()[i]);
  }
  return sum.value();
}

}  // namespace strata
