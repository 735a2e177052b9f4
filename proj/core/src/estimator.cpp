#include "strata/estimator.hpp"

#include <cmath>

#include "strata/summation.hpp"

namespace strata {

CellProbabilities cell_probabilities(double response_prob, double yes_prob) {
  if (!(response_prob > 0.0) || response_prob > 1.0) {
    throw ValidationError("response probability must be in (0, 1]");
  }
  if (!std::isfinite(yes_prob) || yes_prob < 0.0 || yes_prob > 1.0) {
    throw ValidationError("yes probability must be in [0, 1]");
  }
  const double p = response_prob;
  const double q = yes_prob;
  return CellProbabilities{{(1.0 - p) * (1.0 - q), (1.0 - p) * q,
                            p * (1.0 - q), p * q}};
}

double poststrat_weight(std::size_t h, const ObservedSample& sample,
                        const Population& pop) {
  if (sample.counts.size() != pop.stratum_count()) {
    throw ValidationError("sample and population lengths differ");
  }
  if (h >= sample.counts.size()) {
    throw ValidationError("stratum index out of range");
  }
  const std::int64_t oh = sample.counts[h].observed();
  if (oh == 0) {
    throw ZeroRespondents(h);
  }
  std::int64_t observed_total = 0;
  for (const StratumCounts& c : sample.counts) {
    observed_total += c.observed();
  }
  const double share = static_cast<double>(pop.strata()[h].size) /
                       static_cast<double>(pop.total_size());
  return share * static_cast<double>(observed_total) /
         static_cast<double>(oh);
}

double estimate_stratum(const StratumCounts& counts, std::size_t h) {
  const std::int64_t o = counts.observed();
  if (o == 0) {
    throw ZeroRespondents(h);
  }
  return static_cast<double>(counts.z4) / static_cast<double>(o);
}

double estimate_total(const ObservedSample& sample, const Population& pop) {
  if (sample.counts.size() != pop.stratum_count()) {
    throw ValidationError("sample and population lengths differ");
  }
  CompensatedSum sum;
  for (std::size_t h = 0; h < sample.counts.size(); ++h) {
    sum.add(static_cast<double>(pop.strata()[h].size) *
            estimate_stratum(sample.counts[h], h));
  }
  return sum.value() / static_cast<double>(pop.total_size());
}

}  // namespace strata
