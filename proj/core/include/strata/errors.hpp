#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strata {

// Input failed a structural or range check at construction/parse time.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The yes-fraction is undefined when a stratum has no observed respondents.
class ZeroRespondents : public std::runtime_error {
public:
  explicit ZeroRespondents(std::size_t stratum)
      : std::runtime_error("stratum " + std::to_string(stratum) +
                           " has zero observed respondents"),
        stratum_(stratum) {}

  std::size_t stratum() const noexcept { return stratum_; }

private:
  std::size_t stratum_;
};

// Response probability mass is zero: nobody in the stratum can respond.
class DegenerateStratum : public std::runtime_error {
public:
  DegenerateStratum()
      : std::runtime_error("stratum has zero response probability mass") {}
};

// Every Monte Carlo replicate was discarded.
class AllDiscarded : public std::runtime_error {
public:
  AllDiscarded()
      : std::runtime_error(
            "all replicates discarded (empty stratum in every draw)") {}
};

}  // namespace strata
