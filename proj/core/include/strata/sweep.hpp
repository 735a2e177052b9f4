#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "strata/population.hpp"
#include "strata/variance.hpp"

namespace strata {

enum class QMode { Shared, PerStratum };

// Parameter grid for the misspecification study. rate_values feeds both the
// expected-rate (r) and true-rate (p) axes; q_values feeds the yes
// probability, either one shared value per cell or one per stratum.
struct GridSpec {
  std::size_t strata_count = 3;
  std::vector<double> rate_values = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> q_values;
  QMode q_mode = QMode::Shared;
  std::vector<std::int64_t> population_sizes;  // empty = equal sizes of 1000
  std::int64_t intended_size = 1000;
};

// 0, 0.05, ..., 1.
std::vector<double> default_q_grid();

struct SweepRecord {
  std::uint64_t index = 0;
  std::vector<double> p;  // true rates
  std::vector<double> r;  // expected rates
  std::vector<double> q;  // yes probabilities, expanded per stratum
  double var_ps = 0.0;
  double var_err = 0.0;
  double ratio = 0.0;
  bool ratio_defined = false;
  double misspec = 0.0;  // sum |r_h - p_h|
  double spread = 0.0;   // sum |p_h - weighted mean of p|
};

// L1 distance between expected and true rate vectors.
double misspecification(const std::vector<double>& p,
                        const std::vector<double>& r);

// L1 deviation of the true rates from their size-weighted mean.
double spread_from_weighted_average(const std::vector<double>& p,
                                    const Population& pop);

void validate(const GridSpec& spec);

// Cells are indexed lexicographically as the mixed-radix number
// (r_1, ..., r_H, p_1, ..., p_H, q...) with r_1 most significant and q a
// single digit under Shared mode.
std::uint64_t grid_cell_count(const GridSpec& spec);

SweepRecord evaluate_cell(const GridSpec& spec, std::uint64_t index);

struct SweepSummary {
  std::uint64_t cell_count = 0;
  std::uint64_t defined_ratio_cells = 0;
  std::uint64_t ratio_below_one = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  // Correct-specification cells (p = r) where the ERR variance exceeds the
  // PS variance beyond 1e-12.
  std::uint64_t correct_spec_violations = 0;
  // Cells with misspec < spread where the ratio exceeds 1 + 1e-9. The first
  // offender is kept as a counterexample.
  std::uint64_t safe_region_violations = 0;
  bool has_counterexample = false;
  SweepRecord counterexample;
  // Cells with misspec <= 0.4 and a defined ratio, for the low-error band.
  std::uint64_t low_misspec_cells = 0;
  double low_misspec_ratio_sum = 0.0;

  double low_misspec_mean_ratio() const {
    return low_misspec_cells ? low_misspec_ratio_sum /
                                   static_cast<double>(low_misspec_cells)
                             : 0.0;
  }

  void add(const SweepRecord& rec);
  void merge(const SweepSummary& other);
};

using RecordSink = std::function<void(const SweepRecord&)>;

// Serial evaluation of the whole grid, streaming records to the sink.
SweepSummary run_sweep(const GridSpec& spec, const RecordSink& sink);

// Accumulates the figure-level aggregates: two 2D binned mean-ratio tables
// (misspecification x spread, and misspecification x expected-distance)
// plus scatter triples for the four fixed q setups.
class FigureBinner {
public:
  explicit FigureBinner(double bin_width = 0.1);

  void add(const SweepRecord& rec);
  void merge(const FigureBinner& other);

  void write_misspec_spread_csv(std::ostream& os) const;
  void write_misspec_expected_csv(std::ostream& os) const;
  void write_q_setup_scatter_csv(std::ostream& os) const;
  // Minimal heatmap of the misspec x spread mean-ratio table.
  void write_misspec_spread_svg(std::ostream& os) const;

private:
  struct Bin {
    double ratio_sum = 0.0;
    std::uint64_t count = 0;
    std::uint64_t undefined = 0;
  };
  struct ScatterPoint {
    int setup;
    double spread;
    double ratio;
    double misspec;
  };

  int bin_of(double x) const;
  void write_table(std::ostream& os, const char* y_name,
                   const std::map<std::pair<int, int>, Bin>& table) const;

  double width_;
  std::map<std::pair<int, int>, Bin> misspec_spread_;
  std::map<std::pair<int, int>, Bin> misspec_expected_;
  std::vector<ScatterPoint> scatter_;
};

// Writes the full record CSV (header then one row per cell, reals at 17
// significant digits, NA for undefined ratios). Byte-identical output for
// any worker count. Optional binner and summary are filled along the way.
void sweep_to_csv(const GridSpec& spec, std::ostream& os, unsigned workers,
                  FigureBinner* binner = nullptr,
                  SweepSummary* summary = nullptr);

}  // namespace strata
