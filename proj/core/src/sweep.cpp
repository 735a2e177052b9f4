#include "strata/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "strata/summation.hpp"

namespace strata {

namespace {

constexpr std::uint64_t kChunkCells = 8192;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::int64_t> resolved_sizes(const GridSpec& spec) {
  if (!spec.population_sizes.empty()) {
    return spec.population_sizes;
  }
  return std::vector<std::int64_t>(spec.strata_count, 1000);
}

std::size_t q_digits(const GridSpec& spec) {
  return spec.q_mode == QMode::Shared ? 1 : spec.strata_count;
}

}  // namespace

std::vector<double> default_q_grid() {
  std::vector<double> q;
  for (int i = 0; i <= 20; ++i) {
    q.push_back(static_cast<double>(i) / 20.0);
  }
  return q;
}

double misspecification(const std::vector<double>& p,
                        const std::vector<double>& r) {
  if (p.size() != r.size()) {
    throw ValidationError("rate vectors have different lengths");
  }
  double sum = 0.0;
  for (std::size_t h = 0; h < p.size(); ++h) {
    sum += std::abs(r[h] - p[h]);
  }
  return sum;
}

double spread_from_weighted_average(const std::vector<double>& p,
                                    const Population& pop) {
  if (p.size() != pop.stratum_count()) {
    throw ValidationError("rate vector and population lengths differ");
  }
  double mean = 0.0;
  for (std::size_t h = 0; h < p.size(); ++h) {
    mean += p[h] * static_cast<double>(pop.strata()[h].size);
  }
  mean /= static_cast<double>(pop.total_size());
  double sum = 0.0;
  for (double ph : p) {
    sum += std::abs(ph - mean);
  }
  return sum;
}

void validate(const GridSpec& spec) {
  if (spec.strata_count < 1) {
    throw ValidationError("strata_count must be >= 1");
  }
  if (spec.rate_values.empty() || spec.q_values.empty()) {
    throw ValidationError("rate and q grids must be nonempty");
  }
  for (double r : spec.rate_values) {
    if (!(r > 0.0) || r > 1.0) {
      throw ValidationError("rate grid values must be in (0, 1]");
    }
  }
  for (double q : spec.q_values) {
    if (!std::isfinite(q) || q < 0.0 || q > 1.0) {
      throw ValidationError("q grid values must be in [0, 1]");
    }
  }
  if (!spec.population_sizes.empty() &&
      spec.population_sizes.size() != spec.strata_count) {
    throw ValidationError("population_sizes length must match strata_count");
  }
  for (std::int64_t n : spec.population_sizes) {
    if (n < 1) {
      throw ValidationError("population sizes must be >= 1");
    }
  }
  if (spec.intended_size < 1) {
    throw ValidationError("intended_size must be >= 1");
  }
}

std::uint64_t grid_cell_count(const GridSpec& spec) {
  validate(spec);
  unsigned __int128 count = 1;
  const std::uint64_t rates = spec.rate_values.size();
  for (std::size_t i = 0; i < 2 * spec.strata_count; ++i) {
    count *= rates;
  }
  for (std::size_t i = 0; i < q_digits(spec); ++i) {
    count *= spec.q_values.size();
  }
  if (count > static_cast<unsigned __int128>(UINT64_MAX)) {
    throw ValidationError("grid is too large to enumerate");
  }
  return static_cast<std::uint64_t>(count);
}

SweepRecord evaluate_cell(const GridSpec& spec, std::uint64_t index) {
  const std::size_t hh = spec.strata_count;
  const std::size_t qd = q_digits(spec);
  const std::uint64_t rn = spec.rate_values.size();
  const std::uint64_t qn = spec.q_values.size();

  SweepRecord rec;
  rec.index = index;
  rec.r.resize(hh);
  rec.p.resize(hh);
  rec.q.resize(hh);

  // Peel digits least significant first: q, then p_H..p_1, then r_H..r_1.
  std::uint64_t rest = index;
  std::vector<double> qdig(qd);
  for (std::size_t i = 0; i < qd; ++i) {
    qdig[qd - 1 - i] = spec.q_values[rest % qn];
    rest /= qn;
  }
  for (std::size_t i = 0; i < hh; ++i) {
    rec.p[hh - 1 - i] = spec.rate_values[rest % rn];
    rest /= rn;
  }
  for (std::size_t i = 0; i < hh; ++i) {
    rec.r[hh - 1 - i] = spec.rate_values[rest % rn];
    rest /= rn;
  }
  for (std::size_t h = 0; h < hh; ++h) {
    rec.q[h] = spec.q_mode == QMode::Shared ? qdig[0] : qdig[h];
  }

  const std::vector<std::int64_t> sizes = resolved_sizes(spec);
  std::vector<Stratum> strata(hh);
  for (std::size_t h = 0; h < hh; ++h) {
    strata[h] = Stratum{sizes[h], rec.r[h], rec.q[h]};
  }
  DesignSpec design(Population(std::move(strata)), spec.intended_size);
  ResponseScenario scenario(rec.p);

  const VarianceReport report = compare(design, scenario);
  rec.var_ps = report.total_ps;
  rec.var_err = report.total_err;
  rec.ratio = report.ratio;
  rec.ratio_defined = report.ratio_defined;
  rec.misspec = misspecification(rec.p, rec.r);
  rec.spread = spread_from_weighted_average(rec.p, design.population);
  return rec;
}

void SweepSummary::add(const SweepRecord& rec) {
  ++cell_count;
  if (rec.ratio_defined) {
    if (defined_ratio_cells == 0) {
      min_ratio = max_ratio = rec.ratio;
    } else {
      min_ratio = std::min(min_ratio, rec.ratio);
      max_ratio = std::max(max_ratio, rec.ratio);
    }
    ++defined_ratio_cells;
    if (rec.ratio < 1.0) {
      ++ratio_below_one;
    }
    if (rec.misspec <= 0.4) {
      ++low_misspec_cells;
      low_misspec_ratio_sum += rec.ratio;
    }
  }
  if (rec.misspec == 0.0 && rec.var_err > rec.var_ps + 1e-12) {
    ++correct_spec_violations;
  }
  if (rec.ratio_defined && rec.misspec < rec.spread &&
      rec.ratio > 1.0 + 1e-9) {
    ++safe_region_violations;
    if (!has_counterexample) {
      has_counterexample = true;
      counterexample = rec;
    }
  }
}

void SweepSummary::merge(const SweepSummary& other) {
  if (other.defined_ratio_cells > 0) {
    if (defined_ratio_cells == 0) {
      min_ratio = other.min_ratio;
      max_ratio = other.max_ratio;
    } else {
      min_ratio = std::min(min_ratio, other.min_ratio);
      max_ratio = std::max(max_ratio, other.max_ratio);
    }
  }
  cell_count += other.cell_count;
  defined_ratio_cells += other.defined_ratio_cells;
  ratio_below_one += other.ratio_below_one;
  correct_spec_violations += other.correct_spec_violations;
  safe_region_violations += other.safe_region_violations;
  low_misspec_cells += other.low_misspec_cells;
  low_misspec_ratio_sum += other.low_misspec_ratio_sum;
  if (!has_counterexample && other.has_counterexample) {
    has_counterexample = true;
    counterexample = other.counterexample;
  }
}

SweepSummary run_sweep(const GridSpec& spec, const RecordSink& sink) {
  const std::uint64_t count = grid_cell_count(spec);
  SweepSummary summary;
  for (std::uint64_t i = 0; i < count; ++i) {
    const SweepRecord rec = evaluate_cell(spec, i);
    summary.add(rec);
    if (sink) {
      sink(rec);
    }
  }
  return summary;
}

FigureBinner::FigureBinner(double bin_width) : width_(bin_width) {
  if (!(bin_width > 0.0)) {
    throw ValidationError("bin width must be positive");
  }
}

int FigureBinner::bin_of(double x) const {
  return static_cast<int>(std::floor(x / width_ + 1e-9));
}

void FigureBinner::add(const SweepRecord& rec) {
  // The expected-distance axis is the same L1 metric as misspecification;
  // the duplication mirrors the study's two framings of the comparison.
  const double expected_dist = rec.misspec;
  for (auto* table : {&misspec_spread_, &misspec_expected_}) {
    const double y = table == &misspec_spread_ ? rec.spread : expected_dist;
    Bin& bin = (*table)[{bin_of(rec.misspec), bin_of(y)}];
    if (rec.ratio_defined) {
      bin.ratio_sum += rec.ratio;
      ++bin.count;
    } else {
      ++bin.undefined;
    }
  }

  static const double kSetups[4][3] = {{0.1, 0.1, 0.1},
                                       {0.1, 0.5, 0.9},
                                       {0.5, 0.5, 0.5},
                                       {0.9, 0.9, 0.9}};
  if (rec.q.size() == 3 && rec.ratio_defined) {
    for (int s = 0; s < 4; ++s) {
      bool match = true;
      for (int h = 0; h < 3; ++h) {
        if (std::abs(rec.q[h] - kSetups[s][h]) > 1e-9) {
          match = false;
          break;
        }
      }
      if (match) {
        scatter_.push_back({s + 1, rec.spread, rec.ratio, rec.misspec});
      }
    }
  }
}

void FigureBinner::merge(const FigureBinner& other) {
  for (auto pair : {std::pair{&misspec_spread_, &other.misspec_spread_},
                    std::pair{&misspec_expected_, &other.misspec_expected_}}) {
    for (const auto& [key, bin] : *pair.second) {
      Bin& dst = (*pair.first)[key];
      dst.ratio_sum += bin.ratio_sum;
      dst.count += bin.count;
      dst.undefined += bin.undefined;
    }
  }
  scatter_.insert(scatter_.end(), other.scatter_.begin(), other.scatter_.end());
}

void FigureBinner::write_table(
    std::ostream& os, const char* y_name,
    const std::map<std::pair<int, int>, Bin>& table) const {
  os << "misspec_bin," << y_name << "_bin,mean_ratio,defined_count,undefined_count\n";
  for (const auto& [key, bin] : table) {
    os << fmt17(key.first * width_) << ',' << fmt17(key.second * width_) << ',';
    if (bin.count > 0) {
      os << fmt17(bin.ratio_sum / static_cast<double>(bin.count));
    } else {
      os << "NA";
    }
    os << ',' << bin.count << ',' << bin.undefined << '\n';
  }
}

void FigureBinner::write_misspec_spread_csv(std::ostream& os) const {
  write_table(os, "spread", misspec_spread_);
}

void FigureBinner::write_misspec_expected_csv(std::ostream& os) const {
  write_table(os, "expected_dist", misspec_expected_);
}

void FigureBinner::write_q_setup_scatter_csv(std::ostream& os) const {
  os << "q_setup,spread,ratio,misspec\n";
  for (const ScatterPoint& pt : scatter_) {
    os << pt.setup << ',' << fmt17(pt.spread) << ',' << fmt17(pt.ratio) << ','
       << fmt17(pt.misspec) << '\n';
  }
}

void FigureBinner::write_misspec_spread_svg(std::ostream& os) const {
  int max_x = 0;
  int max_y = 0;
  for (const auto& [key, bin] : misspec_spread_) {
    max_x = std::max(max_x, key.first);
    max_y = std::max(max_y, key.second);
  }
  const int cell = 24;
  const int w = (max_x + 1) * cell + 60;
  const int h = (max_y + 1) * cell + 60;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "'>\n";
  for (const auto& [key, bin] : misspec_spread_) {
    if (bin.count == 0) {
      continue;
    }
    const double ratio = bin.ratio_sum / static_cast<double>(bin.count);
    // Blue below 1 (ERR wins), red above.
    const double t = std::clamp((ratio - 1.0) * 2.0, -1.0, 1.0);
    const int red = static_cast<int>(127.0 + 127.0 * t);
    const int blue = static_cast<int>(127.0 - 127.0 * t);
    os << "<rect x='" << 40 + key.first * cell << "' y='"
       << h - 40 - (key.second + 1) * cell << "' width='" << cell
       << "' height='" << cell << "' fill='rgb(" << red << ",80," << blue
       << ")'><title>misspec " << fmt17(key.first * width_) << " spread "
       << fmt17(key.second * width_) << " ratio " << fmt17(ratio)
       << "</title></rect>\n";
  }
  os << "</svg>\n";
}

namespace {

struct ChunkPayload {
  std::string csv;
  FigureBinner binner;
  SweepSummary summary;
};

std::string format_row(const SweepRecord& rec) {
  std::string row;
  row.reserve(256);
  for (const std::vector<double>* vec : {&rec.p, &rec.r, &rec.q}) {
    for (double v : *vec) {
      row += fmt17(v);
      row += ',';
    }
  }
  row += fmt17(rec.var_ps);
  row += ',';
  row += fmt17(rec.var_err);
  row += ',';
  row += rec.ratio_defined ? fmt17(rec.ratio) : "NA";
  row += ',';
  row += fmt17(rec.misspec);
  row += ',';
  row += fmt17(rec.spread);
  row += '\n';
  return row;
}

std::string csv_header(const GridSpec& spec) {
  std::string header;
  for (const char* name : {"p", "r", "q"}) {
    for (std::size_t h = 1; h <= spec.strata_count; ++h) {
      header += name;
      header += std::to_string(h);
      header += ',';
    }
  }
  header += "var_ps,var_err,ratio,misspec,spread\n";
  return header;
}

ChunkPayload evaluate_chunk(const GridSpec& spec, std::uint64_t begin,
                            std::uint64_t end) {
  ChunkPayload payload;
  for (std::uint64_t i = begin; i < end; ++i) {
    const SweepRecord rec = evaluate_cell(spec, i);
    payload.csv += format_row(rec);
    payload.binner.add(rec);
    payload.summary.add(rec);
  }
  return payload;
}

}  // namespace

void sweep_to_csv(const GridSpec& spec, std::ostream& os, unsigned workers,
                  FigureBinner* binner, SweepSummary* summary) {
  const std::uint64_t count = grid_cell_count(spec);
  os << csv_header(spec);

  FigureBinner local_binner;
  SweepSummary local_summary;

  if (workers <= 1) {
    for (std::uint64_t begin = 0; begin < count; begin += kChunkCells) {
      ChunkPayload payload =
          evaluate_chunk(spec, begin, std::min(count, begin + kChunkCells));
      os << payload.csv;
      local_binner.merge(payload.binner);
      local_summary.merge(payload.summary);
    }
  } else {
    const std::uint64_t chunks = (count + kChunkCells - 1) / kChunkCells;
    std::atomic<std::uint64_t> next_chunk{0};
    std::mutex mu;
    std::condition_variable produced;
    std::condition_variable drained;
    std::map<std::uint64_t, ChunkPayload> ready;
    std::uint64_t write_head = 0;
    const std::uint64_t window = static_cast<std::uint64_t>(workers) * 4 + 4;

    auto worker = [&] {
      for (;;) {
        const std::uint64_t c = next_chunk.fetch_add(1);
        if (c >= chunks) {
          return;
        }
        {
          // Bound how far producers run ahead of the in-order writer.
          std::unique_lock<std::mutex> lock(mu);
          drained.wait(lock, [&] { return c < write_head + window; });
        }
        ChunkPayload payload = evaluate_chunk(
            spec, c * kChunkCells, std::min(count, (c + 1) * kChunkCells));
        std::lock_guard<std::mutex> lock(mu);
        ready.emplace(c, std::move(payload));
        produced.notify_all();
      }
    };

    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back(worker);
    }
    for (std::uint64_t c = 0; c < chunks; ++c) {
      ChunkPayload payload;
      {
        std::unique_lock<std::mutex> lock(mu);
        produced.wait(lock, [&] { return ready.count(c) > 0; });
        payload = std::move(ready.at(c));
        ready.erase(c);
        write_head = c + 1;
        drained.notify_all();
      }
      os << payload.csv;
      local_binner.merge(payload.binner);
      local_summary.merge(payload.summary);
    }
    for (std::thread& th : pool) {
      th.join();
    }
  }

  if (!os.good()) {
    throw std::runtime_error("sweep sink write failed");
  }
  if (binner) {
    binner->merge(local_binner);
  }
  if (summary) {
    summary->merge(local_summary);
  }
}

}  // namespace strata
