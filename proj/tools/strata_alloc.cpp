// Command-line front end: allocate, variance, compare, simulate, sweep.
//
// Exit codes: 0 ok, 2 config validation failure, 3 degenerate ratio under
// --require-ratio, 4 all replicates discarded, 5 output write failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "strata/allocation.hpp"
#include "strata/json_io.hpp"
#include "strata/simulation.hpp"
#include "strata/sweep.hpp"
#include "strata/variance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string iso8601_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read back " + path.string());
  }
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

unsigned env_default_workers() {
  if (const char* env = std::getenv("STRATA_ALLOC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return 1;
}

// Reproducibility record written next to every file-producing run.
void write_manifest(const fs::path& path, const std::string& subcommand,
                    const json& resolved_config,
                    std::optional<std::uint64_t> seed,
                    const std::string& started_at,
                    const std::vector<fs::path>& outputs) {
  json manifest{{"tool", "strata-alloc"},
                {"version", kVersion},
                {"subcommand", subcommand},
                {"config", resolved_config},
                {"started_at", started_at},
                {"finished_at", iso8601_now()}};
  if (seed) {
    manifest["seed"] = *seed;
  }
  json files = json::array();
  for (const fs::path& out : outputs) {
    files.push_back(
        {{"path", out.filename().string()}, {"fnv1a64", fnv1a64_file(out)}});
  }
  manifest["outputs"] = files;
  std::ofstream os(path);
  os << manifest.dump(2) << '\n';
  if (!os) {
    throw std::runtime_error("cannot write manifest " + path.string());
  }
}

struct CliError {
  int code;
  std::string message;
};

int cmd_allocate(const std::string& config_path, const std::string& out_path) {
  const json config = strata::load_json_file(config_path);
  strata::DesignDocument doc = strata::parse_design_document(config);
  const strata::Allocation ps = strata::allocate_ps(doc.design);
  const strata::Allocation err = strata::allocate_err(doc.design);
  const strata::IntegerAllocation ps_int = strata::round_allocation(ps);
  const strata::IntegerAllocation err_int = strata::round_allocation(err);

  std::ostringstream csv;
  csv << "stratum,size,expected_rate,ps_real,ps_int,err_real,err_int\n";
  const auto& strata_list = doc.design.population.strata();
  for (std::size_t h = 0; h < strata_list.size(); ++h) {
    csv << (h + 1) << ',' << strata_list[h].size << ','
        << fmt17(strata_list[h].expected_rate) << ','
        << fmt17(ps.per_stratum[h]) << ',' << ps_int.per_stratum[h] << ','
        << fmt17(err.per_stratum[h]) << ',' << err_int.per_stratum[h] << '\n';
  }
  csv << "total," << doc.design.population.total_size() << ",,"
      << fmt17(ps.total) << ',' << ps_int.total << ',' << fmt17(err.total)
      << ',' << err_int.total << '\n';

  std::cout << csv.str();
  if (!out_path.empty()) {
    const std::string started = iso8601_now();
    std::ofstream os(out_path);
    os << csv.str();
    if (!os) {
      throw CliError{5, "cannot write " + out_path};
    }
    os.close();
    write_manifest(fs::path(out_path).string() + ".manifest.json", "allocate",
                   config, std::nullopt, started, {out_path});
  }
  return 0;
}

int cmd_variance(const std::string& config_path, const std::string& out_path,
                 const std::string& format, bool require_ratio,
                 const std::string& subcommand) {
  const json config = strata::load_json_file(config_path);
  strata::DesignDocument doc = strata::parse_design_document(config);
  const strata::VarianceReport report =
      strata::compare(doc.design, doc.scenario);

  std::string body;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "total_ps,total_err,ratio,correctly_specified\n"
        << fmt17(report.total_ps) << ',' << fmt17(report.total_err) << ','
        << (report.ratio_defined ? fmt17(report.ratio) : std::string("NA"))
        << ',' << (report.correctly_specified ? "true" : "false") << '\n';
    body = csv.str();
  } else {
    body = strata::to_json(report).dump(2) + "\n";
  }

  std::cout << body;
  if (!out_path.empty()) {
    const std::string started = iso8601_now();
    std::ofstream os(out_path);
    os << body;
    if (!os) {
      throw CliError{5, "cannot write " + out_path};
    }
    os.close();
    write_manifest(fs::path(out_path).string() + ".manifest.json", subcommand,
                   config, std::nullopt, started, {out_path});
  }
  if (require_ratio && !report.ratio_defined) {
    throw CliError{3, "variance ratio undefined (all yes-probabilities degenerate)"};
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format,
                 std::optional<std::uint64_t> seed_flag,
                 std::optional<std::int64_t> reps_flag,
                 const std::string& policy_flag) {
  json config = strata::load_json_file(config_path);
  if (seed_flag) {
    config["seed"] = *seed_flag;
  }
  if (reps_flag) {
    config["replications"] = *reps_flag;
  }
  if (!policy_flag.empty()) {
    config["empty_stratum_policy"] = policy_flag;
  }
  if (!config.contains("seed")) {
    throw strata::ValidationError("missing key 'seed' (pass --seed)");
  }
  const strata::SimConfig sim = strata::parse_sim_config(config);
  const std::string started = iso8601_now();

  strata::SimResult result;
  try {
    result = strata::run_monte_carlo(sim, env_default_workers());
  } catch (const strata::AllDiscarded& e) {
    throw CliError{4, e.what()};
  }

  std::string body;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "mean_estimate,empirical_variance,replicate_count_used,"
           "discarded_replicates\n"
        << fmt17(result.mean_estimate) << ','
        << fmt17(result.empirical_variance) << ','
        << result.replicate_count_used << ',' << result.discarded_replicates
        << '\n';
    body = csv.str();
  } else {
    json j = strata::to_json(result);
    j["seed"] = sim.seed;
    j["method"] = strata::method_name(sim.method);
    j["replications"] = sim.replications;
    body = j.dump(2) + "\n";
  }

  std::cout << body;
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    os << body;
    if (!os) {
      throw CliError{5, "cannot write " + out_path};
    }
    os.close();
    write_manifest(fs::path(out_path).string() + ".manifest.json", "simulate",
                   config, sim.seed, started, {out_path});
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              unsigned workers, const std::string& q_mode_flag, bool svg) {
  json config = strata::load_json_file(config_path);
  if (!q_mode_flag.empty()) {
    config["q_mode"] = q_mode_flag;
  }
  const strata::GridSpec spec = strata::parse_grid_spec(config);
  const std::string started = iso8601_now();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::vector<fs::path> outputs;
  try {
    strata::FigureBinner binner;
    strata::SweepSummary summary;
    {
      std::ofstream records(dir / "records.csv");
      strata::sweep_to_csv(spec, records, workers, &binner, &summary);
      if (!records) {
        throw std::runtime_error("write failed: records.csv");
      }
    }
    outputs.push_back(dir / "records.csv");

    const auto emit = [&](const char* name, auto&& writer) {
      std::ofstream os(dir / name);
      writer(os);
      if (!os) {
        throw std::runtime_error(std::string("write failed: ") + name);
      }
      outputs.push_back(dir / name);
    };
    emit("fig_misspec_spread.csv",
         [&](std::ostream& os) { binner.write_misspec_spread_csv(os); });
    emit("fig_misspec_expected.csv",
         [&](std::ostream& os) { binner.write_misspec_expected_csv(os); });
    emit("fig_q_setup_scatter.csv",
         [&](std::ostream& os) { binner.write_q_setup_scatter_csv(os); });
    if (svg) {
      emit("fig_misspec_spread.svg",
           [&](std::ostream& os) { binner.write_misspec_spread_svg(os); });
    }
    emit("summary.json", [&](std::ostream& os) {
      json j = strata::to_json(summary);
      j["workers"] = workers;
      os << j.dump(2) << '\n';
    });

    write_manifest(dir / "manifest.json", "sweep", config, std::nullopt,
                   started, outputs);
  } catch (const std::exception& e) {
    // Leave no partial output set behind.
    for (const fs::path& out : outputs) {
      std::error_code ec;
      fs::remove(out, ec);
    }
    std::error_code ec;
    fs::remove(dir / "records.csv", ec);
    throw CliError{5, e.what()};
  }
  std::cout << "sweep: " << strata::grid_cell_count(spec) << " cells -> "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratified-survey sample allocation and variance toolkit"};
  app.set_version_flag("--version", std::string("strata-alloc ") + kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";

  auto add_common = [&](CLI::App* sub, bool with_format = true) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "Output file or directory");
    if (with_format) {
      sub->add_option("--format", format, "Output format")
          ->check(CLI::IsMember({"json", "csv"}));
    }
  };

  CLI::App* allocate = app.add_subcommand("allocate", "PS and ERR allocations");
  add_common(allocate, false);

  bool require_ratio = false;
  CLI::App* variance = app.add_subcommand("variance", "Asymptotic variances");
  add_common(variance);
  variance->add_flag("--require-ratio", require_ratio,
                     "Fail when the variance ratio is undefined");
  CLI::App* cmp = app.add_subcommand("compare", "PS vs ERR variance report");
  add_common(cmp);
  cmp->add_flag("--require-ratio", require_ratio,
                "Fail when the variance ratio is undefined");

  std::optional<std::uint64_t> seed_flag;
  std::optional<std::int64_t> reps_flag;
  std::string policy_flag;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run");
  add_common(simulate);
  simulate->add_option("--seed", seed_flag, "RNG seed (overrides config)");
  simulate->add_option("--reps", reps_flag, "Replications (overrides config)");
  simulate->add_option("--policy", policy_flag, "Empty-stratum policy")
      ->check(CLI::IsMember({"discard", "error"}));

  unsigned workers = env_default_workers();
  std::string q_mode_flag;
  bool svg = false;
  CLI::App* sweep = app.add_subcommand("sweep", "Misspecification grid sweep");
  sweep->add_option("--config", config_path, "Grid spec JSON")->required();
  sweep->add_option("--out", out_path, "Output directory")->required();
  sweep->add_option("--workers", workers, "Worker thread count");
  sweep->add_option("--q-mode", q_mode_flag, "Yes-probability grid mode")
      ->check(CLI::IsMember({"shared", "per-stratum"}));
  sweep->add_flag("--svg", svg, "Also emit the SVG heatmap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (allocate->parsed()) {
      return cmd_allocate(config_path, out_path);
    }
    if (variance->parsed() || cmp->parsed()) {
      return cmd_variance(config_path, out_path, format, require_ratio,
                          variance->parsed() ? "variance" : "compare");
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, out_path, format, seed_flag, reps_flag,
                          policy_flag);
    }
    if (sweep->parsed()) {
      if (workers < 1) {
        throw strata::ValidationError("--workers must be >= 1");
      }
      return cmd_sweep(config_path, out_path, workers, q_mode_flag, svg);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const strata::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
