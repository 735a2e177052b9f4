#include "strata/json_io.hpp"

#include <fstream>
#include <string>

namespace strata {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) {
    throw ValidationError(std::string("'") + key + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t integer(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("'") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::vector<double> number_list(const json& v, const char* key) {
  if (!v.is_array()) {
    throw ValidationError(std::string("'") + key + "' must be an array");
  }
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) {
      throw ValidationError(std::string("'") + key +
                            "' entries must be numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

DesignDocument parse_design_document(const json& j) {
  const json& strata_json = require(j, "strata");
  if (!strata_json.is_array() || strata_json.empty()) {
    throw ValidationError("'strata' must be a nonempty array");
  }
  std::vector<Stratum> strata;
  std::vector<double> expected;
  for (const json& s : strata_json) {
    Stratum st;
    st.size = integer(s, "size");
    st.expected_rate = number(s, "expected_rate");
    st.yes_prob = number(s, "yes_prob");
    expected.push_back(st.expected_rate);
    strata.push_back(st);
  }
  Population pop(std::move(strata));
  DesignSpec design(std::move(pop), integer(j, "intended_size"));

  std::vector<double> rates =
      j.contains("true_rates") ? number_list(j.at("true_rates"), "true_rates")
                               : expected;
  ResponseScenario scenario{std::move(rates)};
  check_aligned(design.population, scenario);
  return DesignDocument{std::move(design), std::move(scenario)};
}

SimConfig parse_sim_config(const json& j) {
  DesignDocument doc = parse_design_document(j);
  SimConfig config{std::move(doc.design), std::move(doc.scenario)};

  const std::string method = require(j, "method").get<std::string>();
  if (method == "PS") {
    config.method = Method::PS;
  } else if (method == "ERR") {
    config.method = Method::ERR;
  } else {
    throw ValidationError("'method' must be \"PS\" or \"ERR\"");
  }

  config.replications = integer(j, "replications");
  if (config.replications < 1) {
    throw ValidationError("'replications' must be >= 1");
  }
  if (j.contains("seed")) {
    config.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("empty_stratum_policy")) {
    const std::string policy = j.at("empty_stratum_policy").get<std::string>();
    if (policy == "discard") {
      config.policy = EmptyStratumPolicy::Discard;
    } else if (policy == "error") {
      config.policy = EmptyStratumPolicy::Error;
    } else {
      throw ValidationError(
          "'empty_stratum_policy' must be \"discard\" or \"error\"");
    }
  }
  return config;
}

GridSpec parse_grid_spec(const json& j) {
  GridSpec spec;
  spec.strata_count = static_cast<std::size_t>(integer(j, "strata_count"));
  if (j.contains("rate_values")) {
    spec.rate_values = number_list(j.at("rate_values"), "rate_values");
  }
  spec.q_values = j.contains("q_values")
                      ? number_list(j.at("q_values"), "q_values")
                      : default_q_grid();
  if (j.contains("q_mode")) {
    const std::string mode = j.at("q_mode").get<std::string>();
    if (mode == "shared") {
      spec.q_mode = QMode::Shared;
    } else if (mode == "per-stratum") {
      spec.q_mode = QMode::PerStratum;
    } else {
      throw ValidationError("'q_mode' must be \"shared\" or \"per-stratum\"");
    }
  }
  if (j.contains("population_sizes")) {
    for (double v : number_list(j.at("population_sizes"), "population_sizes")) {
      spec.population_sizes.push_back(static_cast<std::int64_t>(v));
    }
  }
  if (j.contains("intended_size")) {
    spec.intended_size = integer(j, "intended_size");
  }
  validate(spec);
  return spec;
}

json to_json(const Allocation& alloc) {
  return json{{"method", method_name(alloc.method)},
              {"per_stratum", alloc.per_stratum},
              {"total", alloc.total}};
}

json to_json(const IntegerAllocation& alloc) {
  return json{{"method", method_name(alloc.method)},
              {"per_stratum", alloc.per_stratum},
              {"total", alloc.total}};
}

json to_json(const VarianceReport& report) {
  json j{{"per_stratum_ps", report.per_stratum_ps},
         {"per_stratum_err", report.per_stratum_err},
         {"total_ps", report.total_ps},
         {"total_err", report.total_err},
         {"ratio_defined", report.ratio_defined},
         {"correctly_specified", report.correctly_specified}};
  if (report.ratio_defined) {
    j["ratio"] = report.ratio;
  } else {
    j["ratio"] = nullptr;
  }
  return j;
}

json to_json(const SimResult& result) {
  return json{{"mean_estimate", result.mean_estimate},
              {"empirical_variance", result.empirical_variance},
              {"replicate_count_used", result.replicate_count_used},
              {"discarded_replicates", result.discarded_replicates},
              {"per_stratum_mean_estimates",
               result.per_stratum_mean_estimates}};
}

json to_json(const SweepSummary& summary) {
  json j{{"cell_count", summary.cell_count},
         {"defined_ratio_cells", summary.defined_ratio_cells},
         {"ratio_below_one", summary.ratio_below_one},
         {"min_ratio", summary.min_ratio},
         {"max_ratio", summary.max_ratio},
         {"correct_spec_violations", summary.correct_spec_violations},
         {"safe_region_violations", summary.safe_region_violations},
         {"low_misspec_cells", summary.low_misspec_cells},
         {"low_misspec_mean_ratio", summary.low_misspec_mean_ratio()}};
  if (summary.has_counterexample) {
    j["safe_region_counterexample"] = to_json(summary.counterexample);
  }
  return j;
}

json to_json(const SweepRecord& rec) {
  json j{{"index", rec.index}, {"p", rec.p},       {"r", rec.r},
         {"q", rec.q},         {"var_ps", rec.var_ps},
         {"var_err", rec.var_err}, {"misspec", rec.misspec},
         {"spread", rec.spread}};
  if (rec.ratio_defined) {
    j["ratio"] = rec.ratio;
  } else {
    j["ratio"] = nullptr;
  }
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace strata
