#pragma once

#include <nlohmann/json.hpp>

#include "strata/allocation.hpp"
#include "strata/simulation.hpp"
#include "strata/sweep.hpp"
#include "strata/variance.hpp"

namespace strata {

// Design documents look like
//   {"strata": [{"size":..,"expected_rate":..,"yes_prob":..}, ...],
//    "true_rates": [...],            // optional, defaults to expected_rate
//    "intended_size": ...}
// Simulation configs add method/replications/seed/empty_stratum_policy, and
// grid specs use strata_count/rate_values/q_values/q_mode/population_sizes/
// intended_size. Structural problems throw ValidationError naming the field.

struct DesignDocument {
  DesignSpec design;
  ResponseScenario scenario;
};

DesignDocument parse_design_document(const nlohmann::json& j);
SimConfig parse_sim_config(const nlohmann::json& j);
GridSpec parse_grid_spec(const nlohmann::json& j);

nlohmann::json to_json(const Allocation& alloc);
nlohmann::json to_json(const IntegerAllocation& alloc);
nlohmann::json to_json(const VarianceReport& report);
nlohmann::json to_json(const SimResult& result);
nlohmann::json to_json(const SweepSummary& summary);
nlohmann::json to_json(const SweepRecord& rec);

nlohmann::json load_json_file(const std::string& path);

}  // namespace strata
