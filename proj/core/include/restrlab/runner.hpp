#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "restrlab/report.hpp"

namespace restrlab {

// {"experiment": name, "seed": u64, "params": {...}}. Unknown parameter keys and
// wrongly typed values are rejected so that typos do not silently fall back to defaults.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

// Dispatches to the owning module; the report carries the config hash and wall time.
// Throws ConfigInvalid for unknown experiments or parameters.
Report run_experiment(const ExperimentConfig& cfg);

// Boundary lines of the admissible region in the (1/s, 1/p) square, `points`
// samples each: edge 1 is 1/p = 1/max(10/3, h+1), edge 2 is 1/s' = (h+1)/p and
// edge 3 is 1/s + (2M+1)/p = (M+2)/2. on_boundary marks the active piece.
Report region_report(double m1, double m2, int points = 1000);

}  // namespace restrlab
