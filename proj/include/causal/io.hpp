#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "causal/discovery.hpp"
#include "causal/scm.hpp"

namespace causal {

// Structured-text (JSON) codecs. Graph shape:
//   {"nodes":[{"id":..,"role":..,"block":..}], "edges":[[p,c],..],
//    "treatment_active": bool}
// A LinearSem adds {"coeffs":[[p,c,value],..], "noise_vars":{id:value}}.

nlohmann::json graph_to_json(const GraphSpec& g);
GraphSpec graph_from_json(const nlohmann::json& j);

nlohmann::json sem_to_json(const LinearSem& sem);
LinearSem sem_from_json(const nlohmann::json& j);

nlohmann::json discovery_result_to_json(const DiscoveryResult& res, const DiscoveryConfig& cfg);

/// Dataset CSV: header row of column ids, then numeric rows printed with
/// %.17g so re-reading reproduces the doubles bit for bit.
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Roles sidecar: {"columns":{id:{"role":..,"block":..,"scale":..}},
/// "standardized": bool}. The scale entries let downstream estimators map
/// standardized coefficients back to original units.
void write_roles_json(const Dataset& data, const std::string& path);

/// Rebuild a Dataset from a CSV plus its roles sidecar.
Dataset read_dataset_csv(const std::string& csv_path, const std::string& roles_path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

}  // namespace causal
