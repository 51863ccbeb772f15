#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustse/montecarlo.hpp"

namespace robustse {

/// {meta: {version, generator, seed, table?, configs}, results: [...], warnings: [...]}.
/// One result row per (configuration, method). Thread count is not part of the output.
nlohmann::json simulation_json(const std::vector<SimulationReport>& reports,
                               std::optional<int> table = std::nullopt);

/// Aligned text with the three panels (relative bias, relative RMSE, empirical size).
std::string simulation_table(const std::vector<SimulationReport>& reports);

}  // namespace robustse
