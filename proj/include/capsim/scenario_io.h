#pragma once

// Scenario documents are YAML (any JSON document is accepted too). Top-level
// keys: format_version, name, resources, norms, environment, actions,
// population, simulation. See scenarios/health_inequity.yaml and the README
// for the full schema.

#include "capsim/scenario.h"

#include "json.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace capsim {

/// Parses and validates. Throws ParseError on malformed input and
/// ValidationError listing every violation otherwise.
ScenarioSpec load_scenario(std::istream &source);
ScenarioSpec load_scenario_text(std::string_view text);

/// Accepts a path with or without the `.yaml` extension.
ScenarioSpec load_scenario_file(const std::filesystem::path &path);

/// Resolves `path`, trying `path.yaml` and `path.yml` when `path` is missing.
std::filesystem::path resolve_scenario_path(const std::filesystem::path &path);

/// Canonical document in the file schema; `load_scenario_text(dump())`
/// returns an equal spec.
nlohmann::json scenario_to_json(const ScenarioSpec &spec);

nlohmann::json condition_to_json(const Condition &condition);
nlohmann::json aggregation_to_json(const AggregationMode &mode);

/// Accepts "lexicographic" or {"mode": ..., "epsilon"/"weight": ...}.
/// Throws ParseError.
AggregationMode aggregation_from_json(const nlohmann::json &doc);

} // namespace capsim
