#pragma once

// Serialized forms shared by the CLI and the HTTP service. JSON objects use
// sorted keys, so dumps are byte-stable for equal inputs.

#include "capsim/dynamics.h"
#include "capsim/evaluation.h"

#include "json.hpp"

#include <string>
#include <vector>

namespace capsim {

nlohmann::json state_to_json(const PersonalState &state);
nlohmann::json choice_to_json(const ChoiceFactors &choice);
nlohmann::json agent_to_json(const AgentProfile &agent);

nlohmann::json run_report_to_json(const RunReport &report);

/// tick,agent,health_before,housing_before,registration_before,health_after,
/// housing_after,registration_after,action,realised,possible_count,impossible_count
std::string trajectory_csv(const RunReport &report);

nlohmann::json metrics_to_json(const EquityMetrics &metrics);
/// Throws ParseError on a document not produced by metrics_to_json.
EquityMetrics metrics_from_json(const nlohmann::json &doc);

/// Long format: tick,metric,category,value. `metric` is deprivation (category =
/// capability) or one of health, housing, registration (category = level).
std::string series_csv(const EquityMetrics &metrics);

nlohmann::json delta_to_json(const DeltaReport &delta);

/// id,health,housing,registration,<attributes...>,<value prefs...>,<urgencies...>
std::string population_csv(const std::vector<AgentProfile> &agents);

/// Short human-readable summaries for `--format text`.
std::string metrics_text(const EquityMetrics &metrics);
std::string delta_text(const DeltaReport &delta);

} // namespace capsim
