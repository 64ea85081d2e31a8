#pragma once

// The run pipeline shared by the CLI and the service, so both channels
// produce the same reports for the same request.

#include "capsim/dynamics.h"
#include "capsim/evaluation.h"
#include "capsim/scenario.h"

#include "json.hpp"

#include <cstdint>
#include <optional>

namespace capsim {

struct RunRequest {
    std::uint64_t seed = 0;
    NormOverrides norm_overrides;
    std::optional<AggregationMode> aggregation;
    std::optional<std::int64_t> horizon;
    bool use_cache = true;
};

/// Scenario with the request's overrides applied. Throws ValidationError when
/// the result is invalid or names an unknown norm.
ScenarioSpec configure(const ScenarioSpec &scenario, const RunRequest &request);

struct RunResult {
    ScenarioSpec scenario; // as configured
    RunReport report;
    EquityMetrics metrics;
};

RunResult execute(const ScenarioSpec &scenario, const RunRequest &request);

/// Document text written to disk and served over HTTP: two-space indented
/// JSON with a trailing newline.
std::string document_text(const nlohmann::json &doc);

} // namespace capsim
