#include "capsim/pipeline.h"

#include "capsim/errors.h"

namespace capsim {

ScenarioSpec configure(const ScenarioSpec &scenario, const RunRequest &request) {
    ScenarioSpec spec = apply_norm_overrides(scenario, request.norm_overrides);
    if (request.aggregation) {
        spec.simulation.aggregation = *request.aggregation;
    }
    if (request.horizon) {
        spec.simulation.horizon = *request.horizon;
    }
    if (auto v = validate(spec); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    return spec;
}

RunResult execute(const ScenarioSpec &scenario, const RunRequest &request) {
    RunResult result;
    result.scenario = configure(scenario, request);
    RunOptions options;
    options.use_cache = request.use_cache;
    options.norm_overrides = request.norm_overrides;
    result.report = run(result.scenario, request.seed, options);
    result.metrics = compute_metrics(result.report, result.scenario);
    return result;
}

std::string document_text(const nlohmann::json &doc) { return doc.dump(2) + "\n"; }

} // namespace capsim
