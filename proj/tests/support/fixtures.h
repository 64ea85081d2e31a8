#pragma once

#include "capsim/scenario.h"
#include "capsim/scenario_io.h"

#include <string>

#ifndef CAPSIM_SCENARIO_DIR
#error "CAPSIM_SCENARIO_DIR must point at the bundled scenarios"
#endif

namespace capsim::testing {

inline std::string scenario_path(const std::string &stem) {
    return std::string(CAPSIM_SCENARIO_DIR) + "/" + stem + ".yaml";
}

inline ScenarioSpec health_inequity() { return load_scenario_file(scenario_path("health_inequity")); }

/// Sick (health 1) agent of the given registration, caring about health.
inline AgentProfile sick_agent(Registration registration, AgentId id = 0) {
    AgentProfile agent;
    agent.id = id;
    agent.state.health = 1;
    agent.state.housing = Housing::Roofless;
    agent.state.registration = registration;
    agent.choice.set_value_pref(ValueDimension::Security, 0.9);
    agent.choice.set_urgency(NeedDimension{"PainRelief"}, 0.4);
    return agent;
}

} // namespace capsim::testing
