#pragma once

// Per-tick solve / choose / act cycle.
//
// Each tick resets bounded resource counters, then every agent (ascending id,
// or a seeded shuffle) compiles its MDP at its current state, solves both
// Q-tables, picks an action and samples the transition. A realised action
// updates the agent state and the world (loop 1) and the agent's choice
// factors (loop 2).

#include "capsim/agent.h"
#include "capsim/aggregation.h"
#include "capsim/mdp.h"
#include "capsim/random.h"
#include "capsim/scenario.h"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace capsim {

struct WorldState {
    std::int64_t tick = 0;
    ResourceCounters remaining;
    std::map<Payer, double> expenses;
    Environment environment;

    static WorldState initial(const ScenarioSpec &scenario);
    void reset_counters(const ScenarioSpec &scenario);
    double total_expenses() const;
};

struct TrajectoryEvent {
    std::int64_t tick = 0;
    AgentId agent = 0;
    PersonalState before;
    PersonalState after;
    ChoiceFactors choice_before;
    ChoiceFactors choice_after;
    ActionId action = kNoOp;
    double feasibility = 0.0; // of `action` at choice time; 0 for no-op
    std::vector<ActionId> possible;
    std::vector<ActionId> impossible;
    bool realised = false;

    bool operator==(const TrajectoryEvent &) const = default;
};

/// Memo of decisions keyed by everything a decision depends on: agent state,
/// choice factors, personal factors and the set of resource-blocked actions.
class DecisionCache {
  public:
    struct Entry {
        ActionId action = kNoOp;
        std::vector<double> feasibility; // per action at the decision state
        bool terminal = false;
    };

    const Entry *find(const std::string &key) const;
    void insert(std::string key, Entry entry);
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t hits() const noexcept { return hits_; }

  private:
    std::unordered_map<std::string, Entry> entries_;
    mutable std::size_t hits_ = 0;
};

/// Applies UrgencyDelta / ValuePrefDelta rules additively, clamped to [0,1].
/// Identity when the event was not realised or there are no such rules.
ChoiceFactors update_choice_factors(const ChoiceFactors &choice, const TrajectoryEvent &event,
                                    std::span<const EffectRule> rules);

/// One decision for one agent. Mutates the agent and the world; draws exactly
/// one uniform from `rng` when an action is chosen, none for a no-op.
TrajectoryEvent step_agent(AgentProfile &agent, WorldState &world, const ScenarioSpec &scenario,
                           const AggregationMode &mode, Rng &rng, DecisionCache *cache = nullptr);

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    AggregationMode aggregation;
    Schedule schedule = Schedule::Ascending;
    NormOverrides norm_overrides;
    std::vector<std::string> actions;
    std::vector<AgentProfile> initial_agents;
    std::vector<AgentProfile> final_agents;
    std::vector<TrajectoryEvent> events; // tick-major, schedule order within a tick
    WorldState final_world;
};

struct RunOptions {
    bool use_cache = true;
    NormOverrides norm_overrides; // recorded in the report; apply before calling run
};

/// Samples the population from the scenario with `seed` and simulates
/// simulation.horizon ticks.
RunReport run(const ScenarioSpec &scenario, std::uint64_t seed, const RunOptions &options = {});

/// Same, with a given population.
RunReport run(const ScenarioSpec &scenario, std::vector<AgentProfile> agents, std::uint64_t seed,
              const RunOptions &options = {});

} // namespace capsim
