#pragma once

// Explicit finite MDP compiled from one agent in one scenario.
//
//   states        reachable PersonalState snapshots
//   actions       the scenario's action catalog, in declaration order
//   P(s'|s,a)     feasibility f: effect-updated state with f, self-loop 1 - f;
//                 f = 0 (impossible): self-loop with probability 1
//   r_short/long  need urgencies / value preferences; 0 when impossible

#include "capsim/agent.h"
#include "capsim/scenario.h"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace capsim {

enum class StateId : std::uint32_t {};
enum class ActionId : std::uint32_t {};

/// Chosen when no action is feasible: the agent stays put.
inline constexpr ActionId kNoOp{std::numeric_limits<std::uint32_t>::max()};

constexpr std::size_t index(StateId s) noexcept { return static_cast<std::size_t>(s); }
constexpr std::size_t index(ActionId a) noexcept { return static_cast<std::size_t>(a); }

struct Outcome {
    StateId next;
    double probability = 0.0;
    bool operator==(const Outcome &) const = default;
};

struct TransitionModel {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<std::vector<Outcome>> rows; // [s * num_actions + a]
    std::vector<double> feasibility;        // 0 marks an impossible pair

    std::size_t slot(StateId s, ActionId a) const noexcept {
        return index(s) * num_actions + index(a);
    }
    const std::vector<Outcome> &row(StateId s, ActionId a) const { return rows.at(slot(s, a)); }
    bool possible(StateId s, ActionId a) const { return feasibility.at(slot(s, a)) > 0.0; }
    std::vector<ActionId> possible_actions(StateId s) const;
};

struct RewardTable {
    std::size_t num_actions = 0;
    std::vector<double> values; // [s * num_actions + a]

    double at(StateId s, ActionId a) const {
        return values.at(index(s) * num_actions + index(a));
    }
    double &at(StateId s, ActionId a) { return values.at(index(s) * num_actions + index(a)); }
};

struct DualRewardModel {
    RewardTable short_term;
    RewardTable long_term;
};

enum class RewardKind : std::uint8_t { Short, Long };

struct CompiledMdp {
    std::vector<PersonalState> states;
    std::vector<std::string> actions;
    TransitionModel transitions;
    DualRewardModel rewards;
    std::vector<std::uint8_t> terminal; // per state
    StateId initial_state{0};

    std::size_t num_states() const noexcept { return states.size(); }
    std::size_t num_actions() const noexcept { return actions.size(); }
    const RewardTable &reward(RewardKind kind) const {
        return kind == RewardKind::Short ? rewards.short_term : rewards.long_term;
    }
    std::optional<StateId> find_state(const PersonalState &state) const;
    std::optional<ActionId> find_action(std::string_view name) const;
};

/// World context for compilation; defaults to the scenario environment with
/// every resource available.
struct CompileContext {
    const Environment *environment = nullptr;
    const ResourceCounters *counters = nullptr;
    std::size_t state_cap = 0; // 0 = the scenario's simulation.state_cap
};

/// Breadth-first reachability closure from the agent's current state.
/// Throws StateSpaceExplosion when more than the cap of states is reachable.
CompiledMdp compile(const AgentProfile &agent, const ScenarioSpec &scenario,
                    const CompileContext &context = {});

/// Structural checks: ids in range, rows summing to 1 within 1e-12,
/// impossible pairs being probability-1 self-loops with zero rewards.
std::vector<std::string> violations(const CompiledMdp &mdp);

/// Debug dump: states, feasibility mask, transition triples, both reward tables.
nlohmann::json mdp_to_json(const CompiledMdp &mdp);

} // namespace capsim
