#include "capsim/mdp.h"

#include "capsim/errors.h"
#include "capsim/report_io.h"

#include <cmath>
#include <deque>
#include <map>

namespace capsim {

std::vector<ActionId> TransitionModel::possible_actions(StateId s) const {
    std::vector<ActionId> out;
    for (std::size_t a = 0; a < num_actions; ++a) {
        if (possible(s, ActionId{static_cast<std::uint32_t>(a)})) {
            out.push_back(ActionId{static_cast<std::uint32_t>(a)});
        }
    }
    return out;
}

std::optional<StateId> CompiledMdp::find_state(const PersonalState &state) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == state) {
            return StateId{static_cast<std::uint32_t>(i)};
        }
    }
    return std::nullopt;
}

std::optional<ActionId> CompiledMdp::find_action(std::string_view name) const {
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i] == name) {
            return ActionId{static_cast<std::uint32_t>(i)};
        }
    }
    return std::nullopt;
}

CompiledMdp compile(const AgentProfile &agent, const ScenarioSpec &scenario,
                    const CompileContext &context) {
    const Environment &env =
        context.environment != nullptr ? *context.environment : scenario.environment;
    const std::size_t cap =
        context.state_cap != 0 ? context.state_cap : scenario.simulation.state_cap;
    const std::size_t num_actions = scenario.actions.size();

    CompiledMdp mdp;
    for (const auto &action : scenario.actions) {
        mdp.actions.push_back(action.name);
    }
    mdp.transitions.num_actions = num_actions;
    mdp.rewards.short_term.num_actions = num_actions;
    mdp.rewards.long_term.num_actions = num_actions;

    // Rewards depend on the choice factors only; states just gate them.
    std::vector<double> short_base(num_actions);
    std::vector<double> long_base(num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) {
        short_base[a] = short_reward(scenario.actions[a], agent.choice);
        long_base[a] = long_reward(scenario.actions[a], agent.choice);
    }

    std::map<PersonalState, StateId> ids;
    auto intern = [&](const PersonalState &state) {
        const auto [it, inserted] =
            ids.emplace(state, StateId{static_cast<std::uint32_t>(mdp.states.size())});
        if (inserted) {
            if (mdp.states.size() >= cap) {
                throw StateSpaceExplosion(cap);
            }
            mdp.states.push_back(state);
        }
        return it->second;
    };

    mdp.initial_state = intern(agent.state);
    // States are appended in discovery order, so index order is BFS order.
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        const StateId here{static_cast<std::uint32_t>(s)};
        const PersonalState state = mdp.states[s];
        const bool terminal = scenario.simulation.terminal_when &&
                              scenario.simulation.terminal_when->holds(state, env);
        mdp.terminal.push_back(terminal ? 1 : 0);

        for (std::size_t a = 0; a < num_actions; ++a) {
            const auto &action = scenario.actions[a];
            const double f = feasibility_at(state, agent.personal_factors, action, scenario, env,
                                            context.counters);
            mdp.transitions.feasibility.push_back(f);

            std::vector<Outcome> row;
            double r_short = 0.0;
            double r_long = 0.0;
            if (terminal || f <= 0.0) {
                row.push_back({here, 1.0});
            } else {
                r_short = short_base[a];
                r_long = long_base[a];
                const StateId next = intern(apply_state_effects(state, action.effects, scenario));
                if (next == here || f >= 1.0) {
                    row.push_back({next, 1.0});
                } else {
                    row.push_back({next, f});
                    row.push_back({here, 1.0 - f});
                }
            }
            mdp.transitions.rows.push_back(std::move(row));
            mdp.rewards.short_term.values.push_back(r_short);
            mdp.rewards.long_term.values.push_back(r_long);
        }
    }
    mdp.transitions.num_states = mdp.states.size();
    return mdp;
}

std::vector<std::string> violations(const CompiledMdp &mdp) {
    std::vector<std::string> out;
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto &tm = mdp.transitions;
    if (tm.num_states != S || tm.num_actions != A || tm.rows.size() != S * A ||
        tm.feasibility.size() != S * A || mdp.rewards.short_term.values.size() != S * A ||
        mdp.rewards.long_term.values.size() != S * A || mdp.terminal.size() != S) {
        out.emplace_back("table sizes disagree with |S| x |A|");
        return out;
    }
    if (S == 0 || index(mdp.initial_state) >= S) {
        out.emplace_back("initial state out of range");
    }
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t k = s * A + a;
            const auto where = "(" + std::to_string(s) + ", " + std::to_string(a) + ")";
            double total = 0.0;
            for (const auto &o : tm.rows[k]) {
                if (index(o.next) >= S) {
                    out.push_back("successor out of range at " + where);
                }
                if (!(o.probability >= 0.0 && o.probability <= 1.0)) {
                    out.push_back("probability outside [0,1] at " + where);
                }
                total += o.probability;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                out.push_back("row " + where + " sums to " + std::to_string(total));
            }
            if (tm.feasibility[k] <= 0.0) {
                const bool self_loop = tm.rows[k].size() == 1 &&
                                       index(tm.rows[k][0].next) == s &&
                                       tm.rows[k][0].probability == 1.0;
                if (!self_loop) {
                    out.push_back("impossible pair " + where + " is not a self-loop");
                }
                if (mdp.rewards.short_term.values[k] != 0.0 ||
                    mdp.rewards.long_term.values[k] != 0.0) {
                    out.push_back("impossible pair " + where + " has a nonzero reward");
                }
            }
        }
    }
    return out;
}

nlohmann::json mdp_to_json(const CompiledMdp &mdp) {
    using json = nlohmann::json;
    json states = json::array();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        auto entry = state_to_json(mdp.states[s]);
        entry["id"] = s;
        entry["terminal"] = mdp.terminal[s] != 0;
        states.push_back(std::move(entry));
    }
    json transitions = json::array();
    json feasibility = json::array();
    json r_short = json::array();
    json r_long = json::array();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        json f_row = json::array();
        json rs_row = json::array();
        json rl_row = json::array();
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            const std::size_t k = s * mdp.num_actions() + a;
            f_row.push_back(mdp.transitions.feasibility[k]);
            rs_row.push_back(mdp.rewards.short_term.values[k]);
            rl_row.push_back(mdp.rewards.long_term.values[k]);
            for (const auto &o : mdp.transitions.rows[k]) {
                transitions.push_back({s, a, index(o.next), o.probability});
            }
        }
        feasibility.push_back(std::move(f_row));
        r_short.push_back(std::move(rs_row));
        r_long.push_back(std::move(rl_row));
    }
    return {{"actions", mdp.actions},
            {"states", states},
            {"initial_state", index(mdp.initial_state)},
            {"feasibility", feasibility},
            {"transitions", transitions},
            {"reward_short", r_short},
            {"reward_long", r_long}};
}

} // namespace capsim
