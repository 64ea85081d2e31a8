#include "capsim/dynamics.h"

#include "capsim/decision.h"
#include "capsim/errors.h"
#include "capsim/population.h"
#include "capsim/scenario_io.h"
#include "capsim/solver.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <numeric>

namespace capsim {
namespace {

void put_double(std::string &out, double x) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
    out += buf;
    out += ';';
}

void put_state(std::string &out, const PersonalState &state) {
    out += std::to_string(state.health) + ';' + std::string(to_string(state.housing)) + ';' +
           std::string(to_string(state.registration)) + ';';
    for (const auto &[name, value] : state.attributes) {
        out += name + '=';
        if (const auto *d = std::get_if<double>(&value)) {
            put_double(out, *d);
        } else {
            out += '"' + std::get<std::string>(value) + "\";";
        }
    }
}

std::string cache_key(const AgentProfile &agent, const std::vector<std::uint8_t> &blocked) {
    std::string key;
    put_state(key, agent.state);
    key += '|';
    for (const auto &[v, w] : agent.choice.value_prefs()) {
        key += std::string(to_string(v)) + '=';
        put_double(key, w);
    }
    key += '|';
    for (const auto &[need, u] : agent.choice.need_urgencies()) {
        key += need.name + '=';
        put_double(key, u);
    }
    key += '|';
    for (const auto &term : agent.personal_factors) {
        key += std::string(to_string(term.kind)) + ':' + term.applies_to + ':' +
               condition_to_json(term.when).dump() + ':';
        put_double(key, term.factor);
    }
    key += '|';
    for (const auto b : blocked) {
        key += b != 0 ? '1' : '0';
    }
    return key;
}

/// Actions whose bounded resource has run out this tick.
std::vector<std::uint8_t> blocked_actions(const ScenarioSpec &scenario, const WorldState &world) {
    std::vector<std::uint8_t> out;
    out.reserve(scenario.actions.size());
    for (const auto &action : scenario.actions) {
        bool blocked = false;
        if (action.requires_resource) {
            const auto it = world.remaining.find(action.requires_resource->resource);
            blocked = it != world.remaining.end() && it->second < action.requires_resource->quantity;
        }
        out.push_back(blocked ? 1 : 0);
    }
    return out;
}

DecisionCache::Entry decide(const AgentProfile &agent, const WorldState &world,
                            const ScenarioSpec &scenario, const AggregationMode &mode) {
    CompileContext context;
    context.environment = &world.environment;
    context.counters = &world.remaining;
    const CompiledMdp mdp = compile(agent, scenario, context);
    const DualQTable q = solve_dual(mdp, solver_settings(scenario.simulation));
    const PolicyTable policy = derive_policy(q, mdp.transitions, mode);

    DecisionCache::Entry entry;
    const StateId s0 = mdp.initial_state;
    entry.action = policy.at(s0);
    entry.terminal = mdp.terminal[index(s0)] != 0;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        entry.feasibility.push_back(
            mdp.transitions.feasibility[mdp.transitions.slot(s0, ActionId{static_cast<std::uint32_t>(a)})]);
    }
    return entry;
}

} // namespace

WorldState WorldState::initial(const ScenarioSpec &scenario) {
    WorldState world;
    world.environment = scenario.environment;
    for (const auto payer : kPayers) {
        world.expenses[payer] = 0.0;
    }
    world.reset_counters(scenario);
    return world;
}

void WorldState::reset_counters(const ScenarioSpec &scenario) {
    remaining.clear();
    for (const auto &resource : scenario.resources) {
        if (resource.capacity) {
            remaining[resource.name] = *resource.capacity;
        }
    }
}

double WorldState::total_expenses() const {
    double total = 0.0;
    for (const auto &[payer, amount] : expenses) {
        total += amount;
    }
    return total;
}

const DecisionCache::Entry *DecisionCache::find(const std::string &key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return nullptr;
    }
    ++hits_;
    return &it->second;
}

void DecisionCache::insert(std::string key, Entry entry) {
    entries_.insert_or_assign(std::move(key), std::move(entry));
}

ChoiceFactors update_choice_factors(const ChoiceFactors &choice, const TrajectoryEvent &event,
                                    std::span<const EffectRule> rules) {
    ChoiceFactors out = choice;
    if (!event.realised) {
        return out;
    }
    for (const auto &rule : rules) {
        if (const auto *u = std::get_if<UrgencyDelta>(&rule)) {
            out.set_urgency(u->need, std::clamp(out.urgency(u->need) + u->amount, 0.0, 1.0));
        } else if (const auto *v = std::get_if<ValuePrefDelta>(&rule)) {
            out.set_value_pref(v->value, std::clamp(out.value_pref(v->value) + v->amount, 0.0, 1.0));
        }
    }
    return out;
}

TrajectoryEvent step_agent(AgentProfile &agent, WorldState &world, const ScenarioSpec &scenario,
                           const AggregationMode &mode, Rng &rng, DecisionCache *cache) {
    TrajectoryEvent event;
    event.tick = world.tick;
    event.agent = agent.id;
    event.before = agent.state;
    event.choice_before = agent.choice;

    DecisionCache::Entry entry;
    if (cache != nullptr) {
        auto key = cache_key(agent, blocked_actions(scenario, world));
        if (const auto *hit = cache->find(key)) {
            entry = *hit;
        } else {
            entry = decide(agent, world, scenario, mode);
            cache->insert(std::move(key), entry);
        }
    } else {
        entry = decide(agent, world, scenario, mode);
    }

    for (std::size_t a = 0; a < entry.feasibility.size(); ++a) {
        const ActionId id{static_cast<std::uint32_t>(a)};
        (entry.feasibility[a] > 0.0 ? event.possible : event.impossible).push_back(id);
    }
    event.action = entry.action;

    if (event.action != kNoOp) {
        const auto &action = scenario.actions.at(index(event.action));
        event.feasibility = entry.feasibility.at(index(event.action));
        const double u = uniform01(rng);
        event.realised = !entry.terminal && u < event.feasibility;
        if (event.realised) {
            agent.state = apply_state_effects(agent.state, action.effects, scenario);
            if (action.requires_resource) {
                const auto &req = *action.requires_resource;
                const auto *resource = scenario.find_resource(req.resource);
                if (auto it = world.remaining.find(req.resource); it != world.remaining.end()) {
                    it->second = std::max<std::int64_t>(0, it->second - req.quantity);
                }
                if (resource != nullptr) {
                    world.expenses[resource->payer] +=
                        resource->unit_cost * static_cast<double>(req.quantity);
                }
            }
            for (const auto &rule : action.effects) {
                if (const auto *rd = std::get_if<ResourceDelta>(&rule)) {
                    if (auto it = world.remaining.find(rd->resource); it != world.remaining.end()) {
                        it->second = std::max<std::int64_t>(0, it->second + rd->amount);
                    }
                } else if (const auto *ed = std::get_if<ExpenseDelta>(&rule)) {
                    world.expenses[ed->payer] += ed->amount;
                }
            }
            agent.choice = update_choice_factors(agent.choice, event, action.effects);
        }
    }

    event.after = agent.state;
    event.choice_after = agent.choice;
    return event;
}

RunReport run(const ScenarioSpec &scenario, std::uint64_t seed, const RunOptions &options) {
    return run(scenario, sample_population(scenario.population, seed), seed, options);
}

RunReport run(const ScenarioSpec &scenario, std::vector<AgentProfile> agents, std::uint64_t seed,
              const RunOptions &options) {
    if (auto v = validate(scenario); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    const auto &sim = scenario.simulation;

    RunReport report;
    report.scenario = scenario.name;
    report.seed = seed;
    report.horizon = sim.horizon;
    report.aggregation = sim.aggregation;
    report.schedule = sim.schedule;
    report.norm_overrides = options.norm_overrides;
    for (const auto &action : scenario.actions) {
        report.actions.push_back(action.name);
    }
    std::stable_sort(agents.begin(), agents.end(),
                     [](const AgentProfile &a, const AgentProfile &b) { return a.id < b.id; });
    report.initial_agents = agents;

    WorldState world = WorldState::initial(scenario);
    Rng dynamics_rng(dynamics_stream(seed));
    Rng schedule_rng(schedule_stream(seed));
    DecisionCache cache;
    DecisionCache *cache_ptr = options.use_cache ? &cache : nullptr;

    std::vector<std::size_t> order(agents.size());
    for (std::int64_t t = 0; t < sim.horizon; ++t) {
        world.tick = t;
        world.reset_counters(scenario);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (sim.schedule == Schedule::Shuffled) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[uniform_index(schedule_rng, i)]);
            }
        }
        for (const auto i : order) {
            report.events.push_back(
                step_agent(agents[i], world, scenario, sim.aggregation, dynamics_rng, cache_ptr));
        }
    }
    world.tick = sim.horizon;
    report.final_agents = std::move(agents);
    report.final_world = std::move(world);
    return report;
}

} // namespace capsim
