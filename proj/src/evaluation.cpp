#include "capsim/evaluation.h"

#include "capsim/errors.h"

#include <algorithm>

namespace capsim {
namespace {

double share(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

StateDistributions distributions(const std::vector<const PersonalState *> &states) {
    StateDistributions out;
    for (int h = kMinHealth; h <= kMaxHealth; ++h) {
        out.health[std::to_string(h)] = 0.0;
    }
    for (const auto h : kHousingCategories) {
        out.housing[std::string(to_string(h))] = 0.0;
    }
    for (const auto r : kRegistrationStates) {
        out.registration[std::string(to_string(r))] = 0.0;
    }
    for (const auto *s : states) {
        out.health[std::to_string(s->health)] += 1.0;
        out.housing[std::string(to_string(s->housing))] += 1.0;
        out.registration[std::string(to_string(s->registration))] += 1.0;
    }
    // Counts first, then one division, so shares are exact count / n.
    for (auto *dist : {&out.health, &out.housing, &out.registration}) {
        for (auto &[key, value] : *dist) {
            value = share(static_cast<std::size_t>(value), states.size());
        }
    }
    return out;
}

/// Capabilities each action enables, indexed by ActionId.
std::vector<const std::set<CentralCapability> *> enables_table(const ScenarioSpec &scenario) {
    std::vector<const std::set<CentralCapability> *> out;
    for (const auto &action : scenario.actions) {
        out.push_back(&action.enables);
    }
    return out;
}

bool any_enables(const std::vector<ActionId> &actions,
                 const std::vector<const std::set<CentralCapability> *> &enables,
                 CentralCapability c) {
    return std::any_of(actions.begin(), actions.end(),
                       [&](ActionId a) { return enables.at(index(a))->contains(c); });
}

Distribution diff(const Distribution &a, const Distribution &b) {
    Distribution out;
    for (const auto &[key, value] : b) {
        out[key] = value;
    }
    for (const auto &[key, value] : a) {
        out[key] -= value;
    }
    return out;
}

Verdict verdict(double deprivation_delta, double functioning_delta) {
    const bool better = deprivation_delta < 0.0 || functioning_delta > 0.0;
    const bool worse = deprivation_delta > 0.0 || functioning_delta < 0.0;
    if (better && worse) {
        return Verdict::Mixed;
    }
    if (better) {
        return Verdict::Improved;
    }
    return worse ? Verdict::Regressed : Verdict::Unchanged;
}

} // namespace

std::string_view to_string(CapabilityStatus status) {
    switch (status) {
    case CapabilityStatus::Enabled:
        return "Enabled";
    case CapabilityStatus::Deprived:
        return "Deprived";
    case CapabilityStatus::NotModelled:
        return "NotModelled";
    }
    return "?";
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Unchanged:
        return "Unchanged";
    case Verdict::Improved:
        return "Improved";
    case Verdict::Regressed:
        return "Regressed";
    case Verdict::Mixed:
        return "Mixed";
    }
    return "?";
}

std::set<CentralCapability> modelled_capabilities(const ScenarioSpec &scenario) {
    std::set<CentralCapability> out;
    for (const auto &action : scenario.actions) {
        out.insert(action.enables.begin(), action.enables.end());
    }
    return out;
}

std::map<CentralCapability, CapabilityStatus>
capability_status(const AgentProfile &agent, const ScenarioSpec &scenario, const WorldState &world) {
    std::map<CentralCapability, CapabilityStatus> out;
    for (const auto c : kCentralCapabilities) {
        out[c] = CapabilityStatus::NotModelled;
    }
    for (const auto &action : scenario.actions) {
        if (action.enables.empty()) {
            continue;
        }
        const double f = feasibility_at(agent.state, agent.personal_factors, action, scenario,
                                        world.environment, &world.remaining);
        for (const auto c : action.enables) {
            auto &status = out[c];
            if (f > 0.0) {
                status = CapabilityStatus::Enabled;
            } else if (status == CapabilityStatus::NotModelled) {
                status = CapabilityStatus::Deprived;
            }
        }
    }
    return out;
}

EquityMetrics compute_metrics(const RunReport &report, const ScenarioSpec &scenario) {
    EquityMetrics m;
    m.scenario = report.scenario;
    m.seed = report.seed;
    m.agents = report.final_agents.size();
    m.horizon = report.horizon;
    m.actions = report.actions;
    m.expenses = report.final_world.expenses;

    const auto modelled = modelled_capabilities(scenario);
    for (const auto c : kCentralCapabilities) {
        if (!modelled.contains(c)) {
            m.not_modelled.insert(c);
        }
    }
    const auto enables = enables_table(scenario);

    // Final-tick deprivation, resources at full capacity.
    WorldState full = WorldState::initial(scenario);
    full.environment = report.final_world.environment;
    std::map<AgentId, std::map<CentralCapability, CapabilityStatus>> final_status;
    for (const auto &agent : report.final_agents) {
        final_status[agent.id] = capability_status(agent, scenario, full);
    }

    std::map<AgentId, std::set<CentralCapability>> realised;
    for (const auto &event : report.events) {
        if (event.realised && event.action != kNoOp) {
            const auto &caps = *enables.at(index(event.action));
            realised[event.agent].insert(caps.begin(), caps.end());
        }
    }

    for (const auto c : modelled) {
        CapabilityMetrics cm;
        for (const auto &agent : report.final_agents) {
            if (final_status[agent.id][c] == CapabilityStatus::Deprived) {
                ++cm.deprived_agents;
            }
            if (auto it = realised.find(agent.id); it != realised.end() && it->second.contains(c)) {
                ++cm.functioning_agents;
            }
        }
        cm.deprivation_ratio = share(cm.deprived_agents, m.agents);
        cm.functioning_rate = share(cm.functioning_agents, m.agents);
        m.capabilities[c] = cm;
    }

    std::vector<const PersonalState *> final_states;
    for (const auto &agent : report.final_agents) {
        final_states.push_back(&agent.state);
    }
    m.final_distributions = distributions(final_states);

    // Per-group breakdowns at the final tick.
    auto breakdown = [&](auto group_of) {
        std::map<std::string, std::map<CentralCapability, double>> out;
        std::map<std::string, std::size_t> sizes;
        std::map<std::string, std::map<CentralCapability, std::size_t>> deprived;
        for (const auto &agent : report.final_agents) {
            const std::string group = group_of(agent.state);
            ++sizes[group];
            for (const auto c : modelled) {
                deprived[group][c] += final_status[agent.id][c] == CapabilityStatus::Deprived;
            }
        }
        for (const auto &[group, size] : sizes) {
            for (const auto c : modelled) {
                out[group][c] = share(deprived[group][c], size);
            }
        }
        return out;
    };
    m.deprivation_by_registration =
        breakdown([](const PersonalState &s) { return std::string(to_string(s.registration)); });
    m.deprivation_by_housing =
        breakdown([](const PersonalState &s) { return std::string(to_string(s.housing)); });

    for (const auto &norm : scenario.norms) {
        NormLedgerEntry entry{norm.id, norm.kind, norm.enabled, norm.promotes, norm.demotes, 0};
        if (norm.enabled) {
            for (const auto &event : report.events) {
                if (!norm.when.holds(event.before, report.final_world.environment)) {
                    continue;
                }
                for (const auto &name : report.actions) {
                    entry.activations += glob_match(norm.applies_to, name) ? 1 : 0;
                }
            }
        }
        m.norms.push_back(std::move(entry));
    }

    // Ticks before the end use the possible sets recorded at choice time.
    std::map<std::int64_t, std::vector<const TrajectoryEvent *>> by_tick;
    for (const auto &event : report.events) {
        by_tick[event.tick].push_back(&event);
    }
    for (std::int64_t t = 0; t < report.horizon; ++t) {
        TickSnapshot snap;
        snap.tick = t;
        const auto &events = by_tick[t];
        std::vector<const PersonalState *> states;
        for (const auto *e : events) {
            states.push_back(&e->before);
        }
        for (const auto c : modelled) {
            std::size_t deprived = 0;
            for (const auto *e : events) {
                deprived += any_enables(e->possible, enables, c) ? 0 : 1;
            }
            snap.deprivation[c] = share(deprived, events.size());
        }
        snap.distributions = distributions(states);
        m.series.push_back(std::move(snap));
    }
    TickSnapshot last;
    last.tick = report.horizon;
    for (const auto &[c, cm] : m.capabilities) {
        last.deprivation[c] = cm.deprivation_ratio;
    }
    last.distributions = m.final_distributions;
    m.series.push_back(std::move(last));
    return m;
}

DeltaReport compare(const EquityMetrics &a, const EquityMetrics &b) {
    if (a.actions != b.actions) {
        throw MetricMismatch("metrics come from different action catalogs");
    }
    std::set<CentralCapability> caps_a;
    std::set<CentralCapability> caps_b;
    for (const auto &[c, cm] : a.capabilities) {
        caps_a.insert(c);
    }
    for (const auto &[c, cm] : b.capabilities) {
        caps_b.insert(c);
    }
    if (caps_a != caps_b) {
        throw MetricMismatch("metrics cover different capability sets");
    }

    DeltaReport delta;
    for (const auto &[c, ma] : a.capabilities) {
        const auto &mb = b.capabilities.at(c);
        CapabilityDelta d;
        d.deprivation_ratio = mb.deprivation_ratio - ma.deprivation_ratio;
        d.functioning_rate = mb.functioning_rate - ma.functioning_rate;
        d.verdict = verdict(d.deprivation_ratio, d.functioning_rate);
        delta.capabilities[c] = d;
    }
    delta.final_distributions.health = diff(a.final_distributions.health, b.final_distributions.health);
    delta.final_distributions.housing =
        diff(a.final_distributions.housing, b.final_distributions.housing);
    delta.final_distributions.registration =
        diff(a.final_distributions.registration, b.final_distributions.registration);
    for (const auto &[payer, amount] : b.expenses) {
        delta.expenses[payer] = amount;
    }
    for (const auto &[payer, amount] : a.expenses) {
        delta.expenses[payer] -= amount;
    }
    return delta;
}

} // namespace capsim
