#include "capsim/scenario.h"

#include "capsim/errors.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace capsim {
namespace {

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void prefixed(std::vector<std::string> &out, const std::string &prefix,
              std::vector<std::string> items) {
    for (auto &item : items) {
        out.push_back(prefix + item);
    }
}

struct EffectChecker {
    const ScenarioSpec &spec;
    const std::set<NeedDimension> &needs;
    std::string where;
    std::vector<std::string> &out;

    void operator()(const HealthDelta &) const {}
    void operator()(const HousingSet &) const {}
    void operator()(const RegistrationSet &) const {}
    void operator()(const AttributeDelta &e) const {
        const auto it = spec.population.marginals.find(e.attribute);
        if (it == spec.population.marginals.end() ||
            !std::holds_alternative<UniformIntMarginal>(it->second)) {
            out.push_back(where + "attribute_delta targets '" + e.attribute +
                          "', which is not a declared uniform_int attribute");
        }
        if (!std::isfinite(e.amount)) {
            out.push_back(where + "attribute_delta amount is not finite");
        }
    }
    void operator()(const ResourceDelta &e) const {
        const auto *resource = spec.find_resource(e.resource);
        if (resource == nullptr) {
            out.push_back(where + "resource_delta names undeclared resource '" + e.resource + "'");
        } else if (!resource->capacity) {
            out.push_back(where + "resource_delta on unlimited resource '" + e.resource + "'");
        }
    }
    void operator()(const ExpenseDelta &e) const {
        if (!std::isfinite(e.amount) || e.amount < 0.0) {
            out.push_back(where + "expense_delta amount must be >= 0");
        }
    }
    void operator()(const UrgencyDelta &e) const {
        if (!needs.contains(e.need)) {
            out.push_back(where + "urgency_delta names undeclared need '" + e.need.name + "'");
        }
        if (!std::isfinite(e.amount)) {
            out.push_back(where + "urgency_delta amount is not finite");
        }
    }
    void operator()(const ValuePrefDelta &e) const {
        if (!std::isfinite(e.amount)) {
            out.push_back(where + "value_pref_delta amount is not finite");
        }
    }
};

bool norm_matches(const NormRule &norm, const ActionSpec &action, const PersonalState &state,
                  const Environment &env) {
    return norm.enabled && glob_match(norm.applies_to, action.name) && norm.when.holds(state, env);
}

} // namespace

std::string_view to_string(NormKind kind) { return kind == NormKind::Legal ? "Legal" : "Social"; }

const Resource *ScenarioSpec::find_resource(std::string_view name) const {
    const auto it = std::find_if(resources.begin(), resources.end(),
                                 [&](const Resource &r) { return r.name == name; });
    return it == resources.end() ? nullptr : &*it;
}

const ActionSpec *ScenarioSpec::find_action(std::string_view name) const {
    const auto it = std::find_if(actions.begin(), actions.end(),
                                 [&](const ActionSpec &a) { return a.name == name; });
    return it == actions.end() ? nullptr : &*it;
}

const NormRule *ScenarioSpec::find_norm(std::string_view id) const {
    const auto it =
        std::find_if(norms.begin(), norms.end(), [&](const NormRule &n) { return n.id == id; });
    return it == norms.end() ? nullptr : &*it;
}

std::vector<std::string> validate(const ScenarioSpec &spec) {
    std::vector<std::string> out;
    if (spec.format_version != kFormatVersion) {
        out.push_back("unsupported format_version " + std::to_string(spec.format_version));
    }
    if (spec.actions.empty()) {
        out.emplace_back("no actions");
    }

    std::set<std::string> resource_names;
    for (const auto &resource : spec.resources) {
        if (resource.name.empty()) {
            out.emplace_back("resource with an empty name");
        }
        if (!resource_names.insert(resource.name).second) {
            out.push_back("duplicate resource '" + resource.name + "'");
        }
        if (resource.capacity && *resource.capacity < 0) {
            out.push_back("resource '" + resource.name + "' has negative capacity");
        }
        if (!std::isfinite(resource.unit_cost) || resource.unit_cost < 0.0) {
            out.push_back("resource '" + resource.name + "' unit_cost must be >= 0");
        }
    }

    std::set<NeedDimension> needs(spec.population.needs.begin(), spec.population.needs.end());

    std::set<std::string> action_names;
    for (std::size_t i = 0; i < spec.actions.size(); ++i) {
        const auto &action = spec.actions[i];
        const std::string where = "action '" + action.name + "': ";
        if (action.name.empty()) {
            out.push_back("action " + std::to_string(i) + " has an empty name");
        }
        if (!action_names.insert(action.name).second) {
            out.push_back("duplicate action name '" + action.name + "'");
        }
        if (action.requires_resource) {
            if (spec.find_resource(action.requires_resource->resource) == nullptr) {
                out.push_back(where + "requires undeclared resource '" +
                              action.requires_resource->resource + "'");
            }
            if (action.requires_resource->quantity < 1) {
                out.push_back(where + "resource quantity must be >= 1");
            }
        }
        for (const auto &term : action.conversion_terms) {
            if (!in_unit(term.factor)) {
                out.push_back(where + "conversion factor " + std::to_string(term.factor) +
                              " out of range [0,1]");
            }
            prefixed(out, where, violations(term.when));
        }
        for (const auto &[need, relief] : action.relieves) {
            if (!needs.contains(need)) {
                out.push_back(where + "relieves undeclared need '" + need.name + "'");
            }
            if (!in_unit(relief)) {
                out.push_back(where + "relief for '" + need.name + "' out of range [0,1]");
            }
        }
        for (const auto &[value, satisfaction] : action.importance) {
            if (!in_unit(satisfaction)) {
                out.push_back(where + "importance for '" + std::string(to_string(value)) +
                              "' out of range [0,1]");
            }
        }
        if (!std::isfinite(action.base_short_reward) || !std::isfinite(action.base_long_reward)) {
            out.push_back(where + "base rewards must be finite");
        }
        for (const auto &effect : action.effects) {
            std::visit(EffectChecker{spec, needs, where, out}, effect);
        }
    }

    std::set<std::string> norm_ids;
    for (const auto &norm : spec.norms) {
        const std::string where = "norm '" + norm.id + "': ";
        if (norm.id.empty()) {
            out.emplace_back("norm with an empty id");
        }
        if (!norm_ids.insert(norm.id).second) {
            out.push_back("duplicate norm id '" + norm.id + "'");
        }
        if (const auto *scale = std::get_if<Scale>(&norm.effect); scale && !in_unit(scale->factor)) {
            out.push_back(where + "scale factor " + std::to_string(scale->factor) +
                          " out of range [0,1]");
        }
        for (const auto v : norm.promotes) {
            if (norm.demotes.contains(v)) {
                out.push_back(where + "both promotes and demotes " + std::string(to_string(v)));
            }
        }
        const bool matches_any = std::any_of(spec.actions.begin(), spec.actions.end(),
                                             [&](const ActionSpec &a) {
                                                 return glob_match(norm.applies_to, a.name);
                                             });
        if (!matches_any) {
            out.push_back(where + "applies_to '" + norm.applies_to + "' matches no action");
        }
        prefixed(out, where, violations(norm.when));
    }

    prefixed(out, "population: ", violations(spec.population));

    const auto &sim = spec.simulation;
    if (sim.horizon < 0) {
        out.emplace_back("simulation: horizon must be >= 0");
    }
    if (!in_unit(sim.gamma_short) || !in_unit(sim.gamma_long)) {
        out.emplace_back("simulation: discount factors must be in [0,1]");
    }
    if (!(sim.tolerance > 0.0) || !std::isfinite(sim.tolerance)) {
        out.emplace_back("simulation: tolerance must be > 0");
    }
    if (sim.max_iter < 1) {
        out.emplace_back("simulation: max_iter must be >= 1");
    }
    if (sim.state_cap < 1) {
        out.emplace_back("simulation: state_cap must be >= 1");
    }
    prefixed(out, "simulation: ", violations(sim.aggregation));
    if (sim.terminal_when) {
        prefixed(out, "simulation: terminal_when: ", violations(*sim.terminal_when));
    }
    return out;
}

ScenarioSpec apply_norm_overrides(const ScenarioSpec &spec, const NormOverrides &overrides) {
    ScenarioSpec copy = spec;
    std::vector<std::string> unknown;
    for (const auto &[id, enabled] : overrides) {
        auto it = std::find_if(copy.norms.begin(), copy.norms.end(),
                               [&](const NormRule &n) { return n.id == id; });
        if (it == copy.norms.end()) {
            unknown.push_back("norm override names unknown norm '" + id + "'");
            continue;
        }
        it->enabled = enabled;
    }
    if (!unknown.empty()) {
        throw ValidationError(std::move(unknown));
    }
    return copy;
}

double norm_factor(const ScenarioSpec &spec, const ActionSpec &action, const PersonalState &state,
                   const Environment &env) {
    double scale = 1.0;
    for (const auto &norm : spec.norms) {
        if (!norm_matches(norm, action, state, env)) {
            continue;
        }
        if (std::holds_alternative<Forbid>(norm.effect)) {
            return 0.0;
        }
        if (const auto *s = std::get_if<Scale>(&norm.effect)) {
            scale *= s->factor;
        }
    }
    return scale;
}

double feasibility_at(const PersonalState &state, std::span<const ConversionTerm> personal_factors,
                      const ActionSpec &action, const ScenarioSpec &spec, const Environment &env,
                      const ResourceCounters *counters) {
    if (counters != nullptr && action.requires_resource) {
        const auto it = counters->find(action.requires_resource->resource);
        if (it != counters->end() && it->second < action.requires_resource->quantity) {
            return 0.0;
        }
    }
    const double norms = norm_factor(spec, action, state, env);
    if (norms == 0.0) {
        return 0.0;
    }
    double p = 1.0;
    for (const auto &term : action.conversion_terms) {
        if (term.when.holds(state, env)) {
            p *= term.factor;
        }
    }
    for (const auto &term : personal_factors) {
        if (glob_match(term.applies_to, action.name) && term.when.holds(state, env)) {
            p *= term.factor;
        }
    }
    return std::clamp(p * norms, 0.0, 1.0);
}

double feasibility(const AgentProfile &agent, const ActionSpec &action, const ScenarioSpec &spec) {
    return feasibility_at(agent.state, agent.personal_factors, action, spec, spec.environment);
}

double feasibility(const AgentProfile &agent, const ActionSpec &action, const ScenarioSpec &spec,
                   const ResourceCounters &counters) {
    return feasibility_at(agent.state, agent.personal_factors, action, spec, spec.environment,
                          &counters);
}

PersonalState apply_state_effects(const PersonalState &state, std::span<const EffectRule> effects,
                                  const ScenarioSpec &spec) {
    PersonalState next = state;
    for (const auto &effect : effects) {
        if (const auto *h = std::get_if<HealthDelta>(&effect)) {
            next.health = std::clamp(next.health + h->amount, kMinHealth, kMaxHealth);
        } else if (const auto *hs = std::get_if<HousingSet>(&effect)) {
            next.housing = hs->value;
        } else if (const auto *rs = std::get_if<RegistrationSet>(&effect)) {
            next.registration = rs->value;
        } else if (const auto *ad = std::get_if<AttributeDelta>(&effect)) {
            auto &slot = next.attributes[ad->attribute];
            if (std::holds_alternative<std::string>(slot)) {
                continue;
            }
            double value = std::get<double>(slot) + ad->amount;
            const auto marginal = spec.population.marginals.find(ad->attribute);
            if (marginal != spec.population.marginals.end()) {
                if (const auto *range = std::get_if<UniformIntMarginal>(&marginal->second)) {
                    value = std::clamp(value, static_cast<double>(range->lo),
                                       static_cast<double>(range->hi));
                }
            }
            slot = value;
        }
    }
    return next;
}

double short_reward(const ActionSpec &action, const ChoiceFactors &choice) {
    double r = action.base_short_reward;
    for (const auto &[need, relief] : action.relieves) {
        r += choice.urgency(need) * relief;
    }
    return r;
}

double long_reward(const ActionSpec &action, const ChoiceFactors &choice) {
    double r = action.base_long_reward;
    for (const auto &[value, satisfaction] : action.importance) {
        r += choice.value_pref(value) * satisfaction;
    }
    return r;
}

} // namespace capsim
