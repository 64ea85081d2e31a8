#pragma once

// Declarative world definition: resources, norms, actions and the effect rules
// realised actions apply. Immutable once loaded and validated.

#include "capsim/agent.h"
#include "capsim/aggregation.h"
#include "capsim/condition.h"
#include "capsim/domain.h"
#include "capsim/population.h"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace capsim {

inline constexpr int kFormatVersion = 1;

struct Resource {
    std::string name;
    std::optional<std::int64_t> capacity; // nullopt = unlimited
    double unit_cost = 0.0;
    Payer payer = Payer::Healthcare;

    bool operator==(const Resource &) const = default;
};

enum class NormKind : std::uint8_t { Legal, Social };

std::string_view to_string(NormKind kind);

struct Forbid {
    bool operator==(const Forbid &) const = default;
};
struct Allow {
    bool operator==(const Allow &) const = default;
};
struct Scale {
    double factor = 1.0;
    bool operator==(const Scale &) const = default;
};

using NormEffect = std::variant<Forbid, Allow, Scale>;

struct NormRule {
    std::string id;
    NormKind kind = NormKind::Legal;
    std::string applies_to; // glob over action names
    Condition when;
    NormEffect effect = Forbid{};
    std::set<ValueDimension> promotes;
    std::set<ValueDimension> demotes;
    bool enabled = true;

    bool operator==(const NormRule &) const = default;
};

// Effect rules. Each clamps to its target's domain when applied.
struct HealthDelta {
    int amount = 0;
    bool operator==(const HealthDelta &) const = default;
};
struct HousingSet {
    Housing value = Housing::Housed;
    bool operator==(const HousingSet &) const = default;
};
struct RegistrationSet {
    Registration value = Registration::Registered;
    bool operator==(const RegistrationSet &) const = default;
};
struct AttributeDelta {
    std::string attribute;
    double amount = 0.0;
    bool operator==(const AttributeDelta &) const = default;
};
/// Adjusts this tick's remaining capacity of a bounded resource.
struct ResourceDelta {
    std::string resource;
    std::int64_t amount = 0;
    bool operator==(const ResourceDelta &) const = default;
};
struct ExpenseDelta {
    Payer payer = Payer::Healthcare;
    double amount = 0.0;
    bool operator==(const ExpenseDelta &) const = default;
};
struct UrgencyDelta {
    NeedDimension need;
    double amount = 0.0;
    bool operator==(const UrgencyDelta &) const = default;
};
struct ValuePrefDelta {
    ValueDimension value = ValueDimension::Security;
    double amount = 0.0;
    bool operator==(const ValuePrefDelta &) const = default;
};

using EffectRule = std::variant<HealthDelta, HousingSet, RegistrationSet, AttributeDelta,
                                ResourceDelta, ExpenseDelta, UrgencyDelta, ValuePrefDelta>;

struct ResourceRequirement {
    std::string resource;
    std::int64_t quantity = 1;
    bool operator==(const ResourceRequirement &) const = default;
};

struct ActionSpec {
    std::string name;
    std::optional<ResourceRequirement> requires_resource;
    std::vector<ConversionTerm> conversion_terms;
    std::set<CentralCapability> enables;
    std::map<NeedDimension, double> relieves;
    std::map<ValueDimension, double> importance;
    std::vector<EffectRule> effects;
    double base_short_reward = 0.0;
    double base_long_reward = 0.0;

    bool operator==(const ActionSpec &) const = default;
};

enum class Schedule : std::uint8_t { Ascending, Shuffled };

struct SimulationConfig {
    std::int64_t horizon = 1;
    double gamma_short = 0.5;
    double gamma_long = 0.9;
    double tolerance = 1e-8;
    std::size_t max_iter = 10'000;
    std::size_t state_cap = 100'000;
    AggregationMode aggregation = Lexicographic{};
    Schedule schedule = Schedule::Ascending;
    /// States where the decision episode has ended: every action is a
    /// self-loop with zero reward. Feasibility is unaffected.
    std::optional<Condition> terminal_when;

    bool operator==(const SimulationConfig &) const = default;
};

struct ScenarioSpec {
    std::string name;
    int format_version = kFormatVersion;
    std::vector<Resource> resources;
    std::vector<NormRule> norms;
    Environment environment;
    std::vector<ActionSpec> actions;
    PopulationSpec population;
    SimulationConfig simulation;

    const Resource *find_resource(std::string_view name) const;
    const ActionSpec *find_action(std::string_view name) const;
    const NormRule *find_norm(std::string_view id) const;

    bool operator==(const ScenarioSpec &) const = default;
};

/// Empty iff every invariant holds.
std::vector<std::string> validate(const ScenarioSpec &spec);

/// Remaining capacity this tick for bounded resources. Resources missing from
/// the map are treated as available.
using ResourceCounters = std::map<std::string, std::int64_t>;

/// Norm id -> enabled.
using NormOverrides = std::map<std::string, bool>;

/// Copy of `spec` with norms switched on/off. Throws ValidationError on an
/// unknown norm id.
ScenarioSpec apply_norm_overrides(const ScenarioSpec &spec, const NormOverrides &overrides);

/// Combined effect of the enabled norms matching (action, state):
/// Forbid dominates, Scale factors multiply, Allow is neutral.
double norm_factor(const ScenarioSpec &spec, const ActionSpec &action, const PersonalState &state,
                   const Environment &env);

/// Probability that `action` can be performed from `state`: product of the
/// matching conversion terms (action terms and the agent's own), times the norm
/// factor, times 0 if a required bounded resource has less than the required
/// quantity left.
double feasibility_at(const PersonalState &state, std::span<const ConversionTerm> personal_factors,
                      const ActionSpec &action, const ScenarioSpec &spec, const Environment &env,
                      const ResourceCounters *counters = nullptr);

/// Feasibility at the agent's current state in the scenario's environment,
/// resources fully available.
double feasibility(const AgentProfile &agent, const ActionSpec &action, const ScenarioSpec &spec);

double feasibility(const AgentProfile &agent, const ActionSpec &action, const ScenarioSpec &spec,
                   const ResourceCounters &counters);

/// Applies the rules that touch PersonalState (health, housing, registration,
/// attributes); the rest are ignored here.
PersonalState apply_state_effects(const PersonalState &state, std::span<const EffectRule> effects,
                                  const ScenarioSpec &spec);

/// Short-term reward: base + sum over needs of urgency * relief.
double short_reward(const ActionSpec &action, const ChoiceFactors &choice);
/// Long-term reward: base + sum over values of preference * satisfaction.
double long_reward(const ActionSpec &action, const ChoiceFactors &choice);

} // namespace capsim
