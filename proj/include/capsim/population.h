#pragma once

// Synthetic population sampling.
//
// Draw order per agent (ids ascending from 0), all from one std::mt19937_64
// seeded with the run seed, one engine draw per item:
//   1. registration   (categorical over registration_mix)
//   2. health         (categorical over health_mix, levels 0..4)
//   3. housing        (categorical over housing_mix)
//   4. marginals      (attribute-name order; categorical or uniform integer)
//   5. personal factors in declaration order (Bernoulli on prevalence)
//   6. value preferences in ValueDimension order
//   7. need urgencies in declaration order
// Choice-factor entries are tier weight + (2u - 1) * noise, clamped to [0,1].

#include "capsim/agent.h"
#include "capsim/domain.h"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace capsim {

struct CategoricalMarginal {
    std::vector<std::pair<std::string, double>> weights;
    bool operator==(const CategoricalMarginal &) const = default;
};

/// Integer uniform on [lo, hi]. Also the clamp domain for AttributeDelta.
struct UniformIntMarginal {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool operator==(const UniformIntMarginal &) const = default;
};

using Marginal = std::variant<CategoricalMarginal, UniformIntMarginal>;

struct PriorityTier {
    std::string name;
    std::set<CentralCapability> capabilities;
    double weight = 0.0;
    bool operator==(const PriorityTier &) const = default;
};

/// A conversion term carried by a share of the population.
struct PersonalFactorSpec {
    ConversionTerm term;
    double prevalence = 1.0;
    bool operator==(const PersonalFactorSpec &) const = default;
};

struct PopulationSpec {
    std::int64_t n = 1;
    std::vector<NeedDimension> needs = baseline_needs();
    std::map<std::string, Marginal> marginals;
    std::array<double, 3> registration_mix{1.0, 0.0, 0.0}; // kRegistrationStates order
    std::array<double, 5> health_mix{0.0, 0.0, 0.0, 0.0, 1.0};
    std::array<double, 5> housing_mix{0.0, 0.0, 0.0, 0.0, 1.0}; // kHousingCategories order
    std::vector<PriorityTier> priority_tiers;
    /// A value or need takes the weight of the tier holding its linked capability.
    std::map<ValueDimension, CentralCapability> value_links;
    std::map<NeedDimension, CentralCapability> need_links;
    double noise = 0.0;
    std::vector<PersonalFactorSpec> personal_factors;

    bool operator==(const PopulationSpec &) const = default;
};

/// Default homelessness priority tiers: primary 0.9, secondary 0.5.
std::vector<PriorityTier> default_homelessness_tiers();

/// Highest weight among tiers holding `capability`, 0 when none does.
double tier_weight(const PopulationSpec &spec, CentralCapability capability);

std::vector<std::string> violations(const PopulationSpec &spec);

/// Throws ValidationError if the spec is invalid. Same (spec, seed) gives the
/// same population bit for bit.
std::vector<AgentProfile> sample_population(const PopulationSpec &spec, std::uint64_t seed);

} // namespace capsim
