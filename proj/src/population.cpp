#include "capsim/population.h"

#include "capsim/errors.h"
#include "capsim/random.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace capsim {
namespace {

constexpr double kWeightSumTolerance = 1e-9;

template <typename Range>
void check_mix(const Range &weights, const std::string &what, std::vector<std::string> &out) {
    double total = 0.0;
    for (const double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            out.push_back(what + " has a negative or non-finite weight");
            return;
        }
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
        out.push_back(what + " weights sum to " + std::to_string(total) + ", expected 1");
    }
}

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

double jittered(double base, double noise, Rng &rng) {
    const double u = uniform01(rng);
    return std::clamp(base + (2.0 * u - 1.0) * noise, 0.0, 1.0);
}

} // namespace

std::vector<PriorityTier> default_homelessness_tiers() {
    using C = CentralCapability;
    return {
        {"primary", {C::BodilyIntegrity, C::BodilyHealth, C::Affiliation, C::ControlOverEnvironment},
         0.9},
        {"secondary", {C::Life, C::SensesImaginationThought, C::Play}, 0.5},
    };
}

double tier_weight(const PopulationSpec &spec, CentralCapability capability) {
    double best = 0.0;
    for (const auto &tier : spec.priority_tiers) {
        if (tier.capabilities.contains(capability)) {
            best = std::max(best, tier.weight);
        }
    }
    return best;
}

std::vector<std::string> violations(const PopulationSpec &spec) {
    std::vector<std::string> out;
    if (spec.n < 1) {
        out.emplace_back("population n must be >= 1");
    }
    check_mix(spec.registration_mix, "registration_mix", out);
    check_mix(spec.health_mix, "health_mix", out);
    check_mix(spec.housing_mix, "housing_mix", out);

    for (const auto &[name, marginal] : spec.marginals) {
        if (const auto *cat = std::get_if<CategoricalMarginal>(&marginal)) {
            if (cat->weights.empty()) {
                out.push_back("marginal '" + name + "' has no categories");
                continue;
            }
            std::set<std::string> seen;
            std::vector<double> weights;
            for (const auto &[value, w] : cat->weights) {
                if (!seen.insert(value).second) {
                    out.push_back("marginal '" + name + "' repeats category '" + value + "'");
                }
                weights.push_back(w);
            }
            check_mix(weights, "marginal '" + name + "'", out);
        } else {
            const auto &range = std::get<UniformIntMarginal>(marginal);
            if (range.lo > range.hi) {
                out.push_back("marginal '" + name + "' has lo > hi");
            }
        }
    }

    std::set<std::string> tier_names;
    for (const auto &tier : spec.priority_tiers) {
        if (!tier_names.insert(tier.name).second) {
            out.push_back("duplicate priority tier '" + tier.name + "'");
        }
        if (!in_unit(tier.weight)) {
            out.push_back("priority tier '" + tier.name + "' weight must be in [0,1]");
        }
    }

    if (!std::isfinite(spec.noise) || spec.noise < 0.0 || spec.noise > 0.5) {
        out.emplace_back("noise must be in [0, 0.5]");
    }

    std::set<NeedDimension> needs;
    for (const auto &need : spec.needs) {
        if (need.name.empty()) {
            out.emplace_back("need with an empty name");
        } else if (try_value_dimension(need.name)) {
            out.push_back("need '" + need.name + "' shadows a value dimension");
        }
        if (!needs.insert(need).second) {
            out.push_back("duplicate need '" + need.name + "'");
        }
    }
    for (const auto &[need, capability] : spec.need_links) {
        if (!needs.contains(need)) {
            out.push_back("dimension link names undeclared need '" + need.name + "'");
        }
    }

    for (const auto &factor : spec.personal_factors) {
        if (!in_unit(factor.prevalence)) {
            out.emplace_back("personal factor prevalence must be in [0,1]");
        }
        if (!in_unit(factor.term.factor)) {
            out.emplace_back("personal factor must be in [0,1]");
        }
        for (auto &v : violations(factor.term.when)) {
            out.push_back("personal factor: " + v);
        }
    }
    return out;
}

std::vector<AgentProfile> sample_population(const PopulationSpec &spec, std::uint64_t seed) {
    if (auto v = violations(spec); !v.empty()) {
        throw ValidationError(std::move(v));
    }

    std::vector<double> value_bases;
    for (const auto v : kValueDimensions) {
        const auto link = spec.value_links.find(v);
        value_bases.push_back(link == spec.value_links.end() ? 0.0 : tier_weight(spec, link->second));
    }
    std::vector<double> need_bases;
    for (const auto &need : spec.needs) {
        const auto link = spec.need_links.find(need);
        need_bases.push_back(link == spec.need_links.end() ? 0.0 : tier_weight(spec, link->second));
    }

    Rng rng(population_stream(seed));
    std::vector<AgentProfile> agents;
    agents.reserve(static_cast<std::size_t>(spec.n));
    for (std::int64_t i = 0; i < spec.n; ++i) {
        AgentProfile agent;
        agent.id = static_cast<AgentId>(i);
        agent.state.registration = kRegistrationStates[categorical(rng, spec.registration_mix)];
        agent.state.health = static_cast<int>(categorical(rng, spec.health_mix));
        agent.state.housing = kHousingCategories[categorical(rng, spec.housing_mix)];

        for (const auto &[name, marginal] : spec.marginals) {
            if (const auto *cat = std::get_if<CategoricalMarginal>(&marginal)) {
                std::vector<double> weights;
                weights.reserve(cat->weights.size());
                for (const auto &entry : cat->weights) {
                    weights.push_back(entry.second);
                }
                agent.state.attributes[name] = cat->weights[categorical(rng, weights)].first;
            } else {
                const auto &range = std::get<UniformIntMarginal>(marginal);
                const auto span = static_cast<std::uint64_t>(range.hi - range.lo) + 1;
                agent.state.attributes[name] =
                    static_cast<double>(range.lo + static_cast<std::int64_t>(uniform_index(rng, span)));
            }
        }

        for (const auto &factor : spec.personal_factors) {
            if (uniform01(rng) < factor.prevalence) {
                agent.personal_factors.push_back(factor.term);
            }
        }

        for (std::size_t k = 0; k < kValueDimensions.size(); ++k) {
            agent.choice.set_value_pref(kValueDimensions[k], jittered(value_bases[k], spec.noise, rng));
        }
        for (std::size_t k = 0; k < spec.needs.size(); ++k) {
            agent.choice.set_urgency(spec.needs[k], jittered(need_bases[k], spec.noise, rng));
        }
        agents.push_back(std::move(agent));
    }
    return agents;
}

} // namespace capsim
