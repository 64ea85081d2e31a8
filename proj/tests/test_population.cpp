#include "capsim/errors.h"
#include "capsim/population.h"

#include "support/fixtures.h"

#include "doctest.h"

#include <cmath>
#include <map>

using namespace capsim;
using namespace capsim::testing;

namespace {

PopulationSpec point_mass() {
    PopulationSpec spec;
    spec.n = 1;
    spec.registration_mix = {0.0, 1.0, 0.0};
    spec.health_mix = {0.0, 0.0, 1.0, 0.0, 0.0};
    spec.housing_mix = {0.0, 0.0, 0.0, 1.0, 0.0};
    spec.marginals["gender"] = CategoricalMarginal{{{"woman", 1.0}}};
    spec.marginals["age"] = UniformIntMarginal{40, 40};
    spec.priority_tiers = default_homelessness_tiers();
    spec.value_links[ValueDimension::Security] = CentralCapability::BodilyIntegrity;
    spec.value_links[ValueDimension::Hedonism] = CentralCapability::Play;
    spec.need_links[NeedDimension{"PainRelief"}] = CentralCapability::BodilyHealth;
    spec.noise = 0.0;
    return spec;
}

} // namespace

TEST_CASE("default tiers") {
    PopulationSpec spec;
    spec.priority_tiers = default_homelessness_tiers();
    using C = CentralCapability;
    for (const auto c : {C::BodilyIntegrity, C::BodilyHealth, C::Affiliation, C::ControlOverEnvironment}) {
        CHECK(tier_weight(spec, c) == 0.9);
    }
    for (const auto c : {C::Life, C::SensesImaginationThought, C::Play}) {
        CHECK(tier_weight(spec, c) == 0.5);
    }
    CHECK(tier_weight(spec, C::OtherSpecies) == 0.0);
}

TEST_CASE("point mass population") {
    const auto agents = sample_population(point_mass(), 99);
    REQUIRE(agents.size() == 1);
    const auto &a = agents[0];
    CHECK(a.id == 0);
    CHECK(a.state.registration == Registration::InProcess);
    CHECK(a.state.health == 2);
    CHECK(a.state.housing == Housing::Inadequate);
    CHECK(a.state.attributes.at("gender") == AttributeValue{std::string("woman")});
    CHECK(a.state.attributes.at("age") == AttributeValue{40.0});
    CHECK(a.choice.value_pref(ValueDimension::Security) == 0.9);
    CHECK(a.choice.value_pref(ValueDimension::Hedonism) == 0.5);
    CHECK(a.choice.value_pref(ValueDimension::Power) == 0.0);
    CHECK(a.choice.urgency(NeedDimension{"PainRelief"}) == 0.9);
    CHECK(a.choice.urgency(NeedDimension{"Food"}) == 0.0);
    CHECK(a.personal_factors.empty());
}

TEST_CASE("registration share at n = 10,000") {
    auto spec = point_mass();
    spec.n = 10'000;
    spec.registration_mix = {0.6, 0.0, 0.4};
    const auto agents = sample_population(spec, 42);
    std::size_t registered = 0;
    for (const auto &a : agents) {
        registered += a.state.registration == Registration::Registered;
        CHECK(a.state.registration != Registration::InProcess);
    }
    CHECK(std::abs(static_cast<double>(registered) / 10'000.0 - 0.6) <= 0.02);
}

TEST_CASE("categorical marginal frequencies") {
    auto spec = point_mass();
    spec.n = 10'000;
    spec.marginals["gender"] = CategoricalMarginal{{{"man", 0.75}, {"woman", 0.2}, {"nonbinary", 0.05}}};
    spec.housing_mix = {0.3, 0.4, 0.2, 0.1, 0.0};
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto agents = sample_population(spec, seed);
        std::map<std::string, double> gender;
        std::map<Housing, double> housing;
        for (const auto &a : agents) {
            gender[std::get<std::string>(a.state.attributes.at("gender"))] += 1e-4;
            housing[a.state.housing] += 1e-4;
        }
        CHECK(std::abs(gender["man"] - 0.75) <= 0.02);
        CHECK(std::abs(gender["woman"] - 0.2) <= 0.02);
        CHECK(std::abs(gender["nonbinary"] - 0.05) <= 0.02);
        CHECK(std::abs(housing[Housing::Roofless] - 0.3) <= 0.02);
        CHECK(std::abs(housing[Housing::Houseless] - 0.4) <= 0.02);
        CHECK(housing[Housing::Housed] == 0.0);
    }
}

TEST_CASE("uniform integer marginal stays in range and covers it") {
    auto spec = point_mass();
    spec.n = 2000;
    spec.marginals["age"] = UniformIntMarginal{18, 22};
    std::map<double, int> seen;
    for (const auto &a : sample_population(spec, 5)) {
        const double age = std::get<double>(a.state.attributes.at("age"));
        CHECK(age >= 18.0);
        CHECK(age <= 22.0);
        ++seen[age];
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("same spec and seed give the same population") {
    const auto spec = health_inequity().population;
    CHECK(sample_population(spec, 7) == sample_population(spec, 7));
    CHECK(sample_population(spec, 7) != sample_population(spec, 8));
}

TEST_CASE("noise jitter is clamped to [0,1]") {
    auto spec = point_mass();
    spec.n = 500;
    spec.noise = 0.5;
    spec.priority_tiers[0].weight = 1.0;
    for (const auto &a : sample_population(spec, 3)) {
        for (const auto &[v, w] : a.choice.value_prefs()) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
        const double u = a.choice.urgency(NeedDimension{"PainRelief"});
        CHECK(u >= 0.5);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("personal factors follow prevalence") {
    auto spec = point_mass();
    spec.n = 10'000;
    ConversionTerm term;
    term.factor = 0.5;
    spec.personal_factors = {{term, 0.3}, {term, 0.0}, {term, 1.0}};
    std::size_t carried = 0;
    for (const auto &a : sample_population(spec, 11)) {
        CHECK(a.personal_factors.size() >= 1);
        carried += a.personal_factors.size();
    }
    const double extra = static_cast<double>(carried - 10'000) / 10'000.0;
    CHECK(std::abs(extra - 0.3) <= 0.02);
}

TEST_CASE("invalid population specs are rejected") {
    auto spec = point_mass();
    spec.n = 0;
    CHECK_THROWS_AS(sample_population(spec, 1), ValidationError);
    spec = point_mass();
    spec.registration_mix = {0.5, 0.2, 0.2};
    CHECK_FALSE(violations(spec).empty());
    spec = point_mass();
    spec.noise = 0.6;
    CHECK_FALSE(violations(spec).empty());
    spec = point_mass();
    spec.marginals["age"] = UniformIntMarginal{5, 1};
    CHECK_FALSE(violations(spec).empty());
}
