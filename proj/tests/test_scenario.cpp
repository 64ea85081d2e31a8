#include "capsim/errors.h"
#include "capsim/scenario.h"

#include "support/fixtures.h"
#include "support/generators.h"

#include "doctest.h"

#include <algorithm>

using namespace capsim;
using namespace capsim::testing;

namespace {

bool mentions(const std::vector<std::string> &violations, const std::string &needle) {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const std::string &v) { return v.find(needle) != std::string::npos; });
}

ScenarioSpec minimal() {
    ScenarioSpec spec;
    spec.name = "minimal";
    ActionSpec a;
    a.name = "walk";
    spec.actions.push_back(a);
    return spec;
}

} // namespace

TEST_CASE("bundled health_inequity fixture has the expected shape") {
    const auto spec = health_inequity();
    REQUIRE(spec.resources.size() == 1);
    CHECK(spec.resources[0].name == "phc");
    CHECK_FALSE(spec.resources[0].capacity.has_value());
    CHECK(spec.resources[0].unit_cost == 50.0);
    REQUIRE(spec.norms.size() == 1);
    CHECK(spec.norms[0].id == "registration_gate");
    CHECK(spec.norms[0].kind == NormKind::Legal);
    CHECK(std::holds_alternative<Forbid>(spec.norms[0].effect));
    REQUIRE(spec.actions.size() == 2);
    CHECK(spec.actions[0].name == "receive_medical_attention");
    CHECK(spec.actions[1].name == "keep_forward_without_medical_attention");
    CHECK(spec.actions[0].base_long_reward == 10.0);
    CHECK(spec.actions[1].base_long_reward == -10.0);
    CHECK(validate(spec).empty());
}

TEST_CASE("validation examples") {
    auto empty = minimal();
    empty.actions.clear();
    CHECK(validate(empty) == std::vector<std::string>{"no actions"});

    auto warmth = minimal();
    warmth.actions[0].relieves[NeedDimension{"warmth"}] = 0.5;
    CHECK(mentions(validate(warmth), "undeclared need 'warmth'"));

    auto scaled = minimal();
    NormRule norm;
    norm.id = "n";
    norm.applies_to = "*";
    norm.effect = Scale{1.3};
    scaled.norms.push_back(norm);
    CHECK(mentions(validate(scaled), "out of range"));

    auto dup = minimal();
    dup.actions.push_back(dup.actions[0]);
    CHECK(mentions(validate(dup), "duplicate action name"));

    CHECK(validate(minimal()).empty());
}

TEST_CASE("further validation checks") {
    auto spec = minimal();
    NormRule norm;
    norm.id = "n";
    norm.applies_to = "fly*";
    norm.promotes = {ValueDimension::Security};
    norm.demotes = {ValueDimension::Security};
    spec.norms.push_back(norm);
    spec.actions[0].requires_resource = ResourceRequirement{"bus", 1};
    spec.actions[0].effects.push_back(ResourceDelta{"bus", 1});
    spec.actions[0].importance[ValueDimension::Power] = 2.0;
    const auto v = validate(spec);
    CHECK(mentions(v, "matches no action"));
    CHECK(mentions(v, "both promotes and demotes"));
    CHECK(mentions(v, "undeclared resource 'bus'"));
    CHECK(mentions(v, "resource_delta names undeclared resource"));
    CHECK(mentions(v, "importance"));
}

TEST_CASE("feasibility examples from the health fixture") {
    const auto spec = health_inequity();
    const auto &rma = spec.actions[0];
    CHECK(feasibility(sick_agent(Registration::NonRegistered), rma, spec) == 0.0);
    CHECK(feasibility(sick_agent(Registration::Registered), rma, spec) == 1.0);
    CHECK(feasibility(sick_agent(Registration::InProcess), rma, spec) == 1.0);
}

TEST_CASE("personal factor 0.5 and norm scale 0.5 compose to 0.25") {
    auto spec = minimal();
    NormRule norm;
    norm.id = "half";
    norm.applies_to = "walk";
    norm.effect = Scale{0.5};
    spec.norms.push_back(norm);
    AgentProfile agent;
    agent.personal_factors.push_back({ConversionKind::Personal, {}, 0.5, "*"});
    CHECK(feasibility(agent, spec.actions[0], spec) == 0.25);

    // a personal term scoped to another action does not apply
    agent.personal_factors[0].applies_to = "run";
    CHECK(feasibility(agent, spec.actions[0], spec) == 0.5);
}

TEST_CASE("empty product is 1 and Allow is neutral") {
    auto spec = minimal();
    CHECK(feasibility(AgentProfile{}, spec.actions[0], spec) == 1.0);
    NormRule allow;
    allow.id = "ok";
    allow.applies_to = "*";
    allow.effect = Allow{};
    spec.norms.push_back(allow);
    CHECK(feasibility(AgentProfile{}, spec.actions[0], spec) == 1.0);
}

TEST_CASE("bounded resources gate feasibility") {
    auto spec = minimal();
    spec.resources.push_back({"bed", 2, 10.0, Payer::SocialServices});
    spec.actions[0].requires_resource = ResourceRequirement{"bed", 2};
    const AgentProfile agent;
    CHECK(feasibility(agent, spec.actions[0], spec) == 1.0);
    CHECK(feasibility(agent, spec.actions[0], spec, ResourceCounters{{"bed", 2}}) == 1.0);
    CHECK(feasibility(agent, spec.actions[0], spec, ResourceCounters{{"bed", 1}}) == 0.0);
    CHECK(feasibility(agent, spec.actions[0], spec, ResourceCounters{{"bed", 0}}) == 0.0);
}

TEST_CASE("property: forbid dominates, monotone in factors, result in [0,1]") {
    Rng rng(20240601);
    for (int trial = 0; trial < 500; ++trial) {
        auto spec = random_scenario(rng);
        AgentProfile agent;
        agent.state.health = static_cast<int>(pick(rng, 5));
        agent.state.housing = kHousingCategories[pick(rng, 5)];
        agent.state.registration = kRegistrationStates[pick(rng, 3)];
        if (coin(rng)) {
            agent.personal_factors.push_back({ConversionKind::Personal, random_condition(rng),
                                              uniform(rng, 0.0, 1.0), "*"});
        }
        for (auto &action : spec.actions) {
            const double f = feasibility(agent, action, spec);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);

            // lowering any term's factor never raises feasibility
            for (auto &term : action.conversion_terms) {
                const double saved = term.factor;
                term.factor = saved * uniform(rng, 0.0, 1.0);
                CHECK(feasibility(agent, action, spec) <= f);
                term.factor = saved;
            }

            // an always-matching Forbid drives it to zero whatever else holds
            auto forbidden = spec;
            NormRule forbid;
            forbid.id = "forbid_all";
            forbid.applies_to = action.name;
            forbid.effect = Forbid{};
            forbidden.norms.push_back(forbid);
            const auto *copy = forbidden.find_action(action.name);
            CHECK(feasibility(agent, *copy, forbidden) == 0.0);
        }
    }
}

TEST_CASE("norm overrides switch norms and reject unknown ids") {
    const auto spec = health_inequity();
    const auto off = apply_norm_overrides(spec, {{"registration_gate", false}});
    CHECK_FALSE(off.norms[0].enabled);
    CHECK(feasibility(sick_agent(Registration::NonRegistered), off.actions[0], off) == 1.0);
    CHECK_THROWS_AS(apply_norm_overrides(spec, {{"nope", false}}), ValidationError);
}

TEST_CASE("state effects clamp to their domains") {
    auto spec = minimal();
    spec.population.marginals["age"] = UniformIntMarginal{18, 80};
    PersonalState s;
    s.health = 4;
    s.attributes["age"] = 79.0;
    const std::vector<EffectRule> effects{HealthDelta{3}, HousingSet{Housing::Housed},
                                          RegistrationSet{Registration::InProcess},
                                          AttributeDelta{"age", 5.0}};
    const auto next = apply_state_effects(s, effects, spec);
    CHECK(next.health == 4);
    CHECK(next.housing == Housing::Housed);
    CHECK(next.registration == Registration::InProcess);
    CHECK(std::get<double>(next.attributes.at("age")) == 80.0);
    const std::vector<EffectRule> down{HealthDelta{-9}};
    CHECK(apply_state_effects(s, down, spec).health == 0);
}

TEST_CASE("rewards are base plus weighted relief and importance") {
    ActionSpec a;
    a.base_short_reward = 1.0;
    a.base_long_reward = -2.0;
    a.relieves[NeedDimension{"Food"}] = 0.5;
    a.importance[ValueDimension::Security] = 0.25;
    ChoiceFactors c;
    c.set_urgency(NeedDimension{"Food"}, 0.8);
    c.set_value_pref(ValueDimension::Security, 0.4);
    CHECK(short_reward(a, c) == doctest::Approx(1.0 + 0.8 * 0.5).epsilon(1e-15));
    CHECK(long_reward(a, c) == doctest::Approx(-2.0 + 0.4 * 0.25).epsilon(1e-15));
}
