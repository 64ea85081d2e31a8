#include "capsim/errors.h"
#include "capsim/mdp.h"
#include "capsim/population.h"

#include "support/fixtures.h"
#include "support/generators.h"

#include "doctest.h"

#include <cmath>

using namespace capsim;
using namespace capsim::testing;

namespace {

ActionId action_of(const CompiledMdp &mdp, std::string_view name) {
    const auto a = mdp.find_action(name);
    REQUIRE(a.has_value());
    return *a;
}

PersonalState with_health(PersonalState s, int h) {
    s.health = h;
    return s;
}

} // namespace

TEST_CASE("registered sick agent: three states, deterministic transitions") {
    const auto spec = health_inequity();
    const auto agent = sick_agent(Registration::Registered);
    const auto mdp = compile(agent, spec);
    CHECK(violations(mdp).empty());
    REQUIRE(mdp.num_states() == 3);
    REQUIRE(mdp.num_actions() == 2);

    const auto s1 = mdp.initial_state;
    const auto s2 = mdp.find_state(with_health(agent.state, 2));
    const auto s3 = mdp.find_state(with_health(agent.state, 0));
    REQUIRE(s2.has_value());
    REQUIRE(s3.has_value());
    CHECK(mdp.states[index(s1)] == agent.state);

    const auto treat = action_of(mdp, "receive_medical_attention");
    const auto wait = action_of(mdp, "keep_forward_without_medical_attention");
    CHECK(mdp.transitions.row(s1, treat) == std::vector<Outcome>{{*s2, 1.0}});
    CHECK(mdp.transitions.row(s1, wait) == std::vector<Outcome>{{*s3, 1.0}});
    CHECK(mdp.rewards.long_term.at(s1, treat) == 10.0);
    CHECK(mdp.rewards.long_term.at(s1, wait) == -10.0);

    // health != 1 is terminal: self-loops, zero reward
    for (const auto s : {*s2, *s3}) {
        CHECK(mdp.terminal[index(s)] == 1);
        for (const auto a : {treat, wait}) {
            CHECK(mdp.transitions.row(s, a) == std::vector<Outcome>{{s, 1.0}});
            CHECK(mdp.rewards.long_term.at(s, a) == 0.0);
            CHECK(mdp.rewards.short_term.at(s, a) == 0.0);
        }
    }
}

TEST_CASE("non-registered agent: medical attention masked at s1") {
    const auto spec = health_inequity();
    const auto mdp = compile(sick_agent(Registration::NonRegistered), spec);
    CHECK(violations(mdp).empty());
    const auto s1 = mdp.initial_state;
    const auto treat = action_of(mdp, "receive_medical_attention");
    const auto wait = action_of(mdp, "keep_forward_without_medical_attention");
    CHECK_FALSE(mdp.transitions.possible(s1, treat));
    CHECK(mdp.transitions.row(s1, treat) == std::vector<Outcome>{{s1, 1.0}});
    CHECK(mdp.rewards.long_term.at(s1, treat) == 0.0);
    CHECK(mdp.rewards.short_term.at(s1, treat) == 0.0);
    CHECK(mdp.transitions.possible(s1, wait));
    CHECK(mdp.transitions.possible_actions(s1) == std::vector<ActionId>{wait});
    CHECK(mdp.num_states() == 2);
}

TEST_CASE("zero preferences and zero base rewards give zero rewards") {
    auto spec = health_inequity();
    for (auto &a : spec.actions) {
        a.base_long_reward = 0.0;
        a.base_short_reward = 0.0;
    }
    AgentProfile agent;
    agent.state.health = 1;
    agent.state.registration = Registration::Registered;
    const auto mdp = compile(agent, spec);
    for (const double r : mdp.rewards.short_term.values) {
        CHECK(r == 0.0);
    }
    for (const double r : mdp.rewards.long_term.values) {
        CHECK(r == 0.0);
    }
}

TEST_CASE("rewards follow the preference formulas") {
    const auto spec = health_inequity();
    auto agent = sick_agent(Registration::Registered);
    const auto mdp = compile(agent, spec);
    const auto treat = action_of(mdp, "receive_medical_attention");
    // base 0 + urgency 0.4 * relief 1.0
    CHECK(mdp.rewards.short_term.at(mdp.initial_state, treat) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("partial feasibility splits into success and self-loop") {
    auto spec = health_inequity();
    spec.norms[0].effect = Scale{0.25};
    const auto mdp = compile(sick_agent(Registration::NonRegistered), spec);
    const auto s1 = mdp.initial_state;
    const auto treat = action_of(mdp, "receive_medical_attention");
    const auto &row = mdp.transitions.row(s1, treat);
    REQUIRE(row.size() == 2);
    CHECK(row[0].probability == 0.25);
    CHECK(row[1] == Outcome{s1, 0.75});
    CHECK(mdp.transitions.feasibility[mdp.transitions.slot(s1, treat)] == 0.25);
}

TEST_CASE("state cap raises StateSpaceExplosion") {
    const auto spec = health_inequity();
    CompileContext ctx;
    ctx.state_cap = 2;
    CHECK_THROWS_AS(compile(sick_agent(Registration::Registered), spec, ctx), StateSpaceExplosion);
    ctx.state_cap = 3;
    CHECK_NOTHROW(compile(sick_agent(Registration::Registered), spec, ctx));
}

TEST_CASE("attribute effects are bounded by their marginal domain") {
    auto spec = health_inequity();
    spec.simulation.terminal_when.reset();
    spec.population.marginals["savings"] = UniformIntMarginal{0, 3};
    spec.actions[1].effects = {AttributeDelta{"savings", 1.0}};
    AgentProfile agent = sick_agent(Registration::NonRegistered);
    agent.state.attributes["savings"] = 0.0;
    const auto mdp = compile(agent, spec);
    CHECK(mdp.num_states() == 4);
    CHECK(violations(mdp).empty());
}

TEST_CASE("violations flags malformed tables") {
    Rng rng(3);
    auto mdp = random_mdp(rng);
    REQUIRE(violations(mdp).empty());
    mdp.transitions.rows[0] = {{StateId{0}, 0.5}};
    CHECK_FALSE(violations(mdp).empty());
}

TEST_CASE("debug dump carries every table") {
    const auto mdp = compile(sick_agent(Registration::Registered), health_inequity());
    const auto doc = mdp_to_json(mdp);
    CHECK(doc.at("states").size() == 3);
    CHECK(doc.contains("transitions"));
    CHECK(doc.contains("reward_long"));
}

TEST_CASE("property: compiled rows are stochastic over random scenarios") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto spec = random_scenario(rng);
        const auto agents = sample_population(spec.population, static_cast<std::uint64_t>(trial));
        for (const auto &agent : agents) {
            const auto mdp = compile(agent, spec);
            CHECK(violations(mdp).empty());
            for (const auto &row : mdp.transitions.rows) {
                double total = 0.0;
                for (const auto &o : row) {
                    total += o.probability;
                }
                CHECK(std::abs(total - 1.0) <= 1e-12);
            }
        }
    }
}
