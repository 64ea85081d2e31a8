#include "capsim/errors.h"
#include "capsim/scenario_io.h"

#include "support/fixtures.h"
#include "support/generators.h"

#include "doctest.h"

#include <algorithm>
#include <filesystem>

using namespace capsim;
using namespace capsim::testing;

namespace {

const char *kMinimal = R"(
format_version: 1
name: tiny
actions:
  - name: rest
)";

template <typename Fn> std::string parse_location(Fn fn) {
    try {
        fn();
    } catch (const ParseError &e) {
        return e.location();
    }
    return "<no ParseError>";
}

std::vector<std::string> violations_of(const std::string &text) {
    try {
        load_scenario_text(text);
    } catch (const ValidationError &e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string> &v, const std::string &needle) {
    return std::any_of(v.begin(), v.end(),
                       [&](const std::string &s) { return s.find(needle) != std::string::npos; });
}

} // namespace

TEST_CASE("minimal document loads with defaults") {
    const auto spec = load_scenario_text(kMinimal);
    CHECK(spec.name == "tiny");
    REQUIRE(spec.actions.size() == 1);
    CHECK(spec.population.needs == baseline_needs());
    CHECK(spec.simulation.gamma_long == 0.9);
    CHECK(std::holds_alternative<Lexicographic>(spec.simulation.aggregation));
}

TEST_CASE("YAML syntax errors carry a line and column") {
    const auto where = parse_location([] { load_scenario_text("format_version: 1\nactions: [\n  {name: a\n"); });
    CHECK(where.rfind("line ", 0) == 0);
    CHECK(where.find("column") != std::string::npos);
}

TEST_CASE("schema errors carry a key path") {
    CHECK(parse_location([] { load_scenario_text("name: x\nactions: []\n"); }) == "format_version");
    CHECK(parse_location([] {
              load_scenario_text("format_version: 1\nactions:\n  - name: a\n    effects:\n      - {fly: 1}\n");
          }) == "actions[0].effects[0].fly");
    CHECK(parse_location([] {
              load_scenario_text("format_version: 1\nactions:\n  - name: a\n    colour: red\n");
          }) == "actions[0].colour");
    CHECK(parse_location([] {
              load_scenario_text("format_version: 1\nactions:\n  - name: a\n    base_long_reward: lots\n");
          }) == "actions[0].base_long_reward");
}

TEST_CASE("unknown names are collected as violations") {
    const auto v = violations_of(R"(
format_version: 1
actions:
  - name: a
    enables: [bodilly_helth]
    relieves: {warmth: 0.5}
    importance: {Kindness: 0.5}
)");
    CHECK(mentions(v, "unknown central capability 'bodilly_helth'"));
    CHECK(mentions(v, "undeclared need 'warmth'"));
    CHECK(mentions(v, "unknown value dimension 'Kindness'"));
}

TEST_CASE("empty action list is a validation error") {
    CHECK(violations_of("format_version: 1\nactions: []\n") == std::vector<std::string>{"no actions"});
}

TEST_CASE("JSON documents are accepted") {
    const auto spec = load_scenario_text(
        R"({"format_version": 1, "name": "j", "actions": [{"name": "go", "base_long_reward": 2}]})");
    CHECK(spec.actions[0].base_long_reward == 2.0);
}

TEST_CASE("condition forms") {
    const auto spec = load_scenario_text(R"(
format_version: 1
actions:
  - name: a
norms:
  - id: n1
    applies_to: "*"
    when: {registration: non_registered, housing: [Roofless, houseless], health: {lt: 2}}
    effect: {scale: 0.5}
  - id: n2
    applies_to: a
    when:
      - {field: attr.age, op: ge, value: 65}
      - {field: env.winter, value: true}
    effect: allow
)");
    const auto &c1 = spec.norms[0].when.clauses;
    REQUIRE(c1.size() == 3);
    CHECK(c1[0].field == "registration");
    CHECK(c1[0].operands[0] == Scalar{std::string("NonRegistered")});
    CHECK(c1[1].op == CompareOp::In);
    CHECK(c1[1].operands[1] == Scalar{std::string("Houseless")});
    CHECK(c1[2].op == CompareOp::Lt);
    CHECK(c1[2].operands[0] == Scalar{2.0});
    const auto &c2 = spec.norms[1].when.clauses;
    REQUIRE(c2.size() == 2);
    CHECK(c2[0].op == CompareOp::Ge);
    CHECK(c2[1].operands[0] == Scalar{true});
}

TEST_CASE("quoted scalars stay strings") {
    const auto spec = load_scenario_text(R"(
format_version: 1
environment: {zone: "12", open: true, level: 3}
actions: [{name: a}]
)");
    CHECK(spec.environment.at("zone") == Scalar{std::string("12")});
    CHECK(spec.environment.at("open") == Scalar{true});
    CHECK(spec.environment.at("level") == Scalar{3.0});
}

TEST_CASE("bundled scenarios round-trip through the canonical document") {
    for (const auto &entry : std::filesystem::directory_iterator(CAPSIM_SCENARIO_DIR)) {
        if (entry.path().extension() != ".yaml") {
            continue;
        }
        CAPTURE(entry.path().string());
        const auto spec = load_scenario_file(entry.path());
        const auto text = scenario_to_json(spec).dump(2);
        const auto again = load_scenario_text(text);
        CHECK(again == spec);
        CHECK(scenario_to_json(again).dump() == scenario_to_json(spec).dump());
    }
}

TEST_CASE("property: random scenarios round-trip") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        auto spec = random_scenario(rng);
        spec.population.marginals["gender"] = CategoricalMarginal{{{"w", 0.3}, {"m", 0.6}, {"x", 0.1}}};
        spec.population.marginals["age"] = UniformIntMarginal{18, 90};
        spec.environment["rain"] = true;
        REQUIRE(validate(spec).empty());
        const auto again = load_scenario_text(scenario_to_json(spec).dump());
        CHECK(again == spec);
    }
}

TEST_CASE("scenario paths resolve without the extension") {
    const auto bare = std::filesystem::path(CAPSIM_SCENARIO_DIR) / "health_inequity";
    CHECK(resolve_scenario_path(bare).extension() == ".yaml");
    CHECK(load_scenario_file(bare).name == "health_inequity");
    CHECK_THROWS_AS(load_scenario_file(bare.string() + "_missing"), Error);
}

TEST_CASE("aggregation documents") {
    CHECK(std::holds_alternative<Lexicographic>(aggregation_from_json("lexicographic")));
    const auto w = aggregation_from_json({{"mode", "weighted"}, {"weight", 0.25}});
    REQUIRE(std::holds_alternative<Weighted>(w));
    CHECK(std::get<Weighted>(w).weight == 0.25);
    const auto nc = aggregation_from_json({{"mode", "need_constrained"}, {"epsilon", 0.5}});
    CHECK(std::get<NeedConstrained>(nc).epsilon == 0.5);
    CHECK_THROWS_AS(aggregation_from_json("softmax"), ParseError);
    for (const AggregationMode m : {AggregationMode{Lexicographic{0.0}}, AggregationMode{Weighted{0.7}},
                                    AggregationMode{NeedConstrained{1e-3}}}) {
        CHECK(aggregation_from_json(aggregation_to_json(m)) == m);
    }
}
