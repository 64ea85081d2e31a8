#include "capsim/scenario_io.h"

#include "capsim/errors.h"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace capsim {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ojson scalar_to_json(const YAML::Node &node) {
    const std::string &text = node.Scalar();
    if (node.Tag() == "!") { // quoted
        return text;
    }
    if (text.empty() || text == "~" || text == "null" || text == "Null" || text == "NULL") {
        return nullptr;
    }
    if (text == "true" || text == "True" || text == "TRUE") {
        return true;
    }
    if (text == "false" || text == "False" || text == "FALSE") {
        return false;
    }
    const char *first = text.data();
    const char *last = text.data() + text.size();
    if (*first == '+') {
        ++first;
    }
    std::int64_t integer = 0;
    if (auto [ptr, ec] = std::from_chars(first, last, integer); ec == std::errc{} && ptr == last) {
        return integer;
    }
    double number = 0.0;
    if (auto [ptr, ec] = std::from_chars(first, last, number); ec == std::errc{} && ptr == last) {
        return number;
    }
    return text;
}

ojson yaml_to_json(const YAML::Node &node) {
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Scalar:
        return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
        ojson out = ojson::array();
        for (const auto &item : node) {
            out.push_back(yaml_to_json(item));
        }
        return out;
    }
    case YAML::NodeType::Map: {
        ojson out = ojson::object();
        for (const auto &item : node) {
            out[item.first.as<std::string>()] = yaml_to_json(item.second);
        }
        return out;
    }
    }
    return nullptr;
}

std::string child(const std::string &path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string item(const std::string &path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

/// Reads the schema from a JSON tree. Structural problems throw ParseError;
/// unknown names are collected as violations.
class SchemaReader {
  public:
    std::vector<std::string> violations;

    ScenarioSpec read(const ojson &doc) {
        object(doc, "");
        allowed(doc, "",
                {"format_version", "name", "resources", "norms", "environment", "actions",
                 "population", "simulation"});
        ScenarioSpec spec;
        if (!doc.contains("format_version")) {
            throw ParseError("format_version", "missing required key");
        }
        spec.format_version = static_cast<int>(integer(doc["format_version"], "format_version"));
        if (doc.contains("name")) {
            spec.name = string(doc["name"], "name");
        }
        if (auto *r = optional(doc, "resources")) {
            for_each(*r, "resources", [&](const ojson &node, const std::string &path) {
                spec.resources.push_back(resource(node, path));
            });
        }
        if (auto *n = optional(doc, "norms")) {
            for_each(*n, "norms", [&](const ojson &node, const std::string &path) {
                spec.norms.push_back(norm(node, path));
            });
        }
        if (auto *e = optional(doc, "environment")) {
            object(*e, "environment");
            for (const auto &[key, value] : e->items()) {
                spec.environment[key] = scalar(value, child("environment", key));
            }
        }
        if (auto *a = optional(doc, "actions")) {
            for_each(*a, "actions", [&](const ojson &node, const std::string &path) {
                spec.actions.push_back(action(node, path));
            });
        }
        if (auto *p = optional(doc, "population")) {
            spec.population = population(*p, "population");
        }
        if (auto *s = optional(doc, "simulation")) {
            spec.simulation = simulation(*s, "simulation");
        }
        return spec;
    }

    Condition condition(const ojson &node, const std::string &path) {
        Condition out;
        if (node.is_null()) {
            return out;
        }
        if (node.is_array()) {
            for (std::size_t i = 0; i < node.size(); ++i) {
                const auto &c = node[i];
                const auto p = item(path, i);
                object(c, p);
                allowed(c, p, {"field", "op", "value"});
                Clause clause;
                clause.field = string(require(c, "field", p), child(p, "field"));
                const auto op_name = c.contains("op") ? string(c["op"], child(p, "op")) : "eq";
                clause.op = compare_op(op_name, child(p, "op"));
                clause.operands = operands(require(c, "value", p), child(p, "value"), clause.field);
                out.clauses.push_back(std::move(clause));
            }
            return out;
        }
        object(node, path);
        for (const auto &[field, spec] : node.items()) {
            const auto p = child(path, field);
            if (spec.is_object()) {
                for (const auto &[op_name, operand] : spec.items()) {
                    Clause clause{field, compare_op(op_name, child(p, op_name)),
                                  operands(operand, child(p, op_name), field)};
                    out.clauses.push_back(std::move(clause));
                }
            } else if (spec.is_array()) {
                out.clauses.push_back({field, CompareOp::In, operands(spec, p, field)});
            } else {
                out.clauses.push_back({field, CompareOp::Eq, operands(spec, p, field)});
            }
        }
        return out;
    }

    AggregationMode aggregation(const ojson &node, const std::string &path) {
        std::string mode;
        if (node.is_string()) {
            mode = node.get<std::string>();
        } else {
            object(node, path);
            allowed(node, path, {"mode", "epsilon", "weight"});
            mode = string(require(node, "mode", path), child(path, "mode"));
        }
        const auto key = normalize_tag(mode);
        auto param = [&](const char *name, double fallback) {
            return node.is_object() && node.contains(name) ? number(node[name], child(path, name))
                                                           : fallback;
        };
        if (key == "lexicographic") {
            return Lexicographic{param("epsilon", Lexicographic{}.epsilon)};
        }
        if (key == "weighted") {
            return Weighted{param("weight", Weighted{}.weight)};
        }
        if (key == "needconstrained") {
            return NeedConstrained{param("epsilon", NeedConstrained{}.epsilon)};
        }
        throw ParseError(path, "unknown aggregation mode '" + mode + "'");
    }

  private:
    static void object(const ojson &node, const std::string &path) {
        if (!node.is_object()) {
            throw ParseError(path.empty() ? "document" : path, "expected a mapping");
        }
    }

    static void allowed(const ojson &node, const std::string &path,
                        std::initializer_list<std::string_view> keys) {
        for (const auto &[key, value] : node.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ParseError(child(path, key), "unknown key");
            }
        }
    }

    static const ojson &require(const ojson &node, const char *key, const std::string &path) {
        if (!node.contains(key)) {
            throw ParseError(child(path, key), "missing required key");
        }
        return node[key];
    }

    static const ojson *optional(const ojson &node, const char *key) {
        if (!node.contains(key) || node[key].is_null()) {
            return nullptr;
        }
        return &node[key];
    }

    template <typename Fn> static void for_each(const ojson &node, const std::string &path, Fn fn) {
        if (!node.is_array()) {
            throw ParseError(path, "expected a list");
        }
        for (std::size_t i = 0; i < node.size(); ++i) {
            fn(node[i], item(path, i));
        }
    }

    static double number(const ojson &node, const std::string &path) {
        if (!node.is_number()) {
            throw ParseError(path, "expected a number");
        }
        return node.get<double>();
    }

    static std::int64_t integer(const ojson &node, const std::string &path) {
        if (node.is_number_integer()) {
            return node.get<std::int64_t>();
        }
        if (node.is_number_float()) {
            const double d = node.get<double>();
            if (std::isfinite(d) && std::floor(d) == d) {
                return static_cast<std::int64_t>(d);
            }
        }
        throw ParseError(path, "expected an integer");
    }

    static std::string string(const ojson &node, const std::string &path) {
        if (!node.is_string()) {
            throw ParseError(path, "expected a string");
        }
        return node.get<std::string>();
    }

    static bool boolean(const ojson &node, const std::string &path) {
        if (!node.is_boolean()) {
            throw ParseError(path, "expected true or false");
        }
        return node.get<bool>();
    }

    static Scalar scalar(const ojson &node, const std::string &path) {
        if (node.is_boolean()) {
            return node.get<bool>();
        }
        if (node.is_number()) {
            return node.get<double>();
        }
        if (node.is_string()) {
            return node.get<std::string>();
        }
        throw ParseError(path, "expected a scalar");
    }

    static CompareOp compare_op(const std::string &name, const std::string &path) {
        if (auto op = try_compare_op(name)) {
            return *op;
        }
        throw ParseError(path, "unknown comparison '" + name + "'");
    }

    static Scalar canonical_operand(Scalar value, std::string_view field) {
        if (const auto *name = std::get_if<std::string>(&value)) {
            if (field == "housing") {
                if (auto h = try_housing(*name)) {
                    return std::string(to_string(*h));
                }
            } else if (field == "registration") {
                if (auto r = try_registration(*name)) {
                    return std::string(to_string(*r));
                }
            }
        }
        return value;
    }

    static std::vector<Scalar> operands(const ojson &node, const std::string &path,
                                        std::string_view field) {
        std::vector<Scalar> out;
        if (node.is_array()) {
            for (std::size_t i = 0; i < node.size(); ++i) {
                out.push_back(canonical_operand(scalar(node[i], item(path, i)), field));
            }
        } else {
            out.push_back(canonical_operand(scalar(node, path), field));
        }
        return out;
    }

    CentralCapability capability(const ojson &node, const std::string &path) {
        const auto name = string(node, path);
        if (auto c = try_central_capability(name)) {
            return *c;
        }
        violations.push_back(path + ": unknown central capability '" + name + "'");
        return CentralCapability::Life;
    }

    std::optional<ValueDimension> value_dimension(const std::string &name, const std::string &path) {
        if (auto v = try_value_dimension(name)) {
            return v;
        }
        violations.push_back(path + ": unknown value dimension '" + name + "'");
        return std::nullopt;
    }

    std::set<ValueDimension> value_set(const ojson *node, const std::string &path) {
        std::set<ValueDimension> out;
        if (node == nullptr) {
            return out;
        }
        for_each(*node, path, [&](const ojson &v, const std::string &p) {
            if (auto dim = value_dimension(string(v, p), p)) {
                out.insert(*dim);
            }
        });
        return out;
    }

    Payer payer(const ojson &node, const std::string &path) {
        const auto name = string(node, path);
        if (auto p = try_payer(name)) {
            return *p;
        }
        violations.push_back(path + ": unknown payer '" + name + "'");
        return Payer::Healthcare;
    }

    Resource resource(const ojson &node, const std::string &path) {
        object(node, path);
        allowed(node, path, {"name", "capacity", "unit_cost", "payer"});
        Resource r;
        r.name = string(require(node, "name", path), child(path, "name"));
        if (auto *cap = optional(node, "capacity")) {
            if (cap->is_string() && normalize_tag(cap->get<std::string>()) == "unlimited") {
                r.capacity.reset();
            } else {
                r.capacity = integer(*cap, child(path, "capacity"));
            }
        }
        if (auto *cost = optional(node, "unit_cost")) {
            r.unit_cost = number(*cost, child(path, "unit_cost"));
        }
        if (auto *p = optional(node, "payer")) {
            r.payer = payer(*p, child(path, "payer"));
        }
        return r;
    }

    NormRule norm(const ojson &node, const std::string &path) {
        object(node, path);
        allowed(node, path,
                {"id", "kind", "applies_to", "when", "effect", "promotes", "demotes", "enabled"});
        NormRule n;
        n.id = string(require(node, "id", path), child(path, "id"));
        if (auto *kind = optional(node, "kind")) {
            const auto k = normalize_tag(string(*kind, child(path, "kind")));
            if (k == "legal") {
                n.kind = NormKind::Legal;
            } else if (k == "social") {
                n.kind = NormKind::Social;
            } else {
                violations.push_back(child(path, "kind") + ": norm kind must be legal or social");
            }
        }
        n.applies_to = string(require(node, "applies_to", path), child(path, "applies_to"));
        if (node.contains("when")) {
            n.when = condition(node["when"], child(path, "when"));
        }
        const auto &effect = require(node, "effect", path);
        const auto effect_path = child(path, "effect");
        if (effect.is_string()) {
            const auto e = normalize_tag(effect.get<std::string>());
            if (e == "forbid") {
                n.effect = Forbid{};
            } else if (e == "allow") {
                n.effect = Allow{};
            } else {
                throw ParseError(effect_path, "expected forbid, allow or {scale: f}");
            }
        } else {
            object(effect, effect_path);
            allowed(effect, effect_path, {"scale"});
            n.effect = Scale{number(require(effect, "scale", effect_path), child(effect_path, "scale"))};
        }
        n.promotes = value_set(optional(node, "promotes"), child(path, "promotes"));
        n.demotes = value_set(optional(node, "demotes"), child(path, "demotes"));
        if (auto *enabled = optional(node, "enabled")) {
            n.enabled = boolean(*enabled, child(path, "enabled"));
        }
        return n;
    }

    ConversionTerm conversion_term(const ojson &node, const std::string &path,
                                   std::initializer_list<std::string_view> extra_keys = {}) {
        object(node, path);
        for (const auto &[key, value] : node.items()) {
            const bool known = key == "kind" || key == "when" || key == "factor" ||
                               key == "applies_to" ||
                               std::find(extra_keys.begin(), extra_keys.end(), key) !=
                                   extra_keys.end();
            if (!known) {
                throw ParseError(child(path, key), "unknown key");
            }
        }
        ConversionTerm term;
        if (auto *kind = optional(node, "kind")) {
            const auto name = string(*kind, child(path, "kind"));
            if (auto k = try_conversion_kind(name)) {
                term.kind = *k;
            } else {
                violations.push_back(child(path, "kind") + ": unknown conversion kind '" + name + "'");
            }
        }
        if (node.contains("when")) {
            term.when = condition(node["when"], child(path, "when"));
        }
        term.factor = number(require(node, "factor", path), child(path, "factor"));
        if (auto *pattern = optional(node, "applies_to")) {
            term.applies_to = string(*pattern, child(path, "applies_to"));
        }
        return term;
    }

    EffectRule effect(const ojson &node, const std::string &path) {
        object(node, path);
        if (node.size() != 1) {
            throw ParseError(path, "an effect is a single-key mapping such as {health_delta: 1}");
        }
        const auto &[key, body] = *node.items().begin();
        const auto p = child(path, key);
        auto field = [&](const char *name) -> const ojson & {
            object(body, p);
            return require(body, name, p);
        };
        if (key == "health_delta") {
            return HealthDelta{static_cast<int>(integer(body, p))};
        }
        if (key == "housing_set") {
            const auto name = string(body, p);
            if (auto h = try_housing(name)) {
                return HousingSet{*h};
            }
            violations.push_back(p + ": unknown housing category '" + name + "'");
            return HousingSet{};
        }
        if (key == "registration_set") {
            const auto name = string(body, p);
            if (auto r = try_registration(name)) {
                return RegistrationSet{*r};
            }
            violations.push_back(p + ": unknown registration state '" + name + "'");
            return RegistrationSet{};
        }
        if (key == "attribute_delta") {
            allowed(body, p, {"attribute", "amount"});
            return AttributeDelta{string(field("attribute"), child(p, "attribute")),
                                  number(field("amount"), child(p, "amount"))};
        }
        if (key == "resource_delta") {
            allowed(body, p, {"resource", "amount"});
            return ResourceDelta{string(field("resource"), child(p, "resource")),
                                 integer(field("amount"), child(p, "amount"))};
        }
        if (key == "expense_delta") {
            allowed(body, p, {"payer", "amount"});
            return ExpenseDelta{payer(field("payer"), child(p, "payer")),
                                number(field("amount"), child(p, "amount"))};
        }
        if (key == "urgency_delta") {
            allowed(body, p, {"need", "amount"});
            return UrgencyDelta{NeedDimension{string(field("need"), child(p, "need"))},
                                number(field("amount"), child(p, "amount"))};
        }
        if (key == "value_pref_delta") {
            allowed(body, p, {"value", "amount"});
            const auto name = string(field("value"), child(p, "value"));
            const auto value = value_dimension(name, child(p, "value"));
            return ValuePrefDelta{value.value_or(ValueDimension::Security),
                                  number(field("amount"), child(p, "amount"))};
        }
        throw ParseError(p, "unknown effect target");
    }

    ActionSpec action(const ojson &node, const std::string &path) {
        object(node, path);
        allowed(node, path,
                {"name", "requires_resource", "conversion_terms", "enables", "relieves",
                 "importance", "effects", "base_short_reward", "base_long_reward"});
        ActionSpec a;
        a.name = string(require(node, "name", path), child(path, "name"));
        if (auto *req = optional(node, "requires_resource")) {
            const auto p = child(path, "requires_resource");
            ResourceRequirement r;
            if (req->is_string()) {
                r.resource = req->get<std::string>();
            } else {
                object(*req, p);
                allowed(*req, p, {"resource", "quantity"});
                r.resource = string(require(*req, "resource", p), child(p, "resource"));
                if (auto *q = optional(*req, "quantity")) {
                    r.quantity = integer(*q, child(p, "quantity"));
                }
            }
            a.requires_resource = r;
        }
        if (auto *terms = optional(node, "conversion_terms")) {
            for_each(*terms, child(path, "conversion_terms"),
                     [&](const ojson &t, const std::string &p) {
                         a.conversion_terms.push_back(conversion_term(t, p));
                     });
        }
        if (auto *enables = optional(node, "enables")) {
            for_each(*enables, child(path, "enables"), [&](const ojson &c, const std::string &p) {
                a.enables.insert(capability(c, p));
            });
        }
        if (auto *relieves = optional(node, "relieves")) {
            object(*relieves, child(path, "relieves"));
            for (const auto &[need, relief] : relieves->items()) {
                a.relieves[NeedDimension{need}] = number(relief, child(child(path, "relieves"), need));
            }
        }
        if (auto *importance = optional(node, "importance")) {
            const auto p = child(path, "importance");
            object(*importance, p);
            for (const auto &[name, satisfaction] : importance->items()) {
                if (auto v = value_dimension(name, child(p, name))) {
                    a.importance[*v] = number(satisfaction, child(p, name));
                }
            }
        }
        if (auto *effects = optional(node, "effects")) {
            for_each(*effects, child(path, "effects"), [&](const ojson &e, const std::string &p) {
                a.effects.push_back(effect(e, p));
            });
        }
        if (auto *r = optional(node, "base_short_reward")) {
            a.base_short_reward = number(*r, child(path, "base_short_reward"));
        }
        if (auto *r = optional(node, "base_long_reward")) {
            a.base_long_reward = number(*r, child(path, "base_long_reward"));
        }
        return a;
    }

    template <std::size_t N, typename Enum, typename Parse>
    std::array<double, N> mix(const ojson &node, const std::string &path,
                              const std::array<Enum, N> &order, Parse parse) {
        object(node, path);
        std::array<double, N> out{};
        for (const auto &[name, weight] : node.items()) {
            const auto p = child(path, name);
            if (auto e = parse(name)) {
                const auto it = std::find(order.begin(), order.end(), *e);
                out[static_cast<std::size_t>(it - order.begin())] = number(weight, p);
            } else {
                violations.push_back(p + ": unknown category '" + name + "'");
            }
        }
        return out;
    }

    PopulationSpec population(const ojson &node, const std::string &path) {
        object(node, path);
        allowed(node, path,
                {"n", "needs", "registration_mix", "health_mix", "housing_mix", "marginals",
                 "priority_tiers", "dimension_links", "noise", "personal_factors"});
        PopulationSpec spec;
        if (auto *n = optional(node, "n")) {
            spec.n = integer(*n, child(path, "n"));
        }
        if (auto *needs = optional(node, "needs")) {
            spec.needs.clear();
            for_each(*needs, child(path, "needs"), [&](const ojson &need, const std::string &p) {
                spec.needs.push_back(NeedDimension{string(need, p)});
            });
        }
        if (auto *m = optional(node, "registration_mix")) {
            spec.registration_mix = mix(*m, child(path, "registration_mix"), kRegistrationStates,
                                        [](const std::string &s) { return try_registration(s); });
        }
        if (auto *m = optional(node, "housing_mix")) {
            spec.housing_mix = mix(*m, child(path, "housing_mix"), kHousingCategories,
                                   [](const std::string &s) { return try_housing(s); });
        }
        if (auto *m = optional(node, "health_mix")) {
            static constexpr std::array<int, 5> levels{0, 1, 2, 3, 4};
            spec.health_mix =
                mix(*m, child(path, "health_mix"), levels, [](const std::string &s) -> std::optional<int> {
                    if (s.size() == 1 && s[0] >= '0' && s[0] <= '4') {
                        return s[0] - '0';
                    }
                    return std::nullopt;
                });
        }
        if (auto *marginals = optional(node, "marginals")) {
            const auto mpath = child(path, "marginals");
            object(*marginals, mpath);
            for (const auto &[name, body] : marginals->items()) {
                const auto p = child(mpath, name);
                object(body, p);
                if (body.size() != 1) {
                    throw ParseError(p, "expected {categorical: {...}} or {uniform_int: [lo, hi]}");
                }
                if (body.contains("categorical")) {
                    const auto &cats = body["categorical"];
                    const auto cp = child(p, "categorical");
                    CategoricalMarginal m;
                    if (cats.is_array()) {
                        for_each(cats, cp, [&](const ojson &entry, const std::string &ep) {
                            object(entry, ep);
                            allowed(entry, ep, {"value", "weight"});
                            m.weights.emplace_back(string(require(entry, "value", ep), child(ep, "value")),
                                                   number(require(entry, "weight", ep), child(ep, "weight")));
                        });
                    } else {
                        object(cats, cp);
                        for (const auto &[value, weight] : cats.items()) {
                            m.weights.emplace_back(value, number(weight, child(cp, value)));
                        }
                    }
                    spec.marginals[name] = std::move(m);
                } else if (body.contains("uniform_int")) {
                    const auto &range = body["uniform_int"];
                    const auto rp = child(p, "uniform_int");
                    if (!range.is_array() || range.size() != 2) {
                        throw ParseError(rp, "expected [lo, hi]");
                    }
                    spec.marginals[name] =
                        UniformIntMarginal{integer(range[0], item(rp, 0)), integer(range[1], item(rp, 1))};
                } else {
                    throw ParseError(p, "expected categorical or uniform_int");
                }
            }
        }
        if (auto *tiers = optional(node, "priority_tiers")) {
            for_each(*tiers, child(path, "priority_tiers"), [&](const ojson &t, const std::string &p) {
                object(t, p);
                allowed(t, p, {"name", "weight", "capabilities"});
                PriorityTier tier;
                tier.name = string(require(t, "name", p), child(p, "name"));
                tier.weight = number(require(t, "weight", p), child(p, "weight"));
                for_each(require(t, "capabilities", p), child(p, "capabilities"),
                         [&](const ojson &c, const std::string &cp) {
                             tier.capabilities.insert(capability(c, cp));
                         });
                spec.priority_tiers.push_back(std::move(tier));
            });
        }
        if (auto *links = optional(node, "dimension_links")) {
            const auto lp = child(path, "dimension_links");
            object(*links, lp);
            for (const auto &[dimension, target] : links->items()) {
                const auto p = child(lp, dimension);
                const auto c = capability(target, p);
                if (auto v = try_value_dimension(dimension)) {
                    spec.value_links[*v] = c;
                } else {
                    spec.need_links[NeedDimension{dimension}] = c;
                }
            }
        }
        if (auto *noise = optional(node, "noise")) {
            spec.noise = number(*noise, child(path, "noise"));
        }
        if (auto *factors = optional(node, "personal_factors")) {
            for_each(*factors, child(path, "personal_factors"), [&](const ojson &f, const std::string &p) {
                PersonalFactorSpec pf;
                pf.term = conversion_term(f, p, {"prevalence"});
                if (auto *prev = optional(f, "prevalence")) {
                    pf.prevalence = number(*prev, child(p, "prevalence"));
                }
                spec.personal_factors.push_back(std::move(pf));
            });
        }
        return spec;
    }

    SimulationConfig simulation(const ojson &node, const std::string &path) {
        object(node, path);
        allowed(node, path,
                {"horizon", "gamma_short", "gamma_long", "tolerance", "max_iter", "state_cap",
                 "aggregation", "schedule", "terminal_when"});
        SimulationConfig sim;
        if (auto *h = optional(node, "horizon")) {
            sim.horizon = integer(*h, child(path, "horizon"));
        }
        if (auto *g = optional(node, "gamma_short")) {
            sim.gamma_short = number(*g, child(path, "gamma_short"));
        }
        if (auto *g = optional(node, "gamma_long")) {
            sim.gamma_long = number(*g, child(path, "gamma_long"));
        }
        if (auto *t = optional(node, "tolerance")) {
            sim.tolerance = number(*t, child(path, "tolerance"));
        }
        if (auto *m = optional(node, "max_iter")) {
            const auto v = integer(*m, child(path, "max_iter"));
            sim.max_iter = v < 0 ? 0 : static_cast<std::size_t>(v);
        }
        if (auto *c = optional(node, "state_cap")) {
            const auto v = integer(*c, child(path, "state_cap"));
            sim.state_cap = v < 0 ? 0 : static_cast<std::size_t>(v);
        }
        if (auto *a = optional(node, "aggregation")) {
            sim.aggregation = aggregation(*a, child(path, "aggregation"));
        }
        if (auto *s = optional(node, "schedule")) {
            const auto name = normalize_tag(string(*s, child(path, "schedule")));
            if (name == "ascending") {
                sim.schedule = Schedule::Ascending;
            } else if (name == "shuffled") {
                sim.schedule = Schedule::Shuffled;
            } else {
                violations.push_back(child(path, "schedule") + ": expected ascending or shuffled");
            }
        }
        if (node.contains("terminal_when") && !node["terminal_when"].is_null()) {
            sim.terminal_when = condition(node["terminal_when"], child(path, "terminal_when"));
        }
        return sim;
    }
};

json scalar_json(const Scalar &value) {
    return std::visit([](const auto &v) { return json(v); }, value);
}

json operands_json(const Clause &clause) {
    if (clause.op == CompareOp::In || clause.op == CompareOp::NotIn) {
        json out = json::array();
        for (const auto &o : clause.operands) {
            out.push_back(scalar_json(o));
        }
        return out;
    }
    return clause.operands.empty() ? json(nullptr) : scalar_json(clause.operands.front());
}

json term_json(const ConversionTerm &term) {
    json out{{"kind", to_string(term.kind)},
             {"when", condition_to_json(term.when)},
             {"factor", term.factor}};
    if (term.applies_to != "*") {
        out["applies_to"] = term.applies_to;
    }
    return out;
}

json value_list(const std::set<ValueDimension> &values) {
    json out = json::array();
    for (const auto v : values) {
        out.push_back(to_string(v));
    }
    return out;
}

json effect_json(const EffectRule &effect) {
    struct Visitor {
        json operator()(const HealthDelta &e) const { return {{"health_delta", e.amount}}; }
        json operator()(const HousingSet &e) const { return {{"housing_set", to_string(e.value)}}; }
        json operator()(const RegistrationSet &e) const {
            return {{"registration_set", to_string(e.value)}};
        }
        json operator()(const AttributeDelta &e) const {
            return {{"attribute_delta", {{"attribute", e.attribute}, {"amount", e.amount}}}};
        }
        json operator()(const ResourceDelta &e) const {
            return {{"resource_delta", {{"resource", e.resource}, {"amount", e.amount}}}};
        }
        json operator()(const ExpenseDelta &e) const {
            return {{"expense_delta", {{"payer", to_string(e.payer)}, {"amount", e.amount}}}};
        }
        json operator()(const UrgencyDelta &e) const {
            return {{"urgency_delta", {{"need", e.need.name}, {"amount", e.amount}}}};
        }
        json operator()(const ValuePrefDelta &e) const {
            return {{"value_pref_delta", {{"value", to_string(e.value)}, {"amount", e.amount}}}};
        }
    };
    return std::visit(Visitor{}, effect);
}

template <std::size_t N, typename Enum, typename Name>
json mix_json(const std::array<double, N> &weights, const std::array<Enum, N> &order, Name name) {
    json out = json::object();
    for (std::size_t i = 0; i < N; ++i) {
        if (weights[i] != 0.0) {
            out[name(order[i])] = weights[i];
        }
    }
    return out;
}

} // namespace

ScenarioSpec load_scenario(std::istream &source) {
    YAML::Node root;
    try {
        root = YAML::Load(source);
    } catch (const YAML::Exception &e) {
        throw ParseError("line " + std::to_string(e.mark.line + 1) + ", column " +
                             std::to_string(e.mark.column + 1),
                         e.msg);
    }
    SchemaReader reader;
    ScenarioSpec spec = reader.read(yaml_to_json(root));
    auto problems = std::move(reader.violations);
    for (auto &v : validate(spec)) {
        problems.push_back(std::move(v));
    }
    if (!problems.empty()) {
        throw ValidationError(std::move(problems));
    }
    return spec;
}

ScenarioSpec load_scenario_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_scenario(in);
}

std::filesystem::path resolve_scenario_path(const std::filesystem::path &path) {
    if (std::filesystem::exists(path)) {
        return path;
    }
    for (const char *ext : {".yaml", ".yml"}) {
        auto candidate = path;
        candidate += ext;
        if (std::filesystem::exists(candidate)) {
            return candidate;
        }
    }
    return path;
}

ScenarioSpec load_scenario_file(const std::filesystem::path &path) {
    const auto resolved = resolve_scenario_path(path);
    std::ifstream in(resolved);
    if (!in) {
        throw Error("cannot open scenario file '" + path.string() + "'");
    }
    ScenarioSpec spec = load_scenario(in);
    if (spec.name.empty()) {
        spec.name = resolved.stem().string();
    }
    return spec;
}

nlohmann::json condition_to_json(const Condition &condition) {
    json out = json::object();
    bool collision = false;
    for (const auto &clause : condition.clauses) {
        auto &slot = out[clause.field];
        if (clause.op == CompareOp::Eq && slot.is_null()) {
            slot = operands_json(clause);
            continue;
        }
        if (!slot.is_null() && !slot.is_object()) {
            // an Eq already sits here as a bare scalar; fold it into op form
            slot = json{{"eq", slot}};
        }
        const std::string op(to_string(clause.op));
        if (slot.is_object() && slot.contains(op)) {
            collision = true;
            break;
        }
        slot[op] = operands_json(clause);
    }
    if (!collision) {
        // The mapping form loses clause order; keep it only when reading it
        // back yields the same condition.
        SchemaReader reader;
        if (reader.condition(ojson::parse(out.dump()), "when") == condition) {
            return out;
        }
    }
    json list = json::array();
    for (const auto &clause : condition.clauses) {
        list.push_back({{"field", clause.field},
                        {"op", to_string(clause.op)},
                        {"value", operands_json(clause)}});
    }
    return list;
}

nlohmann::json aggregation_to_json(const AggregationMode &mode) {
    json out{{"mode", mode_name(mode)}};
    if (const auto *w = std::get_if<Weighted>(&mode)) {
        out["weight"] = w->weight;
    } else if (const auto *l = std::get_if<Lexicographic>(&mode)) {
        out["epsilon"] = l->epsilon;
    } else {
        out["epsilon"] = std::get<NeedConstrained>(mode).epsilon;
    }
    return out;
}

AggregationMode aggregation_from_json(const nlohmann::json &doc) {
    SchemaReader reader;
    return reader.aggregation(ojson::parse(doc.dump()), "aggregation");
}

nlohmann::json scenario_to_json(const ScenarioSpec &spec) {
    json doc;
    doc["format_version"] = spec.format_version;
    doc["name"] = spec.name;

    json resources = json::array();
    for (const auto &r : spec.resources) {
        resources.push_back({{"name", r.name},
                             {"capacity", r.capacity ? json(*r.capacity) : json("unlimited")},
                             {"unit_cost", r.unit_cost},
                             {"payer", to_string(r.payer)}});
    }
    doc["resources"] = resources;

    json norms = json::array();
    for (const auto &n : spec.norms) {
        json effect;
        if (std::holds_alternative<Forbid>(n.effect)) {
            effect = "forbid";
        } else if (std::holds_alternative<Allow>(n.effect)) {
            effect = "allow";
        } else {
            effect = {{"scale", std::get<Scale>(n.effect).factor}};
        }
        norms.push_back({{"id", n.id},
                         {"kind", to_string(n.kind)},
                         {"applies_to", n.applies_to},
                         {"when", condition_to_json(n.when)},
                         {"effect", effect},
                         {"promotes", value_list(n.promotes)},
                         {"demotes", value_list(n.demotes)},
                         {"enabled", n.enabled}});
    }
    doc["norms"] = norms;

    json env = json::object();
    for (const auto &[key, value] : spec.environment) {
        env[key] = scalar_json(value);
    }
    doc["environment"] = env;

    json actions = json::array();
    for (const auto &a : spec.actions) {
        json action{{"name", a.name},
                    {"base_short_reward", a.base_short_reward},
                    {"base_long_reward", a.base_long_reward}};
        if (a.requires_resource) {
            action["requires_resource"] = {{"resource", a.requires_resource->resource},
                                           {"quantity", a.requires_resource->quantity}};
        }
        json terms = json::array();
        for (const auto &t : a.conversion_terms) {
            terms.push_back(term_json(t));
        }
        action["conversion_terms"] = terms;
        json enables = json::array();
        for (const auto c : a.enables) {
            enables.push_back(to_string(c));
        }
        action["enables"] = enables;
        json relieves = json::object();
        for (const auto &[need, relief] : a.relieves) {
            relieves[need.name] = relief;
        }
        action["relieves"] = relieves;
        json importance = json::object();
        for (const auto &[value, satisfaction] : a.importance) {
            importance[std::string(to_string(value))] = satisfaction;
        }
        action["importance"] = importance;
        json effects = json::array();
        for (const auto &e : a.effects) {
            effects.push_back(effect_json(e));
        }
        action["effects"] = effects;
        actions.push_back(std::move(action));
    }
    doc["actions"] = actions;

    const auto &pop = spec.population;
    json population{{"n", pop.n}, {"noise", pop.noise}};
    json needs = json::array();
    for (const auto &need : pop.needs) {
        needs.push_back(need.name);
    }
    population["needs"] = needs;
    population["registration_mix"] = mix_json(pop.registration_mix, kRegistrationStates,
                                              [](Registration r) { return std::string(to_string(r)); });
    population["housing_mix"] = mix_json(pop.housing_mix, kHousingCategories,
                                         [](Housing h) { return std::string(to_string(h)); });
    population["health_mix"] = mix_json(pop.health_mix, std::array<int, 5>{0, 1, 2, 3, 4},
                                        [](int level) { return std::to_string(level); });
    json marginals = json::object();
    for (const auto &[name, marginal] : pop.marginals) {
        if (const auto *cat = std::get_if<CategoricalMarginal>(&marginal)) {
            // A list keeps category order, which the sampler depends on.
            json weights = json::array();
            for (const auto &[value, w] : cat->weights) {
                weights.push_back({{"value", value}, {"weight", w}});
            }
            marginals[name] = {{"categorical", weights}};
        } else {
            const auto &range = std::get<UniformIntMarginal>(marginal);
            marginals[name] = {{"uniform_int", {range.lo, range.hi}}};
        }
    }
    population["marginals"] = marginals;
    json tiers = json::array();
    for (const auto &tier : pop.priority_tiers) {
        json caps = json::array();
        for (const auto c : tier.capabilities) {
            caps.push_back(to_string(c));
        }
        tiers.push_back({{"name", tier.name}, {"weight", tier.weight}, {"capabilities", caps}});
    }
    population["priority_tiers"] = tiers;
    json links = json::object();
    for (const auto &[value, c] : pop.value_links) {
        links[std::string(to_string(value))] = to_string(c);
    }
    for (const auto &[need, c] : pop.need_links) {
        links[need.name] = to_string(c);
    }
    population["dimension_links"] = links;
    json factors = json::array();
    for (const auto &pf : pop.personal_factors) {
        json f = term_json(pf.term);
        f["applies_to"] = pf.term.applies_to;
        f["prevalence"] = pf.prevalence;
        factors.push_back(std::move(f));
    }
    population["personal_factors"] = factors;
    doc["population"] = population;

    const auto &sim = spec.simulation;
    json simulation{{"horizon", sim.horizon},
                    {"gamma_short", sim.gamma_short},
                    {"gamma_long", sim.gamma_long},
                    {"tolerance", sim.tolerance},
                    {"max_iter", sim.max_iter},
                    {"state_cap", sim.state_cap},
                    {"aggregation", aggregation_to_json(sim.aggregation)},
                    {"schedule", sim.schedule == Schedule::Ascending ? "ascending" : "shuffled"}};
    if (sim.terminal_when) {
        simulation["terminal_when"] = condition_to_json(*sim.terminal_when);
    }
    doc["simulation"] = simulation;
    return doc;
}

} // namespace capsim
