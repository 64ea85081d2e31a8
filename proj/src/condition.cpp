#include "capsim/condition.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

namespace capsim {
namespace {

constexpr std::array<std::pair<std::string_view, CompareOp>, 8> kOpNames{{
    {"eq", CompareOp::Eq},
    {"ne", CompareOp::Ne},
    {"lt", CompareOp::Lt},
    {"le", CompareOp::Le},
    {"gt", CompareOp::Gt},
    {"ge", CompareOp::Ge},
    {"in", CompareOp::In},
    {"not_in", CompareOp::NotIn},
}};

constexpr std::string_view kAttrPrefix = "attr.";
constexpr std::string_view kEnvPrefix = "env.";

std::optional<Scalar> resolve(std::string_view field, const PersonalState &state,
                              const Environment &env) {
    if (field == "health") {
        return Scalar{static_cast<double>(state.health)};
    }
    if (field == "housing") {
        return Scalar{std::string(to_string(state.housing))};
    }
    if (field == "registration") {
        return Scalar{std::string(to_string(state.registration))};
    }
    if (field.starts_with(kAttrPrefix)) {
        const auto it = state.attributes.find(std::string(field.substr(kAttrPrefix.size())));
        if (it == state.attributes.end()) {
            return std::nullopt;
        }
        return std::visit([](const auto &v) { return Scalar{v}; }, it->second);
    }
    if (field.starts_with(kEnvPrefix)) {
        const auto it = env.find(std::string(field.substr(kEnvPrefix.size())));
        if (it == env.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    return std::nullopt;
}

bool ordered(CompareOp op) {
    return op == CompareOp::Lt || op == CompareOp::Le || op == CompareOp::Gt ||
           op == CompareOp::Ge;
}

} // namespace

std::string_view to_string(CompareOp op) { return kOpNames.at(static_cast<std::size_t>(op)).first; }

std::optional<CompareOp> try_compare_op(std::string_view tag) {
    for (const auto &[name, op] : kOpNames) {
        if (name == tag) {
            return op;
        }
    }
    if (tag == "==") return CompareOp::Eq;
    if (tag == "!=") return CompareOp::Ne;
    if (tag == "<") return CompareOp::Lt;
    if (tag == "<=") return CompareOp::Le;
    if (tag == ">") return CompareOp::Gt;
    if (tag == ">=") return CompareOp::Ge;
    return std::nullopt;
}

bool evaluate(const Clause &clause, const PersonalState &state, const Environment &env) {
    const auto value = resolve(clause.field, state, env);
    if (!value || clause.operands.empty()) {
        return false;
    }
    const auto &first = clause.operands.front();
    switch (clause.op) {
    case CompareOp::Eq:
        return *value == first;
    case CompareOp::Ne:
        return *value != first;
    case CompareOp::In:
        return std::find(clause.operands.begin(), clause.operands.end(), *value) !=
               clause.operands.end();
    case CompareOp::NotIn:
        return std::find(clause.operands.begin(), clause.operands.end(), *value) ==
               clause.operands.end();
    case CompareOp::Lt:
    case CompareOp::Le:
    case CompareOp::Gt:
    case CompareOp::Ge: {
        const auto *lhs = std::get_if<double>(&*value);
        const auto *rhs = std::get_if<double>(&first);
        if (lhs == nullptr || rhs == nullptr) {
            return false;
        }
        switch (clause.op) {
        case CompareOp::Lt:
            return *lhs < *rhs;
        case CompareOp::Le:
            return *lhs <= *rhs;
        case CompareOp::Gt:
            return *lhs > *rhs;
        default:
            return *lhs >= *rhs;
        }
    }
    }
    return false;
}

bool Condition::holds(const PersonalState &state, const Environment &env) const {
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const Clause &c) { return evaluate(c, state, env); });
}

std::vector<std::string> violations(const Condition &condition) {
    std::vector<std::string> out;
    for (const auto &clause : condition.clauses) {
        const std::string_view field = clause.field;
        const bool known = field == "health" || field == "housing" || field == "registration" ||
                           (field.starts_with(kAttrPrefix) && field.size() > kAttrPrefix.size()) ||
                           (field.starts_with(kEnvPrefix) && field.size() > kEnvPrefix.size());
        if (!known) {
            out.push_back("unknown condition field '" + clause.field + "'");
            continue;
        }
        if (clause.operands.empty()) {
            out.push_back("condition on '" + clause.field + "' has no operand");
            continue;
        }
        for (const auto &operand : clause.operands) {
            if (ordered(clause.op) && !std::holds_alternative<double>(operand)) {
                out.push_back("ordering comparison on '" + clause.field +
                              "' needs a numeric operand");
            }
            if (field == "health" && !std::holds_alternative<double>(operand)) {
                out.push_back("health condition needs a numeric operand");
            }
            if (field == "housing" || field == "registration") {
                // Operands must be canonical names; evaluation compares exactly.
                const auto *name = std::get_if<std::string>(&operand);
                bool valid = false;
                if (name != nullptr && field == "housing") {
                    const auto h = try_housing(*name);
                    valid = h && to_string(*h) == *name;
                } else if (name != nullptr) {
                    const auto r = try_registration(*name);
                    valid = r && to_string(*r) == *name;
                }
                if (!valid) {
                    out.push_back("'" + to_string(operand) + "' is not a " + std::string(field) +
                                  " category");
                }
            }
        }
    }
    return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0;
    std::size_t t = 0;
    std::size_t star = std::string_view::npos;
    std::size_t mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

std::string to_string(const Scalar &value) {
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, double>) {
                std::ostringstream os;
                os << v;
                return os.str();
            } else {
                return v;
            }
        },
        value);
}

} // namespace capsim
