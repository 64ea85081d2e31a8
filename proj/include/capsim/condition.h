#pragma once

#include "capsim/domain.h"

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace capsim {

/// Environment flag or condition operand.
using Scalar = std::variant<bool, double, std::string>;

/// Environment flags of the physical world ("snow", "winter_shelter_open", ...).
using Environment = std::map<std::string, Scalar>;

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge, In, NotIn };

std::string_view to_string(CompareOp op);
std::optional<CompareOp> try_compare_op(std::string_view tag);

/// One test against a field. Fields are `health`, `housing`, `registration`,
/// `attr.<name>` or `env.<name>`. `In`/`NotIn` use every operand, the other
/// operators use the first one.
struct Clause {
    std::string field;
    CompareOp op = CompareOp::Eq;
    std::vector<Scalar> operands;

    bool operator==(const Clause &) const = default;
};

/// Conjunction of clauses. An empty condition always holds.
struct Condition {
    std::vector<Clause> clauses;

    bool always() const noexcept { return clauses.empty(); }
    bool holds(const PersonalState &state, const Environment &env) const;

    bool operator==(const Condition &) const = default;
};

/// A clause whose field is missing from the state/environment evaluates false.
bool evaluate(const Clause &clause, const PersonalState &state, const Environment &env);

/// Static checks: known field prefix, enum operands resolve, ordering ops only
/// on numeric operands.
std::vector<std::string> violations(const Condition &condition);

/// Shell-style match supporting `*` and `?`.
bool glob_match(std::string_view pattern, std::string_view text);

std::string to_string(const Scalar &value);

} // namespace capsim
