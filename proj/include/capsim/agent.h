#pragma once

#include "capsim/condition.h"
#include "capsim/domain.h"

#include <cstdint>
#include <string>
#include <vector>

namespace capsim {

enum class ConversionKind : std::uint8_t { Personal, Social, Environmental };

std::string_view to_string(ConversionKind kind);
std::optional<ConversionKind> try_conversion_kind(std::string_view tag);

/// Probability multiplier applied to an action when `when` holds.
/// `applies_to` is only consulted for terms carried by an agent; terms listed
/// under an action apply to that action.
struct ConversionTerm {
    ConversionKind kind = ConversionKind::Personal;
    Condition when;
    double factor = 1.0;
    std::string applies_to = "*";

    bool operator==(const ConversionTerm &) const = default;
};

using AgentId = std::uint32_t;

struct AgentProfile {
    AgentId id = 0;
    PersonalState state;
    ChoiceFactors choice;
    std::vector<ConversionTerm> personal_factors;

    bool operator==(const AgentProfile &) const = default;
};

} // namespace capsim
