#include "capsim/agent.h"

#include <array>

namespace capsim {
namespace {

constexpr std::array<std::pair<std::string_view, ConversionKind>, 3> kKindNames{{
    {"Personal", ConversionKind::Personal},
    {"Social", ConversionKind::Social},
    {"Environmental", ConversionKind::Environmental},
}};

} // namespace

std::string_view to_string(ConversionKind kind) {
    return kKindNames.at(static_cast<std::size_t>(kind)).first;
}

std::optional<ConversionKind> try_conversion_kind(std::string_view tag) {
    const auto key = normalize_tag(tag);
    for (const auto &[name, kind] : kKindNames) {
        if (normalize_tag(name) == key) {
            return kind;
        }
    }
    return std::nullopt;
}

} // namespace capsim
