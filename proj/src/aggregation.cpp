#include "capsim/aggregation.h"

#include <cmath>
#include <sstream>

namespace capsim {

std::string mode_name(const AggregationMode &mode) {
    struct Visitor {
        std::string operator()(const Lexicographic &) const { return "lexicographic"; }
        std::string operator()(const Weighted &) const { return "weighted"; }
        std::string operator()(const NeedConstrained &) const { return "need_constrained"; }
    };
    return std::visit(Visitor{}, mode);
}

std::string describe(const AggregationMode &mode) {
    std::ostringstream os;
    os << mode_name(mode) << '(';
    if (const auto *w = std::get_if<Weighted>(&mode)) {
        os << "weight=" << w->weight;
    } else if (const auto *l = std::get_if<Lexicographic>(&mode)) {
        os << "epsilon=" << l->epsilon;
    } else {
        os << "epsilon=" << std::get<NeedConstrained>(mode).epsilon;
    }
    os << ')';
    return os.str();
}

std::vector<std::string> violations(const AggregationMode &mode) {
    std::vector<std::string> out;
    if (const auto *w = std::get_if<Weighted>(&mode)) {
        if (!std::isfinite(w->weight) || w->weight < 0.0 || w->weight > 1.0) {
            out.emplace_back("weighted aggregation weight must be in [0,1]");
        }
    } else {
        const double eps = std::holds_alternative<Lexicographic>(mode)
                               ? std::get<Lexicographic>(mode).epsilon
                               : std::get<NeedConstrained>(mode).epsilon;
        if (!std::isfinite(eps) || eps < 0.0) {
            out.emplace_back(mode_name(mode) + " epsilon must be >= 0");
        }
    }
    return out;
}

} // namespace capsim
