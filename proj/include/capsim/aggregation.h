#pragma once

#include <string>
#include <variant>
#include <vector>

namespace capsim {

/// Keep actions within `epsilon` of the best long-term value, then take the
/// best short-term value among them.
struct Lexicographic {
    double epsilon = 1e-9;
    bool operator==(const Lexicographic &) const = default;
};

/// Maximise weight * Q_long + (1 - weight) * Q_short.
struct Weighted {
    double weight = 0.5;
    bool operator==(const Weighted &) const = default;
};

/// Maximise Q_short subject to Q_long >= max Q_long - epsilon.
struct NeedConstrained {
    double epsilon = 1e-9;
    bool operator==(const NeedConstrained &) const = default;
};

using AggregationMode = std::variant<Lexicographic, Weighted, NeedConstrained>;

/// "lexicographic", "weighted" or "need_constrained".
std::string mode_name(const AggregationMode &mode);

/// e.g. "lexicographic(epsilon=1e-09)"
std::string describe(const AggregationMode &mode);

std::vector<std::string> violations(const AggregationMode &mode);

} // namespace capsim
