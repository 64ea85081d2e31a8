#include "capsim/random.h"

#include <algorithm>
#include <stdexcept>

namespace capsim {

std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index over an empty range");
    }
    const auto i = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
    return std::min(i, n - 1);
}

std::size_t categorical(Rng &rng, std::span<const double> weights) {
    double total = 0.0;
    for (const double w : weights) {
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("categorical draw needs a positive total weight");
    }
    const double u = uniform01(rng) * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        cumulative += weights[i];
        last_positive = i;
        if (u < cumulative) {
            return i;
        }
    }
    return last_positive;
}

} // namespace capsim
