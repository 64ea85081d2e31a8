#include "capsim/decision.h"

#include "capsim/errors.h"

#include <algorithm>
#include <limits>

namespace capsim {
namespace {

/// argmax of score over `candidates` (sorted ascending), lowest id on ties.
template <typename Score>
ActionId argmax(const std::vector<ActionId> &candidates, Score score) {
    ActionId best = candidates.front();
    double best_score = score(best);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double s = score(candidates[i]);
        if (s > best_score) {
            best = candidates[i];
            best_score = s;
        }
    }
    return best;
}

/// Best Q_short among actions whose Q_long is within epsilon of the maximum.
ActionId thresholded(const DualQTable &q, StateId s, const std::vector<ActionId> &feasible,
                     double epsilon) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto a : feasible) {
        top = std::max(top, q.q_long.at(s, a));
    }
    std::vector<ActionId> kept;
    for (const auto a : feasible) {
        if (q.q_long.at(s, a) >= top - epsilon) {
            kept.push_back(a);
        }
    }
    return argmax(kept, [&](ActionId a) { return q.q_short.at(s, a); });
}

} // namespace

ActionId aggregate_choice(const DualQTable &q, StateId s, std::span<const ActionId> feasible,
                          const AggregationMode &mode) {
    if (feasible.empty()) {
        throw NoFeasibleAction();
    }
    std::vector<ActionId> sorted(feasible.begin(), feasible.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    if (const auto *lex = std::get_if<Lexicographic>(&mode)) {
        return thresholded(q, s, sorted, lex->epsilon);
    }
    if (const auto *w = std::get_if<Weighted>(&mode)) {
        return argmax(sorted, [&](ActionId a) {
            return w->weight * q.q_long.at(s, a) + (1.0 - w->weight) * q.q_short.at(s, a);
        });
    }
    // The constraint set always holds the Q_long maximiser, so this never
    // needs a fallback.
    return thresholded(q, s, sorted, std::get<NeedConstrained>(mode).epsilon);
}

PolicyTable derive_policy(const DualQTable &q, const TransitionModel &mask,
                          const AggregationMode &mode) {
    PolicyTable policy;
    policy.mode = mode;
    policy.q_fingerprint = fingerprint(q);
    policy.choice.reserve(mask.num_states);
    for (std::size_t s = 0; s < mask.num_states; ++s) {
        const StateId state{static_cast<std::uint32_t>(s)};
        const auto feasible = mask.possible_actions(state);
        policy.choice.push_back(feasible.empty() ? kNoOp
                                                 : aggregate_choice(q, state, feasible, mode));
    }
    return policy;
}

} // namespace capsim
