#pragma once

// Deterministic action selection from the dual Q-table. Values prevail over
// needs under the default Lexicographic mode. Ties go to the lowest ActionId.

#include "capsim/aggregation.h"
#include "capsim/mdp.h"
#include "capsim/solver.h"

#include <cstdint>
#include <span>
#include <vector>

namespace capsim {

/// Throws NoFeasibleAction if `feasible` is empty. `feasible` need not be sorted.
ActionId aggregate_choice(const DualQTable &q, StateId s, std::span<const ActionId> feasible,
                          const AggregationMode &mode);

struct PolicyTable {
    std::vector<ActionId> choice; // per state; kNoOp where nothing is feasible
    AggregationMode mode;
    std::uint64_t q_fingerprint = 0;

    ActionId at(StateId s) const { return choice.at(index(s)); }
    bool operator==(const PolicyTable &) const = default;
};

PolicyTable derive_policy(const DualQTable &q, const TransitionModel &mask,
                          const AggregationMode &mode);

} // namespace capsim
