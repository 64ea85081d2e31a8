#pragma once

// Tabular solvers over a CompiledMdp.
//
// Impossible (s, a) pairs have no continuation: Q(s, a) = 0, and the state
// value is the best Q over possible actions (0 when there are none).

#include "capsim/mdp.h"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace capsim {

struct QTable {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> values; // [s * num_actions + a]
    double residual = 0.0;      // Bellman residual of `values`
    std::size_t iterations = 0;

    double at(StateId s, ActionId a) const {
        return values.at(index(s) * num_actions + index(a));
    }
    double &at(StateId s, ActionId a) { return values.at(index(s) * num_actions + index(a)); }
};

struct DualQTable {
    QTable q_short;
    QTable q_long;
    double gamma_short = 0.0;
    double gamma_long = 0.0;
};

/// Jacobi value iteration until max |TQ - Q| <= tolerance.
/// Throws NonConvergence after max_iter sweeps, std::invalid_argument on
/// gamma outside [0,1], tolerance <= 0 or max_iter == 0.
QTable value_iteration(const CompiledMdp &mdp, RewardKind which, double gamma, double tolerance,
                       std::size_t max_iter);

/// max over (s, a) of |(TQ)(s, a) - Q(s, a)| for one Bellman sweep.
double bellman_residual(const CompiledMdp &mdp, RewardKind which, double gamma,
                        const QTable &q);

inline constexpr std::size_t kOracleMaxPairs = 100;
inline constexpr std::size_t kOracleMaxHorizon = 4096;

/// Exact discounted optimal Q for `horizon` remaining decisions after the
/// current one, by stage-wise backward induction (horizon 0 gives Q = r).
/// Throws OracleTooLarge when |S| * |A| > kOracleMaxPairs or horizon >
/// kOracleMaxHorizon.
QTable enumerate_horizon(const CompiledMdp &mdp, RewardKind which, double gamma,
                         std::size_t horizon);

/// Smallest H with gamma^H * r_max / (1 - gamma) <= tolerance.
std::size_t tail_bound_horizon(double gamma, double r_max, double tolerance);

struct SolverSettings {
    double gamma_short = 0.5;
    double gamma_long = 0.9;
    double tolerance = 1e-8;
    std::size_t max_iter = 10'000;
};

SolverSettings solver_settings(const SimulationConfig &config);

DualQTable solve_dual(const CompiledMdp &mdp, const SolverSettings &settings);

/// FNV-1a over the bit patterns of both tables and the discount factors.
std::uint64_t fingerprint(const DualQTable &q);

} // namespace capsim
