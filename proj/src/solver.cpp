#include "capsim/solver.h"

#include "capsim/errors.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace capsim {
namespace {

void check_gamma(double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("discount factor must be in [0,1]");
    }
}

std::vector<double> state_values(const CompiledMdp &mdp, const std::vector<double> &q) {
    const auto A = mdp.num_actions();
    std::vector<double> v(mdp.num_states(), 0.0);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        bool any = false;
        double best = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            if (mdp.transitions.feasibility[s * A + a] > 0.0) {
                best = any ? std::max(best, q[s * A + a]) : q[s * A + a];
                any = true;
            }
        }
        v[s] = best;
    }
    return v;
}

/// One Bellman backup of every (s, a) against state values `v`.
std::vector<double> backup(const CompiledMdp &mdp, const RewardTable &r, double gamma,
                           const std::vector<double> &v) {
    const auto &tm = mdp.transitions;
    std::vector<double> out(tm.rows.size(), 0.0);
    for (std::size_t k = 0; k < tm.rows.size(); ++k) {
        if (tm.feasibility[k] <= 0.0) {
            continue;
        }
        double expected = 0.0;
        for (const auto &o : tm.rows[k]) {
            expected += o.probability * v[index(o.next)];
        }
        out[k] = r.values[k] + gamma * expected;
    }
    return out;
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

QTable make_table(const CompiledMdp &mdp, std::vector<double> values) {
    QTable q;
    q.num_states = mdp.num_states();
    q.num_actions = mdp.num_actions();
    q.values = std::move(values);
    return q;
}

template <typename T> void fnv_mix(std::uint64_t &h, T value) {
    const auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    for (const unsigned char byte : bits) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
}

} // namespace

QTable value_iteration(const CompiledMdp &mdp, RewardKind which, double gamma, double tolerance,
                       std::size_t max_iter) {
    check_gamma(gamma);
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("tolerance must be > 0");
    }
    if (max_iter == 0) {
        throw std::invalid_argument("max_iter must be > 0");
    }
    const auto &r = mdp.reward(which);
    std::vector<double> q(mdp.transitions.rows.size(), 0.0);
    double delta = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        auto next = backup(mdp, r, gamma, state_values(mdp, q));
        delta = max_abs_diff(next, q);
        q = std::move(next);
        if (delta <= tolerance) {
            QTable out = make_table(mdp, std::move(q));
            out.iterations = it;
            out.residual = bellman_residual(mdp, which, gamma, out);
            return out;
        }
    }
    throw NonConvergence(max_iter, delta);
}

double bellman_residual(const CompiledMdp &mdp, RewardKind which, double gamma,
                        const QTable &q) {
    const auto next = backup(mdp, mdp.reward(which), gamma, state_values(mdp, q.values));
    return max_abs_diff(next, q.values);
}

QTable enumerate_horizon(const CompiledMdp &mdp, RewardKind which, double gamma,
                         std::size_t horizon) {
    check_gamma(gamma);
    if (mdp.num_states() * mdp.num_actions() > kOracleMaxPairs) {
        throw OracleTooLarge("oracle limited to " + std::to_string(kOracleMaxPairs) +
                             " state-action pairs");
    }
    if (horizon > kOracleMaxHorizon) {
        throw OracleTooLarge("oracle limited to horizon " + std::to_string(kOracleMaxHorizon));
    }
    const auto &r = mdp.reward(which);
    // Stage 0: only the immediate reward remains.
    std::vector<double> q(mdp.transitions.rows.size(), 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (mdp.transitions.feasibility[k] > 0.0) {
            q[k] = r.values[k];
        }
    }
    for (std::size_t h = 1; h <= horizon; ++h) {
        q = backup(mdp, r, gamma, state_values(mdp, q));
    }
    QTable out = make_table(mdp, std::move(q));
    out.iterations = horizon;
    out.residual = bellman_residual(mdp, which, gamma, out);
    return out;
}

std::size_t tail_bound_horizon(double gamma, double r_max, double tolerance) {
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("tail bound needs gamma in [0,1)");
    }
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("tolerance must be > 0");
    }
    r_max = std::abs(r_max);
    const auto tail = [&](std::size_t h) {
        return std::pow(gamma, static_cast<double>(h)) * r_max / (1.0 - gamma);
    };
    std::size_t h = 0;
    if (tail(0) > tolerance && gamma > 0.0) {
        const double estimate = std::log(tolerance * (1.0 - gamma) / r_max) / std::log(gamma);
        h = static_cast<std::size_t>(std::max(0.0, std::floor(estimate)));
    }
    while (tail(h) > tolerance) {
        ++h;
    }
    while (h > 0 && tail(h - 1) <= tolerance) {
        --h;
    }
    return h;
}

SolverSettings solver_settings(const SimulationConfig &config) {
    return {config.gamma_short, config.gamma_long, config.tolerance, config.max_iter};
}

DualQTable solve_dual(const CompiledMdp &mdp, const SolverSettings &settings) {
    DualQTable out;
    out.gamma_short = settings.gamma_short;
    out.gamma_long = settings.gamma_long;
    out.q_short = value_iteration(mdp, RewardKind::Short, settings.gamma_short, settings.tolerance,
                                  settings.max_iter);
    out.q_long = value_iteration(mdp, RewardKind::Long, settings.gamma_long, settings.tolerance,
                                 settings.max_iter);
    return out;
}

std::uint64_t fingerprint(const DualQTable &q) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const double v : q.q_short.values) {
        fnv_mix(h, v);
    }
    for (const double v : q.q_long.values) {
        fnv_mix(h, v);
    }
    fnv_mix(h, q.gamma_short);
    fnv_mix(h, q.gamma_long);
    return h;
}

} // namespace capsim
