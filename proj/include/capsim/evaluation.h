#pragma once

// Evaluation indicators of a run: capability deprivation and functionings,
// housing/health/registration distributions, expenses by payer and a ledger of
// which values each norm promotes or demotes.
//
// Deprivation is measured on the agents' final states (full resource
// capacity); the per-tick series uses the possible sets recorded at choice
// time. Functionings aggregate over the whole run.

#include "capsim/dynamics.h"
#include "capsim/scenario.h"

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace capsim {

enum class CapabilityStatus : std::uint8_t { Enabled, Deprived, NotModelled };

std::string_view to_string(CapabilityStatus status);

/// Enabled iff some action enabling the capability has feasibility > 0 for
/// the agent in this world.
std::map<CentralCapability, CapabilityStatus>
capability_status(const AgentProfile &agent, const ScenarioSpec &scenario, const WorldState &world);

/// Capabilities enabled by at least one action in the catalog.
std::set<CentralCapability> modelled_capabilities(const ScenarioSpec &scenario);

/// Category name -> share of agents.
using Distribution = std::map<std::string, double>;

struct StateDistributions {
    Distribution health;
    Distribution housing;
    Distribution registration;

    bool operator==(const StateDistributions &) const = default;
};

struct CapabilityMetrics {
    double deprivation_ratio = 0.0;
    double functioning_rate = 0.0;
    std::size_t deprived_agents = 0;
    std::size_t functioning_agents = 0;

    bool operator==(const CapabilityMetrics &) const = default;
};

struct NormLedgerEntry {
    std::string id;
    NormKind kind = NormKind::Legal;
    bool enabled = true;
    std::set<ValueDimension> promotes;
    std::set<ValueDimension> demotes;
    std::size_t activations = 0; // (event, action) pairs where the norm matched

    bool operator==(const NormLedgerEntry &) const = default;
};

struct TickSnapshot {
    std::int64_t tick = 0;
    std::map<CentralCapability, double> deprivation;
    StateDistributions distributions;

    bool operator==(const TickSnapshot &) const = default;
};

struct EquityMetrics {
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t agents = 0;
    std::int64_t horizon = 0;
    std::vector<std::string> actions;
    std::map<CentralCapability, CapabilityMetrics> capabilities; // modelled only
    std::set<CentralCapability> not_modelled;
    StateDistributions final_distributions;
    std::map<Payer, double> expenses;
    std::vector<NormLedgerEntry> norms;
    /// group (registration / housing category) -> capability -> ratio at final tick
    std::map<std::string, std::map<CentralCapability, double>> deprivation_by_registration;
    std::map<std::string, std::map<CentralCapability, double>> deprivation_by_housing;
    std::vector<TickSnapshot> series; // ticks 0..horizon, the last one is final

    bool operator==(const EquityMetrics &) const = default;
};

EquityMetrics compute_metrics(const RunReport &report, const ScenarioSpec &scenario);

enum class Verdict : std::uint8_t { Unchanged, Improved, Regressed, Mixed };

std::string_view to_string(Verdict verdict);

struct CapabilityDelta {
    double deprivation_ratio = 0.0;
    double functioning_rate = 0.0;
    Verdict verdict = Verdict::Unchanged;

    bool operator==(const CapabilityDelta &) const = default;
};

/// Signed deltas b - a.
struct DeltaReport {
    std::map<CentralCapability, CapabilityDelta> capabilities;
    StateDistributions final_distributions;
    std::map<Payer, double> expenses;

    bool operator==(const DeltaReport &) const = default;
};

/// Throws MetricMismatch when the action catalogs or modelled capability sets
/// differ.
DeltaReport compare(const EquityMetrics &a, const EquityMetrics &b);

} // namespace capsim
