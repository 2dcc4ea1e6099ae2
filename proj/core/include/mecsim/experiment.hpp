#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mecsim/config_io.hpp"
#include "mecsim/env.hpp"
#include "mecsim/metrics.hpp"
#include "mecsim/request.hpp"

namespace mecsim {

/// ptdfc -> full action space, dfc -> no pushing, dfnc -> neither pushing
/// nor caching; heuristics and the oracle get the full mask.
ActionMask mask_for_algo(const std::string& algo);
bool algo_uses_sac(const std::string& algo);

struct EvalStats {
    double reward = 0.0;
    double transmission = 0.0; // B^R + B^P per-slot mean
    double computation = 0.0;  // E per-slot mean
    double weighted = 0.0;     // transmission + energy_weight * computation
};

using PolicyFn = std::function<SystemAction(const SystemState&)>;

/// Deterministic rollout of `steps` slots from a fresh reset; per-slot cost
/// means. The policy may carry mutable state (heuristic bookkeeping).
EvalStats evaluate_policy(const SystemConfig& cfg, const TransitionMatrix& chain,
                          const PolicyFn& policy, int steps, std::uint64_t rng_seed);

/// One replica at a fixed system config. SAC algorithms train with periodic
/// deterministic evaluations and early-stop on a converged test reward;
/// heuristics and the oracle emit a single epoch-0 row. A diverged replica
/// contributes one all-NaN row and does not abort the experiment.
std::vector<MetricsRow> run_replica(const ExperimentSpec& spec, const SystemConfig& system,
                                    std::uint64_t seed, const std::string& sweep_var,
                                    double sweep_value);

/// Every sweep value x every seed, rows in that order. Replicas are
/// shared-nothing and run on a small worker pool; output is identical
/// regardless of scheduling.
std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec);

} // namespace mecsim
