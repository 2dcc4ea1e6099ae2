#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/sac.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

struct SweepSpec {
    std::string variable; // cache_bits | slot_seconds
    std::vector<double> values;
};

/// Orchestration knobs for the training/evaluation loop. Epochs are
/// steps_per_epoch environment steps; after every eval_every training epochs
/// the policy runs eval_epochs x eval_steps deterministic test steps and
/// logs one metrics row. Training stops early once the convergence_span
/// moving average of the test reward moves by less than convergence_tol
/// (relative) for convergence_windows consecutive evaluation blocks.
struct RunSpec {
    int train_epochs = 200;
    int steps_per_epoch = 1000;
    int eval_every = 10;
    int eval_epochs = 10;
    int eval_steps = 1000;
    double convergence_tol = 0.01;
    int convergence_windows = 5;
    int convergence_span = 10;

    void validate() const;
};

struct ExperimentSpec {
    std::string algo = "ptdfc"; // ptdfc | dfc | dfnc | mru-lru | mfu-lfu | oracle
    std::vector<std::uint64_t> seeds{1};
    std::string out_path = "metrics.csv";
    double p_max = 0.7;
    SystemConfig system = SystemConfig::defaults();
    SacConfig sac;
    RunSpec run;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

/// JSON schema (all keys optional, unknown keys rejected):
/// { "algo": "...", "seeds": [..], "out": "...", "p_max": 0.7,
///   "sweep": {"variable": "cache_bits", "values": [..]},
///   "system": { scalar fields of SystemConfig...,
///               "tasks": [{"input_bits":..,"output_bits":..,"cycles_per_bit":..}]
///               or "num_tasks": N for N default tasks },
///   "sac": { fields of SacConfig... }, "run": { fields of RunSpec... } }
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::string& path);
std::string experiment_to_json(const ExperimentSpec& spec);

} // namespace mecsim
