#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mecsim {

/// One computable task: remote input data of `input_bits`, output data of
/// `output_bits`, and a workload of `cycles_per_bit` cycles per input bit.
/// The per-slot deadline is shared by all tasks and lives in SystemConfig.
struct TaskSpec {
    std::int64_t input_bits = 16000;
    std::int64_t output_bits = 30000;
    std::int64_t cycles_per_bit = 800;

    bool operator==(const TaskSpec&) const = default;
};

/// Static system parameters of the single-user single-server network.
struct SystemConfig {
    int num_cores = 8;                   // M, device computing cores
    double core_freq = 1.7e8;            // f_D, cycles per second per core
    double switched_capacitance = 1e-19; // mu, energy per cycle scales with mu*(c*f_D)^2
    std::int64_t cache_bits = 40000;     // C, device cache capacity
    double slot_seconds = 0.02;          // tau, slot length == max service delay
    double energy_weight = 1.0;          // lambda in the weighted cost B + lambda*E
    double discount = 0.99;              // gamma
    double reward_scale = 1e-6;          // kappa, reward = -kappa * weighted cost
    std::vector<TaskSpec> tasks;

    int num_tasks() const { return static_cast<int>(tasks.size()); }

    /// Throws ConfigError on non-positive parameters or tasks that cannot be
    /// served within a slot even with all M cores.
    void validate() const;

    /// The simulation defaults: M=8, F=4 identical tasks, tau=0.02 s,
    /// f_D=1.7e8, mu=1e-19, C=40000, lambda=1, gamma=0.99, kappa=1e-6.
    static SystemConfig defaults();

    bool operator==(const SystemConfig&) const = default;
};

/// Per-task bits recording whether input/output data are held in the device
/// cache. Valid states satisfy sum_f I_f*S^I_f + O_f*S^O_f <= C.
struct CacheState {
    std::vector<std::uint8_t> input_cached;
    std::vector<std::uint8_t> output_cached;

    static CacheState empty(int num_tasks) {
        return CacheState{std::vector<std::uint8_t>(num_tasks, 0),
                          std::vector<std::uint8_t>(num_tasks, 0)};
    }

    std::int64_t used_bits(const SystemConfig& cfg) const;
    bool fits(const SystemConfig& cfg) const { return used_bits(cfg) <= cfg.cache_bits; }

    bool operator==(const CacheState&) const = default;
};

/// MDP state: the requested task (0-based index) plus the cache state.
struct SystemState {
    int request = 0;
    CacheState cache;

    bool operator==(const SystemState&) const = default;
};

/// MDP action: cores allocated to the requested task, per-task push bits,
/// and per-task cache deltas in {-1, 0, +1}. Cores for non-requested tasks
/// are identically zero and therefore not represented.
struct SystemAction {
    int reactive_cores = 0;
    std::vector<std::uint8_t> push;
    std::vector<std::int8_t> delta_input;
    std::vector<std::int8_t> delta_output;

    static SystemAction zero(int num_tasks) {
        return SystemAction{0, std::vector<std::uint8_t>(num_tasks, 0),
                            std::vector<std::int8_t>(num_tasks, 0),
                            std::vector<std::int8_t>(num_tasks, 0)};
    }

    bool operator==(const SystemAction&) const = default;
};

/// Per-slot cost split. weighted = reactive + proactive bandwidth
/// + energy_weight * energy.
struct CostBreakdown {
    double reactive_bandwidth = 0.0;  // B^R, bits/s
    double proactive_bandwidth = 0.0; // B^P, bits/s
    double energy = 0.0;              // E = E^R
    double weighted = 0.0;            // B + lambda*E

    double bandwidth() const { return reactive_bandwidth + proactive_bandwidth; }
};

/// Restriction of the action space for the algorithm variants:
/// PTDFC = full space, DFC disables pushing, DFNC disables pushing and
/// caching. allow_core_choice=false pins cores at round(0.75*M).
struct ActionMask {
    bool allow_push = true;
    bool allow_cache = true;
    bool allow_core_choice = true;

    static ActionMask ptdfc() { return {true, true, true}; }
    static ActionMask dfc() { return {false, true, true}; }
    static ActionMask dfnc() { return {false, false, true}; }

    bool operator==(const ActionMask&) const = default;
};

std::string to_string(const SystemState& state);
std::string to_string(const SystemAction& action);

} // namespace mecsim
