#include "mecsim/types.hpp"

#include <cmath>
#include <sstream>

#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"

namespace mecsim {

void SystemConfig::validate() const {
    std::ostringstream why;
    if (num_cores < 1) why << "num_cores must be >= 1; ";
    if (!(core_freq > 0)) why << "core_freq must be positive; ";
    if (!(switched_capacitance > 0)) why << "switched_capacitance must be positive; ";
    if (cache_bits < 0) why << "cache_bits must be non-negative; ";
    if (!(slot_seconds > 0)) why << "slot_seconds must be positive; ";
    if (energy_weight < 0) why << "energy_weight must be non-negative; ";
    if (!(discount >= 0 && discount < 1)) why << "discount must be in [0,1); ";
    if (!(reward_scale > 0)) why << "reward_scale must be positive; ";
    if (tasks.empty()) why << "at least one task required; ";
    if (!why.str().empty()) throw ConfigError("SystemConfig: " + why.str());

    for (std::size_t f = 0; f < tasks.size(); ++f) {
        const TaskSpec& t = tasks[f];
        if (t.input_bits <= 0 || t.output_bits <= 0 || t.cycles_per_bit <= 0)
            throw ConfigError("task " + std::to_string(f) + ": bits and cycles must be positive");
        const double workload = static_cast<double>(t.input_bits) * t.cycles_per_bit;
        if (workload / slot_seconds > num_cores * core_freq)
            throw ConfigError("task " + std::to_string(f) +
                              ": workload exceeds M*f_D within one slot (infeasible)");
        // A task must also be servable from an empty cache, which requires a
        // strictly positive transmission-time budget at some c <= M.
        if (!(slot_seconds - workload / (num_cores * core_freq) > 0))
            throw ConfigError("task " + std::to_string(f) +
                              ": no core count leaves time to download the input "
                              "(I*w == tau*M*f_D)");
    }
}

SystemConfig SystemConfig::defaults() {
    SystemConfig cfg;
    cfg.tasks.assign(4, TaskSpec{});
    return cfg;
}

std::int64_t CacheState::used_bits(const SystemConfig& cfg) const {
    std::int64_t used = 0;
    for (std::size_t f = 0; f < cfg.tasks.size(); ++f) {
        if (f < input_cached.size() && input_cached[f]) used += cfg.tasks[f].input_bits;
        if (f < output_cached.size() && output_cached[f]) used += cfg.tasks[f].output_bits;
    }
    return used;
}

std::string to_string(const SystemState& state) {
    std::ostringstream os;
    os << "request=" << state.request << " input=[";
    for (std::size_t f = 0; f < state.cache.input_cached.size(); ++f)
        os << (f ? "," : "") << int(state.cache.input_cached[f]);
    os << "] output=[";
    for (std::size_t f = 0; f < state.cache.output_cached.size(); ++f)
        os << (f ? "," : "") << int(state.cache.output_cached[f]);
    os << "]";
    return os.str();
}

std::string to_string(const SystemAction& action) {
    std::ostringstream os;
    os << "cores=" << action.reactive_cores << " push=[";
    for (std::size_t f = 0; f < action.push.size(); ++f) os << (f ? "," : "") << int(action.push[f]);
    os << "] d_in=[";
    for (std::size_t f = 0; f < action.delta_input.size(); ++f)
        os << (f ? "," : "") << int(action.delta_input[f]);
    os << "] d_out=[";
    for (std::size_t f = 0; f < action.delta_output.size(); ++f)
        os << (f ? "," : "") << int(action.delta_output[f]);
    os << "]";
    return os.str();
}

} // namespace mecsim
