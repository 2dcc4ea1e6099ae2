#include "mecsim/env.hpp"

#include <cmath>
#include <sstream>

#include "mecsim/errors.hpp"

namespace mecsim {

namespace {

double workload_cycles(const TaskSpec& task) {
    return static_cast<double>(task.input_bits) * static_cast<double>(task.cycles_per_bit);
}

/// Time left for downloading the input after computing with `cores` cores.
double transmission_budget(const TaskSpec& task, const SystemConfig& cfg, int cores) {
    return cfg.slot_seconds - workload_cycles(task) / (cores * cfg.core_freq);
}

} // namespace

std::string to_string(Constraint c) {
    switch (c) {
        case Constraint::CoreBound: return "core-bound";
        case Constraint::CoreLatency: return "core-latency";
        case Constraint::DeltaInputBound: return "delta-input-bound";
        case Constraint::DeltaOutputBound: return "delta-output-bound";
        case Constraint::Capacity: return "capacity";
        case Constraint::Shape: return "shape";
    }
    return "?";
}

std::string ValidationResult::message() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << to_string(violations[i].which);
        if (violations[i].task >= 0) os << "[task " << violations[i].task << "]";
        os << ": " << violations[i].detail;
    }
    return os.str();
}

int min_cores(const TaskSpec& task, const SystemConfig& cfg) {
    const double ratio = workload_cycles(task) / (cfg.slot_seconds * cfg.core_freq);
    const int c = static_cast<int>(std::ceil(ratio));
    if (c > cfg.num_cores)
        throw ConfigError("task workload infeasible: needs " + std::to_string(c) + " > M cores");
    return c < 1 ? 1 : c;
}

int min_workable_cores(const TaskSpec& task, const SystemConfig& cfg, bool input_cached) {
    int c = min_cores(task, cfg);
    if (!input_cached) {
        while (c <= cfg.num_cores && !(transmission_budget(task, cfg, c) > 0)) ++c;
        if (c > cfg.num_cores)
            throw ConfigError("no core count leaves a positive transmission budget");
    }
    return c;
}

ReactiveCost reactive_cost(const SystemState& state, int cores, const SystemConfig& cfg) {
    const TaskSpec& task = cfg.tasks.at(state.request);
    const bool output_cached = state.cache.output_cached.at(state.request) != 0;
    const bool input_cached = state.cache.input_cached.at(state.request) != 0;

    if (output_cached) return {0.0, 0.0}; // served from cache, Eqs. zeroed by (1 - S^O)

    if (cores < min_cores(task, cfg))
        throw InvalidActionError("reactive_cost: " + std::to_string(cores) +
                                 " cores cannot finish the workload within the slot");

    const double energy = cfg.switched_capacitance * double(cores) * double(cores) *
                          cfg.core_freq * cfg.core_freq * workload_cycles(task);
    if (input_cached) return {0.0, energy};

    const double budget = transmission_budget(task, cfg, cores);
    if (!(budget > 0))
        throw InvalidActionError("reactive_cost: no time left to download the input at " +
                                 std::to_string(cores) + " cores");
    return {static_cast<double>(task.input_bits) / budget, energy};
}

double proactive_cost(const std::vector<std::uint8_t>& push, const SystemConfig& cfg) {
    double bits = 0.0;
    for (std::size_t f = 0; f < push.size(); ++f)
        if (push[f]) bits += static_cast<double>(cfg.tasks.at(f).input_bits);
    return bits / cfg.slot_seconds;
}

ValidationResult validate_action(const SystemState& state, const SystemAction& action,
                                 const SystemConfig& cfg) {
    ValidationResult result;
    const int F = cfg.num_tasks();
    const auto sz = [F](std::size_t n) { return static_cast<int>(n) == F; };
    if (!sz(action.push.size()) || !sz(action.delta_input.size()) ||
        !sz(action.delta_output.size()) || !sz(state.cache.input_cached.size()) ||
        !sz(state.cache.output_cached.size()) || state.request < 0 || state.request >= F) {
        result.violations.push_back({Constraint::Shape, -1, "vector lengths must equal F"});
        return result;
    }

    const int a = state.request;
    const TaskSpec& task = cfg.tasks[a];
    const bool out_cached = state.cache.output_cached[a] != 0;
    const bool in_cached = state.cache.input_cached[a] != 0;
    const int cores = action.reactive_cores;

    if (cores < 0 || cores > cfg.num_cores)
        result.violations.push_back(
            {Constraint::CoreBound, a, "cores outside [0, M]: " + std::to_string(cores)});
    else if (out_cached && cores != 0)
        result.violations.push_back(
            {Constraint::CoreBound, a, "output cached but cores > 0"});
    else if (!out_cached) {
        if (cores < min_cores(task, cfg))
            result.violations.push_back(
                {Constraint::CoreLatency, a,
                 "needs >= " + std::to_string(min_cores(task, cfg)) + " cores, got " +
                     std::to_string(cores)});
        else if (!in_cached && !(transmission_budget(task, cfg, cores) > 0))
            result.violations.push_back(
                {Constraint::CoreLatency, a, "no positive transmission budget at " +
                                                  std::to_string(cores) + " cores"});
    }

    for (int f = 0; f < F; ++f) {
        const bool transmitted = action.push[f] != 0 || (f == a && cores > 0);
        const int in_lo = -int(state.cache.input_cached[f]);
        const int in_hi = std::min(transmitted ? 1 : 0, 1 - int(state.cache.input_cached[f]));
        const int di = action.delta_input[f];
        if (di < in_lo || di > in_hi)
            result.violations.push_back(
                {Constraint::DeltaInputBound, f,
                 "delta " + std::to_string(di) + " outside [" + std::to_string(in_lo) + "," +
                     std::to_string(in_hi) + "]"});

        const bool computed = f == a && cores > 0;
        const int out_lo = -int(state.cache.output_cached[f]);
        const int out_hi = std::min(computed ? 1 : 0, 1 - int(state.cache.output_cached[f]));
        const int dv = action.delta_output[f];
        if (dv < out_lo || dv > out_hi)
            result.violations.push_back(
                {Constraint::DeltaOutputBound, f,
                 "delta " + std::to_string(dv) + " outside [" + std::to_string(out_lo) + "," +
                     std::to_string(out_hi) + "]"});
    }

    std::int64_t post_bits = 0;
    for (int f = 0; f < F; ++f) {
        post_bits += cfg.tasks[f].input_bits *
                     (std::int64_t(state.cache.input_cached[f]) + action.delta_input[f]);
        post_bits += cfg.tasks[f].output_bits *
                     (std::int64_t(state.cache.output_cached[f]) + action.delta_output[f]);
    }
    if (post_bits > cfg.cache_bits)
        result.violations.push_back(
            {Constraint::Capacity, -1,
             "post-update cache " + std::to_string(post_bits) + " bits > C = " +
                 std::to_string(cfg.cache_bits)});
    return result;
}

CacheState apply_cache_update(const CacheState& cache, const SystemAction& action) {
    CacheState next = cache;
    for (std::size_t f = 0; f < next.input_cached.size(); ++f) {
        const int in_bit = int(next.input_cached[f]) + action.delta_input.at(f);
        const int out_bit = int(next.output_cached[f]) + action.delta_output.at(f);
        if (in_bit < 0 || in_bit > 1 || out_bit < 0 || out_bit > 1)
            throw std::logic_error("apply_cache_update: unvalidated action drove a cache bit "
                                   "outside {0,1} at task " +
                                   std::to_string(f));
        next.input_cached[f] = static_cast<std::uint8_t>(in_bit);
        next.output_cached[f] = static_cast<std::uint8_t>(out_bit);
    }
    return next;
}

CostBreakdown action_cost(const SystemState& state, const SystemAction& action,
                          const SystemConfig& cfg) {
    CostBreakdown cost;
    const ReactiveCost reactive = reactive_cost(state, action.reactive_cores, cfg);
    cost.reactive_bandwidth = reactive.bandwidth;
    cost.energy = reactive.energy;
    cost.proactive_bandwidth = proactive_cost(action.push, cfg);
    cost.weighted = cost.reactive_bandwidth + cost.proactive_bandwidth +
                    cfg.energy_weight * cost.energy;
    return cost;
}

StepResult step(const SystemState& state, const SystemAction& action, int next_request,
                const SystemConfig& cfg) {
    if (next_request < 0 || next_request >= cfg.num_tasks())
        throw InvalidActionError("step: next_request out of range");
    const ValidationResult check = validate_action(state, action, cfg);
    if (!check)
        throw InvalidActionError("step: invalid action (" + check.message() +
                                 "); run the codec correction first");

    StepResult result;
    result.cost = action_cost(state, action, cfg);
    result.reward = -cfg.reward_scale * result.cost.weighted;
    result.next.request = next_request;
    result.next.cache = apply_cache_update(state.cache, action);
    return result;
}

Environment::Environment(SystemConfig cfg, TransitionMatrix chain, CacheState initial_cache)
    : cfg_(std::move(cfg)), chain_(std::move(chain)), initial_cache_(std::move(initial_cache)) {
    cfg_.validate();
    chain_.validate();
    if (chain_.num_tasks() != cfg_.num_tasks())
        throw ConfigError("Environment: chain size does not match the task count");
    if (initial_cache_.input_cached.empty())
        initial_cache_ = CacheState::empty(cfg_.num_tasks());
    if (!initial_cache_.fits(cfg_))
        throw ConfigError("Environment: initial cache exceeds capacity");
    limiting_ = limiting_distribution(chain_);
    state_ = SystemState{0, initial_cache_};
}

void Environment::reset(Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    int request = chain_.num_tasks() - 1;
    for (int f = 0; f < chain_.num_tasks(); ++f) {
        acc += limiting_[f];
        if (u < acc) {
            request = f;
            break;
        }
    }
    state_ = SystemState{request, initial_cache_};
}

StepResult Environment::step(const SystemAction& action, Rng& rng) {
    const int next_request = sample_next(chain_, state_.request, rng);
    StepResult result = mecsim::step(state_, action, next_request, cfg_);
    state_ = result.next;
    return result;
}

} // namespace mecsim
