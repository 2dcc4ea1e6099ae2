#include "mecsim/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"

namespace mecsim {

StateSpace::StateSpace(const SystemConfig& cfg) : num_tasks_(cfg.num_tasks()) {
    const int F = num_tasks_;
    const std::uint32_t codes = 1u << (2 * F);
    code_to_index_.assign(codes, -1);
    for (std::uint32_t code = 0; code < codes; ++code) {
        std::int64_t bits = 0;
        for (int f = 0; f < F; ++f) {
            if (code & (1u << f)) bits += cfg.tasks[f].input_bits;
            if (code & (1u << (F + f))) bits += cfg.tasks[f].output_bits;
        }
        if (bits <= cfg.cache_bits) {
            code_to_index_[code] = static_cast<int>(cache_codes_.size());
            cache_codes_.push_back(code);
        }
    }
}

int StateSpace::cache_index(const CacheState& cache) const {
    const int F = num_tasks_;
    std::uint32_t code = 0;
    for (int f = 0; f < F; ++f) {
        if (cache.input_cached[f]) code |= 1u << f;
        if (cache.output_cached[f]) code |= 1u << (F + f);
    }
    return code_to_index_[code];
}

int StateSpace::state_index(const SystemState& state) const {
    const int c = cache_index(state.cache);
    if (c < 0) throw ConfigError("StateSpace: cache over capacity");
    return state.request * num_caches() + c;
}

CacheState StateSpace::cache(int cache_idx) const {
    const int F = num_tasks_;
    const std::uint32_t code = cache_codes_.at(cache_idx);
    CacheState cache = CacheState::empty(F);
    for (int f = 0; f < F; ++f) {
        cache.input_cached[f] = (code >> f) & 1u;
        cache.output_cached[f] = (code >> (F + f)) & 1u;
    }
    return cache;
}

SystemState StateSpace::state(int state_idx) const {
    return SystemState{state_idx / num_caches(), cache(state_idx % num_caches())};
}

namespace {

// Per state, only the cheapest action reaching each successor cache can be
// optimal; everything else is dominated regardless of V.
struct Reachable {
    std::vector<double> cost;         // per successor cache index, +inf = unreachable
    std::vector<SystemAction> action; // argmin alongside
};

Reachable enumerate_state(const SystemState& state, const SystemConfig& cfg,
                          const ActionMask& mask, const StateSpace& space) {
    const int F = cfg.num_tasks();
    const int a = state.request;
    const auto& S_in = state.cache.input_cached;
    const auto& S_out = state.cache.output_cached;

    Reachable out;
    out.cost.assign(space.num_caches(), std::numeric_limits<double>::infinity());
    out.action.resize(space.num_caches());

    std::vector<int> cores_options;
    if (S_out[a]) {
        cores_options.push_back(0);
    } else {
        const int lo = min_workable_cores(cfg.tasks[a], cfg, S_in[a] != 0);
        if (mask.allow_core_choice) {
            for (int c = lo; c <= cfg.num_cores; ++c) cores_options.push_back(c);
        } else {
            cores_options.push_back(
                std::max(lo, static_cast<int>(std::lround(0.75 * cfg.num_cores))));
        }
    }

    const std::uint32_t push_sets = mask.allow_push ? (1u << F) : 1u;
    SystemAction act = SystemAction::zero(F);

    for (int cores : cores_options) {
        act.reactive_cores = cores;
        const ReactiveCost rc = reactive_cost(state, cores, cfg);
        for (std::uint32_t pushes = 0; pushes < push_sets; ++pushes) {
            double proactive = 0.0;
            for (int f = 0; f < F; ++f) {
                act.push[f] = (pushes >> f) & 1u;
                if (act.push[f]) proactive += static_cast<double>(cfg.tasks[f].input_bits);
            }
            proactive /= cfg.slot_seconds;
            const double cost =
                rc.bandwidth + proactive + cfg.energy_weight * rc.energy;

            // Odometer over the per-task delta ranges of Eqs. (8) and (9).
            std::vector<int> din_lo(F), din_hi(F), dout_lo(F), dout_hi(F);
            for (int f = 0; f < F; ++f) {
                const bool transmitted = act.push[f] != 0 || (f == a && cores > 0);
                const bool computed = f == a && cores > 0;
                if (mask.allow_cache) {
                    din_lo[f] = -int(S_in[f]);
                    din_hi[f] = std::min(transmitted ? 1 : 0, 1 - int(S_in[f]));
                    dout_lo[f] = -int(S_out[f]);
                    dout_hi[f] = std::min(computed ? 1 : 0, 1 - int(S_out[f]));
                } else {
                    din_lo[f] = din_hi[f] = dout_lo[f] = dout_hi[f] = 0;
                }
                act.delta_input[f] = static_cast<std::int8_t>(din_lo[f]);
                act.delta_output[f] = static_cast<std::int8_t>(dout_lo[f]);
            }

            bool done = false;
            while (!done) {
                std::int64_t bits = 0;
                CacheState next = CacheState::empty(F);
                for (int f = 0; f < F; ++f) {
                    next.input_cached[f] =
                        static_cast<std::uint8_t>(int(S_in[f]) + act.delta_input[f]);
                    next.output_cached[f] =
                        static_cast<std::uint8_t>(int(S_out[f]) + act.delta_output[f]);
                    if (next.input_cached[f]) bits += cfg.tasks[f].input_bits;
                    if (next.output_cached[f]) bits += cfg.tasks[f].output_bits;
                }
                if (bits <= cfg.cache_bits) {
                    const int idx = space.cache_index(next);
                    if (cost < out.cost[idx]) {
                        out.cost[idx] = cost;
                        out.action[idx] = act;
                    }
                }
                // advance the odometer: input delta of task f, then output
                done = true;
                for (int d = 0; d < 2 * F; ++d) {
                    const int f = d / 2;
                    auto& slot = (d % 2 == 0) ? act.delta_input[f] : act.delta_output[f];
                    const int hi = (d % 2 == 0) ? din_hi[f] : dout_hi[f];
                    const int lo = (d % 2 == 0) ? din_lo[f] : dout_lo[f];
                    if (slot < hi) {
                        ++slot;
                        done = false;
                        break;
                    }
                    slot = static_cast<std::int8_t>(lo);
                }
            }
        }
    }
    return out;
}

} // namespace

ValueIterationResult exact_value_iteration(const SystemConfig& cfg, const TransitionMatrix& chain,
                                           const ActionMask& mask, double tol, int max_sweeps) {
    cfg.validate();
    chain.validate();
    const int F = cfg.num_tasks();
    if (chain.num_tasks() != F)
        throw ConfigError("exact_value_iteration: chain size does not match task count");
    if (F > 3) {
        const double states = F * std::pow(4.0, F);
        const double actions =
            (cfg.num_cores + 1) * std::pow(2.0, F) * std::pow(3.0, 2 * F);
        throw ConfigError("exact_value_iteration: refusing F=" + std::to_string(F) +
                          " (about " + std::to_string(static_cast<long long>(states)) +
                          " states x " + std::to_string(static_cast<long long>(actions)) +
                          " actions per state); supported up to F=3");
    }

    const StateSpace space(cfg);
    const int S = space.num_states();
    const int NC = space.num_caches();

    std::vector<Reachable> table;
    table.reserve(S);
    for (int s = 0; s < S; ++s)
        table.push_back(enumerate_state(space.state(s), cfg, mask, space));

    ValueIterationResult result;
    result.values.assign(S, 0.0);
    std::vector<double> next_values(S, 0.0);
    // W[a][c'] = sum_j q(a,j) V(j, c'), shared by every action landing in c'.
    std::vector<double> expect(static_cast<std::size_t>(F) * NC, 0.0);

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int aa = 0; aa < F; ++aa)
            for (int c = 0; c < NC; ++c) {
                double w = 0.0;
                for (int j = 0; j < F; ++j)
                    w += chain.probs[aa][j] * result.values[j * NC + c];
                expect[static_cast<std::size_t>(aa) * NC + c] = w;
            }
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            const int aa = s / NC;
            const Reachable& r = table[s];
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < NC; ++c) {
                if (!std::isfinite(r.cost[c])) continue;
                best = std::min(best,
                                r.cost[c] + cfg.discount *
                                                expect[static_cast<std::size_t>(aa) * NC + c]);
            }
            next_values[s] = best;
            residual = std::max(residual, std::abs(best - result.values[s]));
        }
        result.values.swap(next_values);
        result.sweeps = sweep;
        result.residual = residual;
        if (residual < tol) break;
    }
    if (result.residual >= tol)
        throw NumericalError("exact_value_iteration: residual " +
                             std::to_string(result.residual) + " after " +
                             std::to_string(result.sweeps) + " sweeps");

    // refresh the expectations so the greedy extraction sees the final table
    for (int aa = 0; aa < F; ++aa)
        for (int c = 0; c < NC; ++c) {
            double w = 0.0;
            for (int j = 0; j < F; ++j) w += chain.probs[aa][j] * result.values[j * NC + c];
            expect[static_cast<std::size_t>(aa) * NC + c] = w;
        }

    result.policy.resize(S);
    for (int s = 0; s < S; ++s) {
        const int aa = s / NC;
        const Reachable& r = table[s];
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < NC; ++c) {
            if (!std::isfinite(r.cost[c])) continue;
            const double v =
                r.cost[c] + cfg.discount * expect[static_cast<std::size_t>(aa) * NC + c];
            if (v < best) {
                best = v;
                result.policy[s] = r.action[c];
            }
        }
    }

    const std::vector<double> p = limiting_distribution(chain);
    const int empty_idx = space.cache_index(CacheState::empty(F));
    for (int f = 0; f < F; ++f)
        result.stationary_start_cost += p[f] * result.values[f * NC + empty_idx];
    return result;
}

} // namespace mecsim
