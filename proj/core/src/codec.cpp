#include "mecsim/codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"

namespace mecsim {

EncodedState encode_state(const SystemState& state) {
    const int F = static_cast<int>(state.cache.input_cached.size());
    EncodedState x(3 * F, -1.0);
    x[state.request] = 1.0;
    for (int f = 0; f < F; ++f) {
        if (state.cache.input_cached[f]) x[F + f] = 1.0;
        if (state.cache.output_cached[f]) x[2 * F + f] = 1.0;
    }
    return x;
}

SystemState decode_state(const EncodedState& encoded) {
    if (encoded.size() % 3 != 0 || encoded.empty())
        throw InvalidActionError("decode_state: length must be 3F");
    const int F = static_cast<int>(encoded.size()) / 3;
    SystemState state;
    state.cache = CacheState::empty(F);
    int positives = 0;
    for (int f = 0; f < F; ++f) {
        if (encoded[f] > 0.0) {
            state.request = f;
            ++positives;
        }
        state.cache.input_cached[f] = encoded[F + f] > 0.0 ? 1 : 0;
        state.cache.output_cached[f] = encoded[2 * F + f] > 0.0 ? 1 : 0;
    }
    if (positives != 1)
        throw InvalidActionError("decode_state: request block must hold exactly one +1, got " +
                                 std::to_string(positives));
    return state;
}

int quantize_component(double eta, int set_min, int set_max) {
    if (set_max <= set_min) return set_min;
    const double step = double(set_max - set_min) / double(set_max - set_min + 1);
    const int k = static_cast<int>(std::floor((eta - set_min) / step));
    return std::clamp(set_min + k, set_min, set_max);
}

namespace {

// RawAction layout: [0] cores, [1..F] push, [1+F..2F] input deltas,
// [1+2F..3F] output deltas.
double raw_cores(const RawAction& r) { return r[0]; }
double raw_push(const RawAction& r, int /*F*/, int f) { return r[1 + f]; }
double raw_din(const RawAction& r, int F, int f) { return r[1 + F + f]; }
double raw_dout(const RawAction& r, int F, int f) { return r[1 + 2 * F + f]; }

template <typename T>
T clamp_delta(T v, int lo, int hi) {
    return static_cast<T>(std::clamp(int(v), lo, hi));
}

} // namespace

SystemAction quantize(const RawAction& raw, const SystemState& state, const SystemConfig& cfg) {
    (void)state; // state-dependent bounds are handled by correct()
    const int F = cfg.num_tasks();
    if (static_cast<int>(raw.size()) != raw_action_dim(F))
        throw InvalidActionError("quantize: raw action must have length 1+3F");

    SystemAction act = SystemAction::zero(F);
    const double cores_nat = (raw_cores(raw) + 1.0) * 0.5 * cfg.num_cores;
    act.reactive_cores = quantize_component(cores_nat, 0, cfg.num_cores);
    for (int f = 0; f < F; ++f) {
        const double push_nat = (raw_push(raw, F, f) + 1.0) * 0.5;
        act.push[f] = static_cast<std::uint8_t>(quantize_component(push_nat, 0, 1));
        act.delta_input[f] =
            static_cast<std::int8_t>(quantize_component(raw_din(raw, F, f), -1, 1));
        act.delta_output[f] =
            static_cast<std::int8_t>(quantize_component(raw_dout(raw, F, f), -1, 1));
    }
    return act;
}

std::string CorrectionTrace::format() const {
    std::ostringstream os;
    for (const Entry& e : entries) {
        os << e.rule << ":\n";
        if (e.notes.empty()) os << "  (no change)\n";
        for (const std::string& n : e.notes) os << "  " << n << "\n";
        os << "  after: " << to_string(e.after) << "\n";
    }
    return os.str();
}

SystemAction correct(const SystemState& state, const SystemAction& quantized,
                     const RawAction& raw, const SystemConfig& cfg, const ActionMask& mask,
                     CorrectionTrace* trace) {
    const int F = cfg.num_tasks();
    if (static_cast<int>(quantized.push.size()) != F ||
        static_cast<int>(quantized.delta_input.size()) != F ||
        static_cast<int>(quantized.delta_output.size()) != F ||
        static_cast<int>(raw.size()) != raw_action_dim(F) ||
        static_cast<int>(state.cache.input_cached.size()) != F ||
        static_cast<int>(state.cache.output_cached.size()) != F || state.request < 0 ||
        state.request >= F)
        throw InvalidActionError("correct: shape mismatch against config");

    SystemAction act = quantized;
    const int a = state.request;
    const auto& S_in = state.cache.input_cached;
    const auto& S_out = state.cache.output_cached;

    std::vector<std::string> notes;
    auto record = [&](const char* rule) {
        if (trace) trace->entries.push_back({rule, act, notes});
        notes.clear();
    };

    if (!mask.allow_push || !mask.allow_cache) {
        for (int f = 0; f < F; ++f) {
            if (act.push[f]) notes.push_back("push disabled: cleared task " + std::to_string(f));
            act.push[f] = 0;
        }
    }
    if (!mask.allow_cache) {
        for (int f = 0; f < F; ++f) {
            if (act.delta_input[f] || act.delta_output[f])
                notes.push_back("cache disabled: froze deltas of task " + std::to_string(f));
            act.delta_input[f] = 0;
            act.delta_output[f] = 0;
        }
    }
    if (!mask.allow_core_choice) {
        act.reactive_cores = static_cast<int>(std::lround(0.75 * cfg.num_cores));
        notes.push_back("cores pinned at 0.75*M = " + std::to_string(act.reactive_cores));
    }
    record("mask");

    // Rule 7, first pass: state-side bounds only. Cannot evict what is not
    // cached, cannot add what already is. The transmission-side upper bound
    // depends on push/cores and is enforced after those are settled.
    for (int f = 0; f < F; ++f) {
        const auto di = clamp_delta(act.delta_input[f], -int(S_in[f]), 1 - int(S_in[f]));
        const auto dv = clamp_delta(act.delta_output[f], -int(S_out[f]), 1 - int(S_out[f]));
        if (di != act.delta_input[f])
            notes.push_back("input delta of task " + std::to_string(f) + " clipped to " +
                            std::to_string(int(di)));
        if (dv != act.delta_output[f])
            notes.push_back("output delta of task " + std::to_string(f) + " clipped to " +
                            std::to_string(int(dv)));
        act.delta_input[f] = di;
        act.delta_output[f] = dv;
    }
    record("rule7-clip");

    // Rule 1: cores floor when serving, zero when the output is cached.
    if (S_out[a]) {
        if (act.reactive_cores != 0)
            notes.push_back("output cached: cores " + std::to_string(act.reactive_cores) +
                            " -> 0");
        act.reactive_cores = 0;
    } else {
        const int floor_cores = min_workable_cores(cfg.tasks[a], cfg, S_in[a] != 0);
        if (act.reactive_cores < floor_cores) {
            notes.push_back("cores raised " + std::to_string(act.reactive_cores) + " -> " +
                            std::to_string(floor_cores));
            act.reactive_cores = floor_cores;
        }
    }
    record("rule1-cores");

    // Rule 2: no pushing a task with any data already cached.
    for (int f = 0; f < F; ++f) {
        if (act.push[f] && (S_in[f] || S_out[f])) {
            act.push[f] = 0;
            notes.push_back("task " + std::to_string(f) + " already cached: push cleared");
        }
    }
    record("rule2-push-cached");

    // Rule 3: at most one push, the surviving bit with the largest raw
    // score. Ties keep the lowest index.
    int pushed = -1;
    double best = 0.0;
    for (int f = 0; f < F; ++f) {
        if (!act.push[f]) continue;
        const double s = raw_push(raw, F, f);
        if (pushed < 0 || s > best) {
            pushed = f;
            best = s;
        }
    }
    for (int f = 0; f < F; ++f) {
        if (act.push[f] && f != pushed) {
            act.push[f] = 0;
            notes.push_back("push of task " + std::to_string(f) + " dropped for task " +
                            std::to_string(pushed));
        }
    }
    record("rule3-single-push");

    // Rule 4: pushed input must be cached.
    if (pushed >= 0 && act.delta_input[pushed] != 1) {
        act.delta_input[pushed] = 1;
        notes.push_back("pushed input of task " + std::to_string(pushed) + " forced into cache");
    }
    record("rule4-push-cache");

    // Deltas as the environment will see them after the final re-clip:
    // additions count only when the data actually moves this slot (pushed,
    // downloaded, or computed). Capacity arithmetic below runs on these.
    const auto transmitted = [&](int f) {
        return act.push[f] != 0 || (f == a && act.reactive_cores > 0);
    };
    const auto eff_din = [&](int f) {
        return clamp_delta(act.delta_input[f], -int(S_in[f]),
                           std::min(transmitted(f) ? 1 : 0, 1 - int(S_in[f])));
    };
    const auto eff_dout = [&](int f) {
        const bool computed = f == a && act.reactive_cores > 0;
        return clamp_delta(act.delta_output[f], -int(S_out[f]),
                           std::min(computed ? 1 : 0, 1 - int(S_out[f])));
    };
    const auto occupancy = [&]() {
        std::int64_t bits = 0;
        for (int f = 0; f < F; ++f) {
            bits += cfg.tasks[f].input_bits * (std::int64_t(S_in[f]) + eff_din(f));
            bits += cfg.tasks[f].output_bits * (std::int64_t(S_out[f]) + eff_dout(f));
        }
        return bits;
    };

    // Rule 6: the requested task's downloaded input / computed output may be
    // cached for free; take whichever fits, preferring the larger raw score
    // (input first on ties).
    if (mask.allow_cache) {
        struct Add {
            double score;
            bool is_input;
        };
        std::vector<Add> adds;
        if (!S_in[a] && transmitted(a) && eff_din(a) < 1)
            adds.push_back({raw_din(raw, F, a), true});
        if (!S_out[a] && act.reactive_cores > 0 && eff_dout(a) < 1)
            adds.push_back({raw_dout(raw, F, a), false});
        std::stable_sort(adds.begin(), adds.end(),
                         [](const Add& x, const Add& y) { return x.score > y.score; });
        for (const Add& add : adds) {
            const std::int64_t bits =
                add.is_input ? cfg.tasks[a].input_bits : cfg.tasks[a].output_bits;
            if (occupancy() + bits > cfg.cache_bits) continue;
            if (add.is_input) {
                act.delta_input[a] = 1;
                notes.push_back("downloaded input of task " + std::to_string(a) + " cached");
            } else {
                act.delta_output[a] = 1;
                notes.push_back("computed output of task " + std::to_string(a) + " cached");
            }
        }
    }
    record("rule6-reactive-add");

    // Rule 5: evict until the post-update cache fits. Candidates are items
    // cached after the tentative update, most-negative raw score first (the
    // items the agent most wanted gone), ties by lower index, inputs before
    // outputs. The pushed input is protected; if it alone cannot fit, the
    // push is cancelled instead.
    if (occupancy() > cfg.cache_bits) {
        struct Evict {
            double score;
            int task;
            bool is_input;
        };
        std::vector<Evict> victims;
        for (int f = 0; f < F; ++f) {
            if (S_in[f] + eff_din(f) == 1 && !(f == pushed))
                victims.push_back({raw_din(raw, F, f), f, true});
            if (S_out[f] + eff_dout(f) == 1)
                victims.push_back({raw_dout(raw, F, f), f, false});
        }
        std::stable_sort(victims.begin(), victims.end(),
                         [](const Evict& x, const Evict& y) { return x.score < y.score; });
        for (const Evict& v : victims) {
            if (occupancy() <= cfg.cache_bits) break;
            if (v.is_input)
                act.delta_input[v.task] = static_cast<std::int8_t>(-int(S_in[v.task]));
            else
                act.delta_output[v.task] = static_cast<std::int8_t>(-int(S_out[v.task]));
            notes.push_back(std::string("evicted ") + (v.is_input ? "input" : "output") +
                            " of task " + std::to_string(v.task));
        }
        if (occupancy() > cfg.cache_bits && pushed >= 0) {
            act.push[pushed] = 0;
            act.delta_input[pushed] = 0;
            notes.push_back("pushed input of task " + std::to_string(pushed) +
                            " cannot fit: push cancelled");
        }
    }
    record("rule5-evict");

    // Rule 7, final pass: materialize the effective deltas.
    for (int f = 0; f < F; ++f) {
        const auto di = eff_din(f);
        const auto dv = eff_dout(f);
        if (di != act.delta_input[f])
            notes.push_back("input delta of task " + std::to_string(f) + " re-clipped to " +
                            std::to_string(int(di)));
        if (dv != act.delta_output[f])
            notes.push_back("output delta of task " + std::to_string(f) + " re-clipped to " +
                            std::to_string(int(dv)));
        act.delta_input[f] = di;
        act.delta_output[f] = dv;
    }
    record("rule7-reclip");

    const ValidationResult check = validate_action(state, act, cfg);
    if (!check)
        throw std::logic_error("correct: postcondition violated (" + check.message() + ") for " +
                               to_string(state) + " " + to_string(act));
    return act;
}

SystemAction raw_to_action(const SystemState& state, const RawAction& raw,
                           const SystemConfig& cfg, const ActionMask& mask,
                           CorrectionTrace* trace) {
    return correct(state, quantize(raw, state, cfg), raw, cfg, mask, trace);
}

} // namespace mecsim
