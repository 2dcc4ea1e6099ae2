#include "mecsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"

namespace mecsim {

void RecencyFrequencyBook::record(int task, std::int64_t slot) {
    if (task < 0 || task >= static_cast<int>(last_used.size()))
        throw std::out_of_range("RecencyFrequencyBook::record: task out of range");
    if (slot < last_used[task])
        throw std::logic_error("RecencyFrequencyBook::record: slots must not go backwards");
    last_used[task] = slot;
    ++use_count[task];
}

namespace {

enum class Flavor { Recency, Frequency };

// Larger key = better push candidate; smaller key = earlier eviction.
std::int64_t rank(const RecencyFrequencyBook& book, Flavor flavor, int task) {
    return flavor == Flavor::Recency ? book.last_used[task] : book.use_count[task];
}

SystemAction heuristic_policy(const SystemState& state, const RecencyFrequencyBook& book,
                              const SystemConfig& cfg, Flavor flavor) {
    const int F = cfg.num_tasks();
    const int a = state.request;
    const auto& S_in = state.cache.input_cached;
    const auto& S_out = state.cache.output_cached;
    SystemAction act = SystemAction::zero(F);

    if (!S_out[a]) {
        const int fixed = static_cast<int>(std::lround(0.75 * cfg.num_cores));
        act.reactive_cores = std::max(fixed, min_workable_cores(cfg.tasks[a], cfg, S_in[a] != 0));
    }

    // Push the best-ranked task that was used at least once, holds no data,
    // and is not the one being served right now. Ties go to the lower index.
    int push = -1;
    for (int f = 0; f < F; ++f) {
        if (f == a || S_in[f] || S_out[f]) continue;
        if (book.last_used[f] < 0) continue;
        if (push < 0 || rank(book, flavor, f) > rank(book, flavor, push)) push = f;
    }

    std::int64_t used = state.cache.used_bits(cfg);
    if (push >= 0) {
        // Make room with worst-ranked-first evictions; give up on the push
        // if even a fully emptied cache cannot take the input.
        struct Item {
            std::int64_t key;
            int task;
            bool is_input;
        };
        std::vector<Item> cached;
        for (int f = 0; f < F; ++f) {
            if (S_in[f]) cached.push_back({rank(book, flavor, f), f, true});
            if (S_out[f]) cached.push_back({rank(book, flavor, f), f, false});
        }
        std::stable_sort(cached.begin(), cached.end(),
                         [](const Item& x, const Item& y) { return x.key < y.key; });
        std::int64_t after = used + cfg.tasks[push].input_bits;
        std::size_t next_victim = 0;
        while (after > cfg.cache_bits && next_victim < cached.size()) {
            const Item& v = cached[next_victim++];
            if (v.is_input) {
                act.delta_input[v.task] = -1;
                after -= cfg.tasks[v.task].input_bits;
            } else {
                act.delta_output[v.task] = -1;
                after -= cfg.tasks[v.task].output_bits;
            }
        }
        if (after <= cfg.cache_bits) {
            act.push[push] = 1;
            act.delta_input[push] = 1;
            used = after;
        } else {
            for (int f = 0; f < F; ++f) {
                act.delta_input[f] = 0;
                act.delta_output[f] = 0;
            }
        }
    }

    // Free ride: keep the reactively downloaded input when it fits as-is.
    if (!S_out[a] && !S_in[a] && act.reactive_cores > 0 &&
        used + cfg.tasks[a].input_bits <= cfg.cache_bits)
        act.delta_input[a] = 1;

    const ValidationResult check = validate_action(state, act, cfg);
    if (!check)
        throw std::logic_error("heuristic_policy: produced an invalid action (" +
                               check.message() + ")");
    return act;
}

} // namespace

SystemAction mru_lru_policy(const SystemState& state, const RecencyFrequencyBook& book,
                            const SystemConfig& cfg) {
    return heuristic_policy(state, book, cfg, Flavor::Recency);
}

SystemAction mfu_lfu_policy(const SystemState& state, const RecencyFrequencyBook& book,
                            const SystemConfig& cfg) {
    return heuristic_policy(state, book, cfg, Flavor::Frequency);
}

} // namespace mecsim
