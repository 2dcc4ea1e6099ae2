#pragma once

#include <cstdint>
#include <vector>

#include "mecsim/types.hpp"

namespace mecsim {

/// Per-task recency and frequency bookkeeping behind the heuristic
/// policies. record() the request of the current slot before asking a
/// policy for its action.
struct RecencyFrequencyBook {
    std::vector<std::int64_t> last_used; // slot index, -1 = never requested
    std::vector<std::int64_t> use_count;

    explicit RecencyFrequencyBook(int num_tasks)
        : last_used(num_tasks, -1), use_count(num_tasks, 0) {}

    void record(int task, std::int64_t slot);
};

/// Reactive service at fixed 0.75*M cores (0 when the output is cached),
/// pushing the input of the most recently used fully uncached task other
/// than the current request, evicting least-recently-used cached items when
/// the pushed input does not fit, and caching the reactively downloaded
/// input when capacity is free. Output caching stays off. The returned
/// action always passes validate_action.
SystemAction mru_lru_policy(const SystemState& state, const RecencyFrequencyBook& book,
                            const SystemConfig& cfg);

/// Frequency twin of mru_lru_policy: pushes the most frequently used
/// candidate and evicts least frequently used items, ties broken by the
/// lower task index.
SystemAction mfu_lfu_policy(const SystemState& state, const RecencyFrequencyBook& book,
                            const SystemConfig& cfg);

} // namespace mecsim
