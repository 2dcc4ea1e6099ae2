#pragma once

#include <cstdint>
#include <vector>

#include "mecsim/request.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

/// Dense index over (request, cache) pairs whose cache respects capacity.
/// Cache bit packing: input of task f is bit f, output of task f is bit F+f.
class StateSpace {
  public:
    explicit StateSpace(const SystemConfig& cfg);

    int num_states() const { return num_tasks_ * num_caches(); }
    int num_caches() const { return static_cast<int>(cache_codes_.size()); }

    int cache_index(const CacheState& cache) const; // -1 when over capacity
    int state_index(const SystemState& state) const;
    CacheState cache(int cache_idx) const;
    SystemState state(int state_idx) const;

  private:
    int num_tasks_;
    std::vector<std::uint32_t> cache_codes_; // valid codes, ascending
    std::vector<int> code_to_index_;         // 4^F entries, -1 = invalid
};

struct ValueIterationResult {
    std::vector<double> values;       // indexed by StateSpace::state_index
    std::vector<SystemAction> policy; // greedy minimizer per state
    double stationary_start_cost = 0.0; // E over the limiting request of
                                        // V(request, empty cache)
    int sweeps = 0;
    double residual = 0.0;
};

/// Solves min E[sum_t gamma^t weighted_cost] by synchronous value iteration
/// from V = 0 (values rise monotonically toward the fixed point) down to a
/// sup-norm residual below `tol`. The action space per state is the full
/// valid set under the mask; per state only the cheapest action reaching
/// each successor cache matters, which keeps the sweep tables tiny. Refuses
/// instances with more than 3 tasks.
ValueIterationResult exact_value_iteration(const SystemConfig& cfg, const TransitionMatrix& chain,
                                           const ActionMask& mask, double tol = 1e-9,
                                           int max_sweeps = 200000);

} // namespace mecsim
