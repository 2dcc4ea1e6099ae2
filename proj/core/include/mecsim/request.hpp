#pragma once

#include <vector>

#include "mecsim/rng.hpp"

namespace mecsim {

/// First-order request Markov chain over F tasks. Each row has one favored
/// successor carrying probability p_max; the remaining mass is spread over
/// the other tasks proportionally to |u| with u drawn uniformly.
struct TransitionMatrix {
    std::vector<std::vector<double>> probs; // row-stochastic, F x F
    std::vector<int> favored;               // per-row index j with q_{i,j} = p_max

    int num_tasks() const { return static_cast<int>(probs.size()); }

    /// Row-sum, range, and irreducibility checks. Throws ConfigError.
    void validate() const;
};

/// Builds the randomized chain: for each row, one uniformly chosen j != i
/// receives p_max and the rest of the mass goes to the other tasks
/// (including i) proportionally to |u_k|, u_k ~ U(-1, 1). F must be >= 2.
TransitionMatrix build_chain(int num_tasks, double p_max, Rng& rng);

/// Samples the successor of `current` from its row.
int sample_next(const TransitionMatrix& chain, int current, Rng& rng);

/// Limiting distribution p with p = pQ, computed by damped power iteration
/// to an L1 residual below 1e-12. Throws NumericalError on non-convergence.
std::vector<double> limiting_distribution(const TransitionMatrix& chain);

} // namespace mecsim
