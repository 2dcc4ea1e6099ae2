#include "mecsim/request.hpp"

#include <cmath>
#include <string>

#include "mecsim/errors.hpp"

namespace mecsim {

void TransitionMatrix::validate() const {
    const int F = num_tasks();
    // F=1 is a degenerate but legal chain (the single-task oracle instance).
    if (F < 1) throw ConfigError("TransitionMatrix: need at least 1 task");
    if (static_cast<int>(favored.size()) != F)
        throw ConfigError("TransitionMatrix: favored size mismatch");
    for (int i = 0; i < F; ++i) {
        if (static_cast<int>(probs[i].size()) != F)
            throw ConfigError("TransitionMatrix: row " + std::to_string(i) + " has wrong length");
        double sum = 0.0;
        for (int j = 0; j < F; ++j) {
            if (!(probs[i][j] >= 0.0) || !(probs[i][j] <= 1.0))
                throw ConfigError("TransitionMatrix: entry (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") outside [0,1]");
            sum += probs[i][j];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ConfigError("TransitionMatrix: row " + std::to_string(i) +
                              " sums to " + std::to_string(sum));
        if (favored[i] < 0 || favored[i] >= F || (F > 1 && favored[i] == i))
            throw ConfigError("TransitionMatrix: favored[" + std::to_string(i) +
                              "] must name a different task");
    }

    // Irreducibility: every task reaches every other along positive edges.
    for (int start = 0; start < F; ++start) {
        std::vector<char> seen(F, 0);
        std::vector<int> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < F; ++j) {
                if (probs[i][j] > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        for (int j = 0; j < F; ++j)
            if (!seen[j])
                throw ConfigError("TransitionMatrix: task " + std::to_string(j) +
                                  " unreachable from task " + std::to_string(start) +
                                  " (chain is reducible)");
    }
}

TransitionMatrix build_chain(int num_tasks, double p_max, Rng& rng) {
    if (num_tasks < 2) throw ConfigError("build_chain: need at least 2 tasks");
    if (!(p_max > 0.0) || !(p_max < 1.0)) throw ConfigError("build_chain: p_max outside (0,1)");

    TransitionMatrix chain;
    chain.probs.assign(num_tasks, std::vector<double>(num_tasks, 0.0));
    chain.favored.assign(num_tasks, -1);

    for (int i = 0; i < num_tasks; ++i) {
        int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_tasks - 1)));
        if (j >= i) ++j; // skip the diagonal
        chain.favored[i] = j;
        chain.probs[i][j] = p_max;

        // Spread the leftover mass over the other tasks (self included)
        // proportionally to |u_k|, u_k ~ U(-1,1). Redraw the row on the
        // measure-zero event that every weight vanishes.
        std::vector<double> weight(num_tasks, 0.0);
        double total = 0.0;
        while (total <= 0.0) {
            total = 0.0;
            for (int k = 0; k < num_tasks; ++k) {
                if (k == j) continue;
                weight[k] = std::abs(rng.uniform(-1.0, 1.0));
                total += weight[k];
            }
        }
        for (int k = 0; k < num_tasks; ++k) {
            if (k == j) continue;
            chain.probs[i][k] = (1.0 - p_max) * weight[k] / total;
        }
    }
    chain.validate();
    return chain;
}

int sample_next(const TransitionMatrix& chain, int current, Rng& rng) {
    const auto& row = chain.probs.at(current);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < row.size(); ++j) {
        acc += row[j];
        if (u < acc) return static_cast<int>(j);
    }
    return static_cast<int>(row.size()) - 1;
}

std::vector<double> limiting_distribution(const TransitionMatrix& chain) {
    chain.validate();
    const int F = chain.num_tasks();
    std::vector<double> p(F, 1.0 / F), next(F, 0.0);

    // Damped iteration p <- p(Q + I)/2 shares the fixed point with p = pQ
    // but also converges for periodic chains.
    for (int iter = 0; iter < 200000; ++iter) {
        for (int j = 0; j < F; ++j) {
            double s = 0.0;
            for (int i = 0; i < F; ++i) s += p[i] * chain.probs[i][j];
            next[j] = 0.5 * (s + p[j]);
        }
        double norm = 0.0;
        for (int j = 0; j < F; ++j) norm += next[j];
        for (int j = 0; j < F; ++j) next[j] /= norm;
        p.swap(next);

        double residual = 0.0;
        for (int j = 0; j < F; ++j) {
            double s = 0.0;
            for (int i = 0; i < F; ++i) s += p[i] * chain.probs[i][j];
            residual += std::abs(s - p[j]);
        }
        if (residual < 1e-12) return p;
    }
    throw NumericalError("limiting_distribution: power iteration did not converge");
}

} // namespace mecsim
