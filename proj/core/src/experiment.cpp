#include "mecsim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <memory>
#include <thread>
#include <utility>

#include "mecsim/baselines.hpp"
#include "mecsim/codec.hpp"
#include "mecsim/errors.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/sac.hpp"
#include "mecsim/value_iteration.hpp"

namespace mecsim {
namespace {

// Seed stream tags so every consumer of randomness inside a replica draws
// from an independent generator. Shared by train and eval code paths.
constexpr std::uint64_t kStreamChain = 100;
constexpr std::uint64_t kStreamBaselineEval = 200;
constexpr std::uint64_t kStreamAgent = 300;
constexpr std::uint64_t kStreamTrainEnv = 400;
constexpr std::uint64_t kStreamEvalBase = 500;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

MetricsRow make_row(const ExperimentSpec& spec, std::uint64_t seed,
                    const std::string& sweep_var, double sweep_value, std::int64_t epoch,
                    const EvalStats& st) {
    MetricsRow row;
    row.algo = spec.algo;
    row.seed = seed;
    row.sweep_var = sweep_var;
    row.sweep_value = sweep_value;
    row.epoch = epoch;
    row.mean_test_reward = st.reward;
    row.mean_transmission_cost = st.transmission;
    row.mean_computation_cost = st.computation;
    row.mean_weighted_cost = st.weighted;
    return row;
}

std::vector<MetricsRow> run_baseline_replica(const ExperimentSpec& spec,
                                             const SystemConfig& system,
                                             const TransitionMatrix& chain, std::uint64_t seed,
                                             const std::string& sweep_var, double sweep_value) {
    const int num_tasks = static_cast<int>(system.tasks.size());
    const bool frequency = spec.algo == "mfu-lfu";

    auto book = std::make_shared<RecencyFrequencyBook>(num_tasks);
    auto slot = std::make_shared<std::int64_t>(0);
    PolicyFn policy = [&system, book, slot, frequency](const SystemState& state) {
        book->record(state.request, (*slot)++);
        return frequency ? mfu_lfu_policy(state, *book, system)
                         : mru_lru_policy(state, *book, system);
    };

    const int steps = spec.run.eval_epochs * spec.run.eval_steps;
    const EvalStats st =
        evaluate_policy(system, chain, policy, steps, derive_seed(seed, kStreamBaselineEval));
    return {make_row(spec, seed, sweep_var, sweep_value, 0, st)};
}

std::vector<MetricsRow> run_oracle_replica(const ExperimentSpec& spec, const SystemConfig& system,
                                           const TransitionMatrix& chain, std::uint64_t seed,
                                           const std::string& sweep_var, double sweep_value) {
    const ValueIterationResult vi = exact_value_iteration(system, chain, ActionMask::ptdfc());
    const StateSpace space(system);
    PolicyFn policy = [&vi, &space](const SystemState& state) {
        return vi.policy[space.state_index(state)];
    };

    const int steps = spec.run.eval_epochs * spec.run.eval_steps;
    const EvalStats st =
        evaluate_policy(system, chain, policy, steps, derive_seed(seed, kStreamBaselineEval));
    return {make_row(spec, seed, sweep_var, sweep_value, 0, st)};
}

std::vector<MetricsRow> run_sac_replica(const ExperimentSpec& spec, const SystemConfig& system,
                                        const TransitionMatrix& chain, std::uint64_t seed,
                                        const std::string& sweep_var, double sweep_value) {
    const int num_tasks = static_cast<int>(system.tasks.size());
    const ActionMask mask = mask_for_algo(spec.algo);
    const RunSpec& run = spec.run;

    SacConfig sac = spec.sac;
    sac.discount = system.discount;
    SacAgent agent(num_tasks, sac, derive_seed(seed, kStreamAgent));

    std::vector<MetricsRow> rows;
    int eval_index = 0;
    auto evaluate_now = [&](std::int64_t epoch) {
        PolicyFn policy = [&agent, &system, &mask](const SystemState& state) {
            return raw_to_action(state, agent.act_mean(encode_state(state)), system, mask);
        };
        const EvalStats st =
            evaluate_policy(system, chain, policy, run.eval_epochs * run.eval_steps,
                            derive_seed(seed, kStreamEvalBase + static_cast<std::uint64_t>(eval_index)));
        ++eval_index;
        rows.push_back(make_row(spec, seed, sweep_var, sweep_value, epoch, st));
        return st.reward;
    };

    if (run.train_epochs == 0) {
        evaluate_now(0);
        return rows;
    }

    Environment env(system, chain);
    Rng env_rng(derive_seed(seed, kStreamTrainEnv));
    env.reset(env_rng);

    std::vector<double> eval_rewards;
    int stable_windows = 0;
    const auto window_mean = [&](std::size_t end) {
        double sum = 0.0;
        for (std::size_t i = end - static_cast<std::size_t>(run.convergence_span); i < end; ++i)
            sum += eval_rewards[i];
        return sum / run.convergence_span;
    };

    try {
        for (int epoch = 1; epoch <= run.train_epochs; ++epoch) {
            for (int t = 0; t < run.steps_per_epoch; ++t) {
                const SystemState state = env.state();
                EncodedState encoded = encode_state(state);
                RawAction raw = agent.act(encoded);
                const SystemAction action = raw_to_action(state, raw, system, mask);
                const StepResult result = env.step(action, env_rng);
                agent.observe({std::move(encoded), std::move(raw), result.reward,
                               encode_state(env.state())});
                if (agent.can_update() &&
                    agent.steps_observed() % static_cast<std::int64_t>(sac.update_every) == 0) {
                    for (int u = 0; u < sac.updates_per_step; ++u) agent.update();
                }
            }

            if (epoch % run.eval_every != 0 && epoch != run.train_epochs) continue;
            evaluate_now(epoch);
            eval_rewards.push_back(rows.back().mean_test_reward);

            // Early stop once the moving average of test rewards settles.
            if (eval_rewards.size() > static_cast<std::size_t>(run.convergence_span)) {
                const double current = window_mean(eval_rewards.size());
                const double previous = window_mean(eval_rewards.size() - 1);
                const double denom = std::max(std::abs(previous), 1e-12);
                if (std::abs(current - previous) / denom < run.convergence_tol) {
                    ++stable_windows;
                } else {
                    stable_windows = 0;
                }
                if (stable_windows >= run.convergence_windows) break;
            }
        }
    } catch (const TrainingError&) {
        // Divergence voids the replica but not the experiment: emit a
        // sentinel row so downstream summaries can count the failure.
        EvalStats nan_stats{nan_value(), nan_value(), nan_value(), nan_value()};
        rows.push_back(make_row(spec, seed, sweep_var, sweep_value,
                                rows.empty() ? 0 : rows.back().epoch + 1, nan_stats));
    }
    return rows;
}

struct ReplicaJob {
    SystemConfig system;
    std::uint64_t seed = 0;
    std::string sweep_var;
    double sweep_value = 0.0;
};

} // namespace

ActionMask mask_for_algo(const std::string& algo) {
    if (algo == "dfc") return ActionMask::dfc();
    if (algo == "dfnc") return ActionMask::dfnc();
    // ptdfc, both heuristics, and the oracle act in the full space.
    return ActionMask::ptdfc();
}

bool algo_uses_sac(const std::string& algo) {
    return algo == "ptdfc" || algo == "dfc" || algo == "dfnc";
}

EvalStats evaluate_policy(const SystemConfig& cfg, const TransitionMatrix& chain,
                          const PolicyFn& policy, int steps, std::uint64_t rng_seed) {
    if (steps <= 0) throw ConfigError("evaluate_policy: steps must be positive");
    Environment env(cfg, chain);
    Rng rng(rng_seed);
    env.reset(rng);

    double reward_sum = 0.0;
    double transmission_sum = 0.0;
    double computation_sum = 0.0;
    for (int t = 0; t < steps; ++t) {
        const SystemAction action = policy(env.state());
        const StepResult result = env.step(action, rng);
        reward_sum += result.reward;
        transmission_sum += result.cost.reactive_bandwidth + result.cost.proactive_bandwidth;
        computation_sum += result.cost.energy;
    }

    EvalStats st;
    st.reward = reward_sum / steps;
    st.transmission = transmission_sum / steps;
    st.computation = computation_sum / steps;
    // Composed from the component means so the identity
    // weighted == transmission + energy_weight * computation is exact.
    st.weighted = st.transmission + cfg.energy_weight * st.computation;
    return st;
}

std::vector<MetricsRow> run_replica(const ExperimentSpec& spec, const SystemConfig& system,
                                    std::uint64_t seed, const std::string& sweep_var,
                                    double sweep_value) {
    system.validate();
    const int num_tasks = static_cast<int>(system.tasks.size());

    // The chain depends only on the seed, so every algorithm and every sweep
    // value at a given seed faces identical request statistics.
    Rng chain_rng(derive_seed(seed, kStreamChain));
    const TransitionMatrix chain = build_chain(num_tasks, spec.p_max, chain_rng);

    if (spec.algo == "mru-lru" || spec.algo == "mfu-lfu")
        return run_baseline_replica(spec, system, chain, seed, sweep_var, sweep_value);
    if (spec.algo == "oracle")
        return run_oracle_replica(spec, system, chain, seed, sweep_var, sweep_value);
    if (algo_uses_sac(spec.algo))
        return run_sac_replica(spec, system, chain, seed, sweep_var, sweep_value);
    throw ConfigError("unknown algo: " + spec.algo);
}

std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    std::vector<ReplicaJob> jobs;
    if (spec.sweep) {
        for (double value : spec.sweep->values) {
            SystemConfig patched = spec.system;
            if (spec.sweep->variable == "cache_bits") {
                patched.cache_bits = static_cast<std::int64_t>(value);
            } else if (spec.sweep->variable == "slot_seconds") {
                patched.slot_seconds = value;
            } else {
                throw ConfigError("unsupported sweep variable: " + spec.sweep->variable);
            }
            patched.validate();
            for (std::uint64_t seed : spec.seeds)
                jobs.push_back({patched, seed, spec.sweep->variable, value});
        }
    } else {
        for (std::uint64_t seed : spec.seeds)
            jobs.push_back({spec.system, seed, "none", 0.0});
    }

    std::vector<std::vector<MetricsRow>> results(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                const ReplicaJob& job = jobs[i];
                results[i] = run_replica(spec, job.system, job.seed, job.sweep_var,
                                         job.sweep_value);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t pool = std::min<std::size_t>({jobs.size(), hw, 8});
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::vector<MetricsRow> rows;
    for (auto& chunk : results)
        for (auto& row : chunk) rows.push_back(std::move(row));
    return rows;
}

} // namespace mecsim
