#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "mecsim/baselines.hpp"
#include "mecsim/codec.hpp"
#include "mecsim/env.hpp"
#include "mecsim/request.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/sac.hpp"
#include "mecsim/types.hpp"
#include "mecsim/value_iteration.hpp"

namespace {

using namespace mecsim;

TransitionMatrix default_chain(int num_tasks, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 100));
    return build_chain(num_tasks, 0.7, rng);
}

void BM_ChainSample(benchmark::State& state) {
    const TransitionMatrix chain = default_chain(4, 1);
    Rng rng(42);
    int current = 0;
    for (auto _ : state) {
        current = sample_next(chain, current, rng);
        benchmark::DoNotOptimize(current);
    }
}
BENCHMARK(BM_ChainSample);

void BM_EnvStepHeuristic(benchmark::State& state) {
    const SystemConfig cfg = SystemConfig::defaults();
    Environment env(cfg, default_chain(cfg.num_tasks(), 1));
    Rng rng(7);
    env.reset(rng);
    RecencyFrequencyBook book(cfg.num_tasks());
    std::int64_t slot = 0;
    for (auto _ : state) {
        book.record(env.state().request, slot++);
        benchmark::DoNotOptimize(env.step(mru_lru_policy(env.state(), book, cfg), rng));
    }
}
BENCHMARK(BM_EnvStepHeuristic);

void BM_RawToAction(benchmark::State& state) {
    const SystemConfig cfg = SystemConfig::defaults();
    const int F = cfg.num_tasks();
    Rng rng(11);

    // a pool of random states and raw actions, cycled so the timed region
    // is quantization plus correction only
    std::vector<SystemState> states;
    std::vector<RawAction> raws;
    for (int i = 0; i < 1024; ++i) {
        SystemState s{static_cast<int>(rng.uniform_index(F)), CacheState::empty(F)};
        for (int f = 0; f < F; ++f) {
            if (rng.uniform() < 0.4) s.cache.input_cached[f] = 1;
            if (rng.uniform() < 0.4) s.cache.output_cached[f] = 1;
            if (!s.cache.fits(cfg)) {
                s.cache.input_cached[f] = 0;
                s.cache.output_cached[f] = 0;
            }
        }
        states.push_back(std::move(s));
        RawAction raw(raw_action_dim(F));
        for (double& v : raw) v = rng.uniform(-1.0, 1.0);
        raws.push_back(std::move(raw));
    }

    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(raw_to_action(states[i], raws[i], cfg));
        i = (i + 1) & 1023;
    }
}
BENCHMARK(BM_RawToAction);

void BM_PolicyActMean(benchmark::State& state) {
    const SystemConfig cfg = SystemConfig::defaults();
    SacConfig sac;
    sac.hidden = {32, 32};
    SacAgent agent(cfg.num_tasks(), sac, 3);
    const EncodedState enc(encoded_state_dim(cfg.num_tasks()), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(agent.act_mean(enc));
}
BENCHMARK(BM_PolicyActMean);

void BM_SacUpdate(benchmark::State& state) {
    const SystemConfig cfg = SystemConfig::defaults();
    const int F = cfg.num_tasks();
    SacConfig sac;
    sac.hidden = {32, 32};
    sac.batch_size = 128;
    sac.warmup_steps = 1;
    sac.buffer_capacity = 4096;
    SacAgent agent(F, sac, 5);

    Rng rng(17);
    for (int i = 0; i < 1024; ++i) {
        EncodedState s(encoded_state_dim(F)), n(encoded_state_dim(F));
        for (double& v : s) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (double& v : n) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
        RawAction a(raw_action_dim(F));
        for (double& v : a) v = rng.uniform(-1.0, 1.0);
        agent.observe({std::move(s), std::move(a), rng.uniform(-4.0, 0.0), std::move(n)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(agent.update());
}
BENCHMARK(BM_SacUpdate);

void BM_ValueIterationTwoTasks(benchmark::State& state) {
    SystemConfig cfg = SystemConfig::defaults();
    cfg.tasks.resize(2);
    const TransitionMatrix chain = default_chain(2, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(exact_value_iteration(cfg, chain, ActionMask::ptdfc()));
}
BENCHMARK(BM_ValueIterationTwoTasks);

} // namespace

BENCHMARK_MAIN();
