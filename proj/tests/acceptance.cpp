// Acceptance gate for the simulator. Each criterion prints one [PASS] or
// [FAIL] line; the exit code is the number of failures. Learning criteria
// persist converged replicas under MECSIM_ACCEPTANCE_CACHE_DIR so repeated
// and overlapping criteria reuse work instead of retraining.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mecsim/baselines.hpp"
#include "mecsim/codec.hpp"
#include "mecsim/config_io.hpp"
#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"
#include "mecsim/experiment.hpp"
#include "mecsim/metrics.hpp"
#include "mecsim/request.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/sac.hpp"
#include "mecsim/types.hpp"
#include "mecsim/value_iteration.hpp"

namespace fs = std::filesystem;
using namespace mecsim;

namespace {

// ------------------------------------------------------------------
// frozen training recipe: small nets and a long uniform warmup keep the
// critic's global cost shape anchored on a single core
// ------------------------------------------------------------------

SacConfig recipe_sac() {
    SacConfig sac;
    sac.hidden = {32, 32};
    sac.batch_size = 128;
    sac.warmup_steps = 5000;
    sac.buffer_capacity = 300000;
    return sac;
}

RunSpec recipe_run() {
    RunSpec run;
    run.train_epochs = 120;
    run.steps_per_epoch = 500;
    run.eval_every = 10;
    run.eval_epochs = 2;
    run.eval_steps = 250;
    run.convergence_tol = 0.004;
    run.convergence_windows = 3;
    run.convergence_span = 3;
    return run;
}

ExperimentSpec recipe_spec(const std::string& algo, const SystemConfig& system) {
    ExperimentSpec spec;
    spec.algo = algo;
    spec.system = system;
    spec.sac = recipe_sac();
    spec.run = recipe_run();
    return spec;
}

constexpr double kUncachedOptimum = 3479080.421052632; // 6 cores, defaults

// ------------------------------------------------------------------
// replica memo cache
// ------------------------------------------------------------------

fs::path cache_dir() {
    static const fs::path dir = [] {
        fs::path d{MECSIM_ACCEPTANCE_CACHE_DIR};
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string hash_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string replica_key(const ExperimentSpec& spec, const SystemConfig& system,
                        std::uint64_t seed) {
    ExperimentSpec probe = spec;
    probe.system = system;
    probe.seeds = {seed};
    probe.out_path.clear();
    return "v1|" + experiment_to_json(probe);
}

// Converged metrics rows of one replica at a fixed system config; trained
// replicas are persisted (atomically) and replayed from disk afterwards.
std::vector<MetricsRow> replica_rows(ExperimentSpec spec, const SystemConfig& system,
                                     std::uint64_t seed) {
    spec.system = system;
    if (!algo_uses_sac(spec.algo)) return run_replica(spec, system, seed, "none", 0.0);

    const fs::path file = cache_dir() / ("replica_" + spec.algo + "_s" + std::to_string(seed) +
                                         "_" + hash_hex(replica_key(spec, system, seed)) +
                                         ".csv");
    if (fs::exists(file)) return read_metrics_file(file.string());

    const std::vector<MetricsRow> rows = run_replica(spec, system, seed, "none", 0.0);
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        write_metrics(os, rows);
    }
    fs::rename(tmp, file);
    return rows;
}

const MetricsRow& last_row(const std::vector<MetricsRow>& rows) {
    if (rows.empty()) throw TrainingError("replica produced no rows");
    return rows.back();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double var = 0.0;
        for (double x : xs) var += (x - r.mean) * (x - r.mean);
        var /= static_cast<double>(xs.size() - 1);
        r.se = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return r;
}

double combined_se(const MeanSe& a, const MeanSe& b) {
    return std::sqrt(a.se * a.se + b.se * b.se);
}

SystemState random_state(const SystemConfig& cfg, Rng& rng) {
    const int F = cfg.num_tasks();
    SystemState state;
    state.request = static_cast<int>(rng.uniform_index(F));
    state.cache = CacheState::empty(F);
    std::vector<std::pair<int, int>> items;
    for (int f = 0; f < F; ++f) {
        items.emplace_back(0, f);
        items.emplace_back(1, f);
    }
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[rng.uniform_index(i)]);
    for (const auto& [kind, f] : items) {
        if (rng.uniform() < 0.5) continue;
        auto& bit = kind == 0 ? state.cache.input_cached[f] : state.cache.output_cached[f];
        bit = 1;
        if (!state.cache.fits(cfg)) bit = 0;
    }
    return state;
}

// ------------------------------------------------------------------
// criterion 1: every random action becomes valid after correction
// ------------------------------------------------------------------

bool criterion1() {
    const SystemConfig cfg = SystemConfig::defaults();
    const int dim = raw_action_dim(cfg.num_tasks());
    const std::vector<ActionMask> masks{ActionMask::ptdfc(), ActionMask::dfc(),
                                        ActionMask::dfnc()};
    Rng rng(20260815);
    const int per_mask = 40000;
    std::int64_t checked = 0;

    for (const ActionMask& mask : masks) {
        for (int trial = 0; trial < per_mask; ++trial) {
            const SystemState state = random_state(cfg, rng);
            RawAction raw(dim);
            for (double& v : raw) v = rng.uniform(-1.0, 1.0);
            const SystemAction action = raw_to_action(state, raw, cfg, mask);
            const ValidationResult check = validate_action(state, action, cfg);
            ++checked;
            if (!check.ok()) {
                std::cout << "  invalid action after correction at trial " << checked << ": "
                          << check.message() << "\n  state " << to_string(state) << "\n";
                return false;
            }
        }
    }
    std::cout << "  " << checked << " random (state, action) pairs corrected to valid actions\n";
    return true;
}

// ------------------------------------------------------------------
// criterion 2: brute-force core optimum, recovered by no-cache training
// ------------------------------------------------------------------

bool criterion2() {
    const SystemConfig cfg = SystemConfig::defaults();
    const SystemState state{0, CacheState::empty(cfg.num_tasks())};

    double best = 0.0;
    int best_cores = -1;
    for (int cores = 4; cores <= 8; ++cores) {
        SystemAction act = SystemAction::zero(cfg.num_tasks());
        act.reactive_cores = cores;
        const double w = action_cost(state, act, cfg).weighted;
        std::cout << "  cores=" << cores << " weighted=" << format_double(w) << "\n";
        if (best_cores < 0 || w < best) {
            best = w;
            best_cores = cores;
        }
    }
    bool ok = best_cores == 6;
    ok = ok && std::abs(best - kUncachedOptimum) <= 1e-9 * kUncachedOptimum;
    if (!ok) {
        std::cout << "  enumeration expected the minimum at 6 cores, "
                  << format_double(kUncachedOptimum) << "\n";
        return false;
    }

    const ExperimentSpec spec = recipe_spec("dfnc", cfg);
    const MetricsRow row = last_row(replica_rows(spec, cfg, 11));
    const double target = -cfg.reward_scale * kUncachedOptimum;
    const double rel = std::abs(row.mean_test_reward - target) / std::abs(target);
    std::cout << "  trained reward " << format_double(row.mean_test_reward) << " vs optimum "
              << format_double(target) << " (relative gap " << format_double(rel) << ")\n";
    return std::isfinite(row.mean_test_reward) && rel <= 0.10;
}

// ------------------------------------------------------------------
// criterion 3: trained policy against the exact solver on two tasks
// ------------------------------------------------------------------

double discounted_rollout_cost(const SystemConfig& sys, const TransitionMatrix& chain,
                               const PolicyFn& policy, int rollouts, int horizon,
                               std::uint64_t seed_base) {
    double total = 0.0;
    for (int k = 0; k < rollouts; ++k) {
        Environment env(sys, chain);
        Rng rng(derive_seed(seed_base, static_cast<std::uint64_t>(k)));
        env.reset(rng);
        double disc = 0.0, weight = 1.0;
        for (int t = 0; t < horizon; ++t) {
            const StepResult r = env.step(policy(env.state()), rng);
            disc += weight * r.cost.weighted;
            weight *= sys.discount;
        }
        total += disc;
    }
    return total / rollouts;
}

bool criterion3() {
    SystemConfig sys = SystemConfig::defaults();
    sys.tasks.resize(2);
    const std::uint64_t seed = 11;
    Rng chain_rng(derive_seed(seed, 100));
    const TransitionMatrix chain = build_chain(2, 0.7, chain_rng);

    const ValueIterationResult vi = exact_value_iteration(sys, chain, ActionMask::ptdfc());
    std::cout << "  exact optimum " << format_double(vi.stationary_start_cost) << " ("
              << vi.sweeps << " sweeps)\n";

    const ExperimentSpec spec = recipe_spec("ptdfc", sys);
    const int rollouts = 200, horizon = 2000;
    const fs::path file =
        cache_dir() / ("c3_rollout_" +
                       hash_hex("c3v1|" + std::to_string(rollouts) + "|" +
                                std::to_string(horizon) + "|" + replica_key(spec, sys, seed)) +
                       ".txt");

    double trained_cost = 0.0;
    if (fs::exists(file)) {
        std::ifstream is(file);
        is >> trained_cost;
    } else {
        // train in-process (mirrors the experiment loop) so the converged
        // policy itself, not just its metrics, is available for playouts
        const ActionMask mask = ActionMask::ptdfc();
        SacConfig sac = recipe_sac();
        sac.discount = sys.discount;
        const RunSpec run = recipe_run();
        SacAgent agent(2, sac, derive_seed(seed, 300));
        Environment env(sys, chain);
        Rng env_rng(derive_seed(seed, 400));
        env.reset(env_rng);

        PolicyFn eval_policy = [&](const SystemState& state) {
            return raw_to_action(state, agent.act_mean(encode_state(state)), sys, mask);
        };

        std::vector<double> rewards;
        int eval_index = 0, stable = 0;
        const auto window = [&](std::size_t end) {
            double s = 0.0;
            for (std::size_t i = end - run.convergence_span; i < end; ++i) s += rewards[i];
            return s / run.convergence_span;
        };
        for (int epoch = 1; epoch <= run.train_epochs; ++epoch) {
            for (int t = 0; t < run.steps_per_epoch; ++t) {
                const SystemState state = env.state();
                EncodedState enc = encode_state(state);
                RawAction raw = agent.act(enc);
                const StepResult r = env.step(raw_to_action(state, raw, sys, mask), env_rng);
                agent.observe(
                    {std::move(enc), std::move(raw), r.reward, encode_state(env.state())});
                if (agent.can_update()) agent.update();
            }
            if (epoch % run.eval_every != 0 && epoch != run.train_epochs) continue;
            const EvalStats st =
                evaluate_policy(sys, chain, eval_policy, run.eval_epochs * run.eval_steps,
                                derive_seed(seed, 500 + static_cast<std::uint64_t>(eval_index++)));
            rewards.push_back(st.reward);
            if (rewards.size() > static_cast<std::size_t>(run.convergence_span)) {
                const double cur = window(rewards.size());
                const double prev = window(rewards.size() - 1);
                stable = std::abs(cur - prev) / std::max(std::abs(prev), 1e-12) <
                                 run.convergence_tol
                             ? stable + 1
                             : 0;
                if (stable >= run.convergence_windows) break;
            }
        }

        trained_cost = discounted_rollout_cost(sys, chain, eval_policy, rollouts, horizon,
                                               derive_seed(seed, 9000));
        const fs::path tmp = file.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary);
            os << format_double(trained_cost) << "\n";
        }
        fs::rename(tmp, file);
    }

    const double rel =
        std::abs(trained_cost - vi.stationary_start_cost) / vi.stationary_start_cost;
    std::cout << "  trained discounted cost " << format_double(trained_cost)
              << " (relative gap " << format_double(rel) << ")\n";
    return std::isfinite(trained_cost) && rel <= 0.15;
}

// ------------------------------------------------------------------
// criterion 4: ordering of the three action spaces and the heuristics
// ------------------------------------------------------------------

std::map<std::string, MeanSe> weighted_by_algo(const std::vector<std::string>& algos,
                                               const SystemConfig& sys,
                                               const std::vector<std::uint64_t>& seeds,
                                               bool use_transmission = false) {
    std::map<std::string, MeanSe> out;
    for (const std::string& algo : algos) {
        std::vector<double> xs;
        for (std::uint64_t seed : seeds) {
            const MetricsRow row = last_row(replica_rows(recipe_spec(algo, sys), sys, seed));
            xs.push_back(use_transmission ? row.mean_transmission_cost
                                          : row.mean_weighted_cost);
            if (!std::isfinite(xs.back()))
                throw TrainingError(algo + " seed " + std::to_string(seed) +
                                    " produced a non-finite cost");
        }
        out[algo] = mean_se(xs);
    }
    return out;
}

bool criterion4() {
    const SystemConfig sys = SystemConfig::defaults();
    const std::vector<std::uint64_t> seeds{11, 12, 13, 14, 15};
    std::map<std::string, MeanSe> m;
    try {
        m = weighted_by_algo({"ptdfc", "dfc", "dfnc", "mru-lru", "mfu-lfu"}, sys, seeds);
    } catch (const TrainingError& e) {
        std::cout << "  " << e.what() << "\n";
        return false;
    }
    for (const auto& [algo, ms] : m)
        std::cout << "  " << algo << ": weighted " << format_double(ms.mean) << " (se "
                  << format_double(ms.se) << ")\n";

    bool ok = true;
    const auto gap_exceeds_se = [&](const char* lo, const char* hi) {
        const double gap = m[hi].mean - m[lo].mean;
        const double se = combined_se(m[lo], m[hi]);
        const bool pass = gap > se;
        std::cout << "  " << lo << " <= " << hi << ": gap " << format_double(gap) << " vs se "
                  << format_double(se) << (pass ? " (ok)\n" : " (violated)\n");
        return pass;
    };
    ok &= gap_exceeds_se("ptdfc", "dfc");
    ok &= gap_exceeds_se("dfc", "dfnc");
    ok &= m["mru-lru"].mean > m["ptdfc"].mean;
    ok &= m["mfu-lfu"].mean > m["ptdfc"].mean;
    return ok;
}

// ------------------------------------------------------------------
// criterion 5: more cache never raises transmission cost
// ------------------------------------------------------------------

bool criterion5() {
    const std::vector<double> caches{10000, 20000, 30000, 40000, 50000};
    const std::vector<std::uint64_t> seeds{11, 12, 13};
    bool ok = true;

    for (const std::string algo : {"ptdfc", "dfc"}) {
        std::vector<MeanSe> trans;
        for (double c : caches) {
            SystemConfig sys = SystemConfig::defaults();
            sys.cache_bits = static_cast<std::int64_t>(c);
            std::vector<double> xs;
            for (std::uint64_t seed : seeds)
                xs.push_back(last_row(replica_rows(recipe_spec(algo, sys), sys, seed))
                                 .mean_transmission_cost);
            trans.push_back(mean_se(xs));
            std::cout << "  " << algo << " C=" << format_double(c) << ": transmission "
                      << format_double(trans.back().mean) << " (se "
                      << format_double(trans.back().se) << ")\n";
        }
        for (std::size_t i = 0; i + 1 < trans.size(); ++i) {
            if (trans[i + 1].mean > trans[i].mean + combined_se(trans[i], trans[i + 1])) {
                std::cout << "  " << algo << " transmission rose from C="
                          << format_double(caches[i]) << " to C=" << format_double(caches[i + 1])
                          << " beyond one standard error\n";
                ok = false;
            }
        }
    }

    // the no-cache agent must be bitwise indifferent to capacity
    std::vector<MetricsRow> reference;
    for (double c : caches) {
        SystemConfig sys = SystemConfig::defaults();
        sys.cache_bits = static_cast<std::int64_t>(c);
        std::vector<MetricsRow> rows = replica_rows(recipe_spec("dfnc", sys), sys, 11);
        if (reference.empty()) {
            reference = std::move(rows);
            continue;
        }
        if (rows != reference) {
            std::cout << "  dfnc rows changed between cache sizes (C=" << format_double(c)
                      << ")\n";
            ok = false;
        }
    }
    std::cout << "  dfnc weighted " << format_double(last_row(reference).mean_weighted_cost)
              << " constant across " << caches.size() << " cache sizes\n";
    return ok;
}

// ------------------------------------------------------------------
// criterion 6: longer deadlines never raise the weighted cost
// ------------------------------------------------------------------

bool criterion6() {
    const std::vector<double> taus{0.015, 0.02, 0.03, 0.04};
    const std::vector<std::uint64_t> seeds{11, 12, 13};
    bool ok = true;

    for (const std::string algo : {"ptdfc", "dfc", "dfnc", "mru-lru", "mfu-lfu"}) {
        std::vector<MeanSe> weighted;
        for (double tau : taus) {
            SystemConfig sys = SystemConfig::defaults();
            sys.slot_seconds = tau;
            std::vector<double> xs;
            for (std::uint64_t seed : seeds)
                xs.push_back(
                    last_row(replica_rows(recipe_spec(algo, sys), sys, seed)).mean_weighted_cost);
            weighted.push_back(mean_se(xs));
            std::cout << "  " << algo << " tau=" << format_double(tau) << ": weighted "
                      << format_double(weighted.back().mean) << " (se "
                      << format_double(weighted.back().se) << ")\n";
        }
        for (std::size_t i = 0; i + 1 < weighted.size(); ++i) {
            if (weighted[i + 1].mean >
                weighted[i].mean + combined_se(weighted[i], weighted[i + 1])) {
                std::cout << "  " << algo << " weighted cost rose from tau="
                          << format_double(taus[i]) << " to tau=" << format_double(taus[i + 1])
                          << " beyond one standard error\n";
                ok = false;
            }
        }
    }
    return ok;
}

// ------------------------------------------------------------------
// criterion 7: analytic gradients agree with central differences
// ------------------------------------------------------------------

// Floor keeps central-difference cancellation noise on near-zero components
// from masquerading as relative error.
double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

bool criterion7() {
    const double h = 1e-5, tol = 1e-4;
    int instances = 0;
    double worst = 0.0;

    for (int inst = 1; inst <= 24; ++inst) {
        Rng rng(static_cast<std::uint64_t>(inst));
        const int F = 1 + inst % 3;
        const int B = 2 + inst % 4;
        const std::vector<int> hidden{3 + inst % 3, 4};
        SacConfig cfg;
        cfg.hidden = hidden;
        SacNets nets(F, hidden);
        nets.init(rng);
        nets.log_alpha = rng.uniform(-1.0, 0.5);
        // init zeroes hidden biases, which can park pre-activations exactly
        // on a ReLU kink (where central differences are one-sided); jitter
        // every parameter so the probe runs at a generic point
        for (Mlp* net : {&nets.value, &nets.target_value, &nets.q1, &nets.q2, &nets.policy})
            for (int k = 0; k < net->param_count(); ++k)
                net->params()[k] += rng.uniform(-0.05, 0.05);

        const int sd = encoded_state_dim(F), ad = raw_action_dim(F);
        Mat states(sd, B), next_states(sd, B), noise(ad, B), actions(ad, B);
        Vec rewards(B);
        for (int i = 0; i < states.size(); ++i) states.data()[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < next_states.size(); ++i)
            next_states.data()[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
        for (int i = 0; i < actions.size(); ++i) actions.data()[i] = rng.uniform(-0.9, 0.9);
        for (int i = 0; i < B; ++i) rewards[i] = rng.normal();
        Batch batch{states, actions, rewards, next_states};

        const auto check_params = [&](Mlp& net, const Vec& grad,
                                      const std::function<double()>& loss) {
            for (int k = 0; k < net.param_count(); ++k) {
                const double keep = net.params()[k];
                net.params()[k] = keep + h;
                const double up = loss();
                net.params()[k] = keep - h;
                const double down = loss();
                net.params()[k] = keep;
                worst = std::max(worst, rel_error(grad[k], (up - down) / (2 * h)));
                if (worst > tol) return false;
            }
            return true;
        };

        Vec grad(nets.value.param_count());
        grad.setZero();
        value_loss(nets, states, noise, cfg, &grad);
        if (!check_params(nets.value, grad,
                          [&] { return value_loss(nets, states, noise, cfg, nullptr); })) {
            std::cout << "  value gradient mismatch on instance " << inst << "\n";
            return false;
        }

        grad = Vec::Zero(nets.q1.param_count());
        q_loss(nets.q1, nets.target_value, batch, 0.97, &grad);
        if (!check_params(nets.q1, grad, [&] {
                return q_loss(nets.q1, nets.target_value, batch, 0.97, nullptr);
            })) {
            std::cout << "  q gradient mismatch on instance " << inst << "\n";
            return false;
        }

        grad = Vec::Zero(nets.policy.param_count());
        policy_loss(nets, states, noise, cfg, &grad);
        if (!check_params(nets.policy, grad,
                          [&] { return policy_loss(nets, states, noise, cfg, nullptr); })) {
            std::cout << "  policy gradient mismatch on instance " << inst << "\n";
            return false;
        }

        Vec log_probs(B);
        policy_loss(nets, states, noise, cfg, nullptr, &log_probs);
        const double target_entropy = -static_cast<double>(ad);
        double tgrad = 0.0;
        temperature_objective(nets.log_alpha, log_probs, target_entropy, &tgrad);
        const double up = temperature_objective(nets.log_alpha + h, log_probs, target_entropy,
                                                nullptr);
        const double down = temperature_objective(nets.log_alpha - h, log_probs, target_entropy,
                                                  nullptr);
        worst = std::max(worst, rel_error(tgrad, (up - down) / (2 * h)));
        if (worst > tol) {
            std::cout << "  temperature gradient mismatch on instance " << inst << "\n";
            return false;
        }
        ++instances;
    }
    std::cout << "  " << instances << " instances checked, worst relative error "
              << format_double(worst) << "\n";
    return instances >= 20;
}

// ------------------------------------------------------------------
// criterion 8: sampled request frequencies match the limiting law
// ------------------------------------------------------------------

bool criterion8() {
    Rng chain_rng(derive_seed(8, 100));
    const TransitionMatrix chain = build_chain(4, 0.7, chain_rng);
    const std::vector<double> p = limiting_distribution(chain);

    double residual = 0.0;
    for (int j = 0; j < 4; ++j) {
        double pj = 0.0;
        for (int i = 0; i < 4; ++i) pj += p[i] * chain.probs[i][j];
        residual += std::abs(pj - p[j]);
    }
    std::cout << "  stationarity residual " << format_double(residual) << "\n";
    if (!(residual < 1e-10)) return false;

    Rng rng(881);
    int current = 0;
    for (int t = 0; t < 1000; ++t) current = sample_next(chain, current, rng); // burn-in
    const int samples = 1000000;
    std::vector<std::int64_t> counts(4, 0);
    for (int t = 0; t < samples; ++t) {
        current = sample_next(chain, current, rng);
        ++counts[current];
    }
    double tv = 0.0;
    for (int f = 0; f < 4; ++f)
        tv += std::abs(static_cast<double>(counts[f]) / samples - p[f]);
    tv *= 0.5;
    std::cout << "  total variation over " << samples << " slots: " << format_double(tv)
              << "\n";
    return tv <= 0.01;
}

// ------------------------------------------------------------------
// criterion 9: identical spec and seeds give identical bytes
// ------------------------------------------------------------------

bool criterion9() {
    ExperimentSpec spec;
    spec.algo = "dfnc";
    spec.seeds = {21, 22};
    spec.sac.hidden = {16, 16};
    spec.sac.batch_size = 64;
    spec.sac.buffer_capacity = 20000;
    spec.sac.warmup_steps = 300;
    spec.run.train_epochs = 6;
    spec.run.steps_per_epoch = 200;
    spec.run.eval_every = 3;
    spec.run.eval_epochs = 1;
    spec.run.eval_steps = 200;

    const auto emit = [](const ExperimentSpec& s) {
        std::ostringstream os;
        write_metrics(os, run_experiment(s));
        return os.str();
    };
    const std::string first = emit(spec);
    const std::string second = emit(spec);
    std::cout << "  training run: " << first.size() << " bytes, rerun "
              << (first == second ? "identical" : "DIFFERS") << "\n";
    if (first != second) return false;

    ExperimentSpec sweep;
    sweep.algo = "mfu-lfu";
    sweep.seeds = {21, 22};
    sweep.run.eval_epochs = 2;
    sweep.run.eval_steps = 100;
    sweep.sweep = SweepSpec{"cache_bits", {20000.0, 40000.0}};
    const std::string s1 = emit(sweep);
    const std::string s2 = emit(sweep);
    std::cout << "  sweep run: " << s1.size() << " bytes, rerun "
              << (s1 == s2 ? "identical" : "DIFFERS") << "\n";
    return s1 == s2;
}

// ------------------------------------------------------------------
// criterion 10: pre-cached outputs and frozen caches cost nothing
// ------------------------------------------------------------------

bool criterion10() {
    SystemConfig sys = SystemConfig::defaults();
    sys.tasks.resize(2);
    sys.cache_bits = 200000;
    CacheState initial = CacheState::empty(2);
    initial.output_cached = {1, 1};

    Rng chain_rng(derive_seed(10, 100));
    const TransitionMatrix chain = build_chain(2, 0.7, chain_rng);
    const ActionMask frozen{false, false, true}; // deltas and pushes disabled

    std::map<std::string, PolicyFn> policies;
    std::vector<std::unique_ptr<SacAgent>> agents;
    for (const std::string algo : {"ptdfc", "dfc", "dfnc"}) {
        agents.push_back(
            std::make_unique<SacAgent>(2, recipe_sac(), derive_seed(10, agents.size())));
        SacAgent* agent = agents.back().get();
        policies[algo] = [agent, &sys, &frozen](const SystemState& state) {
            return raw_to_action(state, agent->act_mean(encode_state(state)), sys, frozen);
        };
    }
    for (const std::string algo : {"mru-lru", "mfu-lfu"}) {
        auto book = std::make_shared<RecencyFrequencyBook>(2);
        auto slot = std::make_shared<std::int64_t>(0);
        const bool frequency = algo == "mfu-lfu";
        policies[algo] = [&sys, book, slot, frequency](const SystemState& state) {
            book->record(state.request, (*slot)++);
            return frequency ? mfu_lfu_policy(state, *book, sys)
                             : mru_lru_policy(state, *book, sys);
        };
    }
    const ValueIterationResult vi = exact_value_iteration(sys, chain, ActionMask::ptdfc());
    const StateSpace space(sys);
    policies["oracle"] = [&vi, &space](const SystemState& state) {
        return vi.policy[space.state_index(state)];
    };

    bool ok = true;
    for (const auto& [algo, policy] : policies) {
        Environment env(sys, chain, initial);
        Rng rng(derive_seed(10, 777));
        env.reset(rng);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const StepResult r = env.step(policy(env.state()), rng);
            worst = std::max(worst, std::abs(r.reward));
        }
        const bool zero = worst == 0.0;
        std::cout << "  " << algo << ": max |reward| over 100 slots = " << format_double(worst)
                  << "\n";
        ok &= zero;
    }
    return ok;
}

struct Criterion {
    int id;
    const char* label;
    bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "random actions always corrected into the valid set", criterion1},
    {2, "no-cache core optimum recovered by training", criterion2},
    {3, "trained policy within 15% of the exact solver", criterion3},
    {4, "action-space ordering holds across seeds", criterion4},
    {5, "transmission cost monotone in cache size", criterion5},
    {6, "weighted cost monotone in the slot deadline", criterion6},
    {7, "gradients match central finite differences", criterion7},
    {8, "request chain matches its limiting distribution", criterion8},
    {9, "identical configs produce identical bytes", criterion9},
    {10, "pre-cached outputs make every slot free", criterion10},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (only < 0 || only > 10) {
        std::cerr << "criterion must be in 1..10\n";
        return 2;
    }

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        std::cout << "criterion " << c.id << ": " << c.label << "\n";
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::cout << "  exception: " << e.what() << "\n";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.label
                  << " (" << format_double(secs) << " s)\n";
        if (!ok) ++failures;
    }
    return failures;
}
