// mecsim CLI: train single configs, run sweeps, summarize metrics files,
// trace action corrections, and solve small instances exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mecsim/codec.hpp"
#include "mecsim/config_io.hpp"
#include "mecsim/env.hpp"
#include "mecsim/errors.hpp"
#include "mecsim/experiment.hpp"
#include "mecsim/metrics.hpp"
#include "mecsim/request.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/value_iteration.hpp"

namespace {

using namespace mecsim;

SweepSpec parse_sweep_flag(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size())
        throw ConfigError("--sweep expects var=v1,v2,... got: " + text);
    SweepSpec sweep;
    sweep.variable = text.substr(0, eq);
    std::stringstream values(text.substr(eq + 1));
    std::string item;
    while (std::getline(values, item, ',')) {
        if (item.empty()) throw ConfigError("--sweep has an empty value in: " + text);
        std::size_t used = 0;
        sweep.values.push_back(std::stod(item, &used));
        if (used != item.size()) throw ConfigError("--sweep value not a number: " + item);
    }
    if (sweep.values.empty()) throw ConfigError("--sweep needs at least one value");
    return sweep;
}

struct Overrides {
    std::string config_path;
    std::string algo;
    std::vector<std::uint64_t> seeds;
    std::string out;
    std::string sweep;
};

ExperimentSpec build_spec(const Overrides& ov) {
    ExperimentSpec spec =
        ov.config_path.empty() ? ExperimentSpec{} : load_experiment(ov.config_path);
    if (!ov.algo.empty()) spec.algo = ov.algo;
    if (!ov.seeds.empty()) spec.seeds = ov.seeds;
    if (!ov.out.empty()) spec.out_path = ov.out;
    if (!ov.sweep.empty()) spec.sweep = parse_sweep_flag(ov.sweep);
    return spec;
}

int write_rows(const ExperimentSpec& spec, const std::vector<MetricsRow>& rows) {
    std::ofstream os(spec.out_path, std::ios::binary);
    if (!os) {
        std::cerr << "error: cannot open " << spec.out_path << " for writing\n";
        return 1;
    }
    write_metrics(os, rows);
    std::cout << "wrote " << rows.size() << " rows to " << spec.out_path << "\n";
    std::cout << format_summary_table(summarize(rows));
    return 0;
}

int cmd_train(const Overrides& ov) {
    ExperimentSpec spec = build_spec(ov);
    spec.sweep.reset(); // train runs the base config; use `sweep` for grids
    spec.validate();
    return write_rows(spec, run_experiment(spec));
}

int cmd_sweep(const Overrides& ov) {
    ExperimentSpec spec = build_spec(ov);
    if (!spec.sweep)
        throw ConfigError("sweep: no sweep given (use --sweep var=v1,v2,... or the config file)");
    spec.validate();
    return write_rows(spec, run_experiment(spec));
}

// Non-increasing-cost verdicts between algorithm pairs at each sweep value.
void print_ordering_verdicts(const std::vector<SummaryEntry>& entries, std::ostream& os) {
    std::map<double, std::map<std::string, const SummaryEntry*>> by_value;
    for (const auto& e : entries) by_value[e.sweep_value][e.algo] = &e;

    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"ptdfc", "dfc"},     {"dfc", "dfnc"},    {"ptdfc", "dfnc"},
        {"ptdfc", "mru-lru"}, {"ptdfc", "mfu-lfu"}};
    bool any = false;
    for (const auto& [value, algos] : by_value) {
        for (const auto& [lo, hi] : pairs) {
            const auto l = algos.find(lo);
            const auto r = algos.find(hi);
            if (l == algos.end() || r == algos.end()) continue;
            any = true;
            const double gap = r->second->mean_weighted - l->second->mean_weighted;
            const double se = std::sqrt(l->second->se_weighted * l->second->se_weighted +
                                        r->second->se_weighted * r->second->se_weighted);
            const bool ok = gap >= -se; // ordered within one combined standard error
            os << (ok ? "[OK]       " : "[VIOLATED] ") << lo << " <= " << hi;
            if (entries.front().sweep_var != "none")
                os << " at " << entries.front().sweep_var << "=" << format_double(value);
            os << "  (gap " << format_double(gap) << ", se " << format_double(se) << ")\n";
        }
    }
    if (!any) os << "(no comparable algorithm pairs in input)\n";
}

int cmd_summarize(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<MetricsRow> rows;
    for (const auto& path : inputs) {
        auto part = read_metrics_file(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const auto entries = summarize(rows);
    std::ostringstream report;
    report << format_summary_table(entries) << "\n";
    print_ordering_verdicts(entries, report);
    std::cout << report.str();
    if (!out.empty()) {
        std::ofstream os(out, std::ios::binary);
        if (!os) {
            std::cerr << "error: cannot open " << out << " for writing\n";
            return 1;
        }
        os << report.str();
    }
    return 0;
}

SystemState random_state(const SystemConfig& cfg, Rng& rng) {
    const int F = cfg.num_tasks();
    SystemState state;
    state.request = static_cast<int>(rng.uniform_index(F));
    state.cache = CacheState::empty(F);
    // Random insertion order; keep each item with probability 1/2 if it fits.
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

int cmd_trace(const Overrides& ov, int count, const std::string& algo) {
    const ExperimentSpec spec = build_spec(ov);
    const SystemConfig& cfg = spec.system;
    cfg.validate();
    const ActionMask mask = mask_for_algo(algo.empty() ? spec.algo : algo);
    const std::uint64_t seed = ov.seeds.empty() ? 1 : ov.seeds.front();
    Rng rng(seed);

    for (int i = 0; i < count; ++i) {
        const SystemState state = random_state(cfg, rng);
        RawAction raw(raw_action_dim(cfg.num_tasks()));
        for (double& v : raw) v = rng.uniform(-1.0, 1.0);

        std::cout << "--- trace " << i << " (seed " << seed << ") ---\n";
        std::cout << "state:     " << to_string(state) << "\n";
        std::cout << "raw:       [";
        for (std::size_t k = 0; k < raw.size(); ++k)
            std::cout << (k ? ", " : "") << format_double(raw[k]);
        std::cout << "]\n";
        const SystemAction quantized = quantize(raw, state, cfg);
        std::cout << "quantized: " << to_string(quantized) << "\n";
        CorrectionTrace trace;
        const SystemAction fixed = correct(state, quantized, raw, cfg, mask, &trace);
        std::cout << trace.format();
        std::cout << "final:     " << to_string(fixed) << "\n";
    }
    return 0;
}

std::string cache_mask(const std::vector<std::uint8_t>& bits) {
    std::string s;
    for (auto b : bits) s += b ? '1' : '0';
    return s;
}

int cmd_oracle(const Overrides& ov) {
    const ExperimentSpec spec = build_spec(ov);
    spec.system.validate();
    const std::uint64_t seed = ov.seeds.empty() ? spec.seeds.front() : ov.seeds.front();

    Rng chain_rng(derive_seed(seed, 100));
    const TransitionMatrix chain = build_chain(spec.system.num_tasks(), spec.p_max, chain_rng);
    const ValueIterationResult vi =
        exact_value_iteration(spec.system, chain, mask_for_algo(spec.algo));
    const StateSpace space(spec.system);

    std::cout << "states: " << space.num_states() << " (" << spec.system.num_tasks()
              << " requests x " << space.num_caches() << " caches)\n";
    std::cout << "sweeps: " << vi.sweeps << "  residual: " << format_double(vi.residual) << "\n";
    std::cout << "stationary start cost: " << format_double(vi.stationary_start_cost) << "\n";
    for (int f = 0; f < spec.system.num_tasks(); ++f) {
        const SystemState s{f, CacheState::empty(spec.system.num_tasks())};
        const int idx = space.state_index(s);
        std::cout << "V(request=" << f << ", empty) = " << format_double(vi.values[idx])
                  << "   greedy: " << to_string(vi.policy[idx]) << "\n";
    }

    if (!ov.out.empty()) {
        std::ofstream os(ov.out, std::ios::binary);
        if (!os) {
            std::cerr << "error: cannot open " << ov.out << " for writing\n";
            return 1;
        }
        os << "request,inputs,outputs,value,action\n";
        for (int idx = 0; idx < space.num_states(); ++idx) {
            const SystemState s = space.state(idx);
            os << s.request << "," << cache_mask(s.cache.input_cached) << ","
               << cache_mask(s.cache.output_cached) << "," << format_double(vi.values[idx])
               << ",\"" << to_string(vi.policy[idx]) << "\"\n";
        }
        std::cout << "wrote value table to " << ov.out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEC computing/pushing/caching simulator"};
    app.require_subcommand(1);

    Overrides ov;
    int trace_count = 1;
    std::string trace_algo;
    std::vector<std::string> summarize_inputs;
    std::string summarize_out;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* opt = cmd->add_option("--config", ov.config_path, "experiment JSON config");
        if (need_config) opt->required();
        cmd->add_option("--algo", ov.algo, "algorithm tag override");
        cmd->add_option("--seed", ov.seeds, "replica seed(s) override");
        cmd->add_option("--out", ov.out, "output path override");
    };

    auto* train = app.add_subcommand("train", "train one algorithm at the base config");
    add_common(train, true);

    auto* sweep = app.add_subcommand("sweep", "run the config across a sweep grid");
    add_common(sweep, true);
    sweep->add_option("--sweep", ov.sweep, "sweep grid, var=v1,v2,... (cache_bits|slot_seconds)");

    auto* summ = app.add_subcommand("summarize", "aggregate metrics files across seeds");
    summ->add_option("inputs", summarize_inputs, "metrics CSV files")->required();
    summ->add_option("--out", summarize_out, "also write the report here");

    auto* trace = app.add_subcommand("trace-correction",
                                     "show rule-by-rule correction of random raw actions");
    add_common(trace, false);
    trace->add_option("--count", trace_count, "number of traces")->check(CLI::PositiveNumber);
    trace->add_option("--trace-algo", trace_algo, "mask to trace under (default: config algo)");

    auto* oracle = app.add_subcommand("oracle", "solve the instance exactly (3 tasks max)");
    add_common(oracle, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(ov);
        if (*sweep) return cmd_sweep(ov);
        if (*summ) return cmd_summarize(summarize_inputs, summarize_out);
        if (*trace) return cmd_trace(ov, trace_count, trace_algo);
        if (*oracle) return cmd_oracle(ov);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
