#include "mecsim/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mecsim/errors.hpp"

namespace mecsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw ConfigError("config: unknown key \"" + key + "\" in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

TaskSpec parse_task(const json& j) {
    reject_unknown(j, {"input_bits", "output_bits", "cycles_per_bit"}, "task");
    TaskSpec t;
    maybe(j, "input_bits", t.input_bits);
    maybe(j, "output_bits", t.output_bits);
    maybe(j, "cycles_per_bit", t.cycles_per_bit);
    return t;
}

SystemConfig parse_system(const json& j) {
    reject_unknown(j,
                   {"num_cores", "core_freq", "switched_capacitance", "cache_bits",
                    "slot_seconds", "energy_weight", "discount", "reward_scale", "tasks",
                    "num_tasks"},
                   "system");
    SystemConfig cfg = SystemConfig::defaults();
    maybe(j, "num_cores", cfg.num_cores);
    maybe(j, "core_freq", cfg.core_freq);
    maybe(j, "switched_capacitance", cfg.switched_capacitance);
    maybe(j, "cache_bits", cfg.cache_bits);
    maybe(j, "slot_seconds", cfg.slot_seconds);
    maybe(j, "energy_weight", cfg.energy_weight);
    maybe(j, "discount", cfg.discount);
    maybe(j, "reward_scale", cfg.reward_scale);
    if (j.contains("tasks") && j.contains("num_tasks"))
        throw ConfigError("config: give either system.tasks or system.num_tasks, not both");
    if (j.contains("tasks")) {
        cfg.tasks.clear();
        for (const json& t : j.at("tasks")) cfg.tasks.push_back(parse_task(t));
    } else if (j.contains("num_tasks")) {
        cfg.tasks.assign(j.at("num_tasks").get<int>(), TaskSpec{});
    }
    return cfg;
}

SacConfig parse_sac(const json& j) {
    reject_unknown(j,
                   {"hidden", "lr", "lr_alpha", "discount", "target_smoothing",
                    "target_update_every", "batch_size", "buffer_capacity", "warmup_steps",
                    "update_every", "updates_per_step", "log_std_min", "log_std_max",
                    "init_log_alpha", "target_entropy", "optimizer"},
                   "sac");
    SacConfig cfg;
    maybe(j, "hidden", cfg.hidden);
    maybe(j, "lr", cfg.lr);
    maybe(j, "lr_alpha", cfg.lr_alpha);
    maybe(j, "discount", cfg.discount);
    maybe(j, "target_smoothing", cfg.target_smoothing);
    maybe(j, "target_update_every", cfg.target_update_every);
    maybe(j, "batch_size", cfg.batch_size);
    maybe(j, "buffer_capacity", cfg.buffer_capacity);
    maybe(j, "warmup_steps", cfg.warmup_steps);
    maybe(j, "update_every", cfg.update_every);
    maybe(j, "updates_per_step", cfg.updates_per_step);
    maybe(j, "log_std_min", cfg.log_std_min);
    maybe(j, "log_std_max", cfg.log_std_max);
    maybe(j, "init_log_alpha", cfg.init_log_alpha);
    if (j.contains("target_entropy")) cfg.target_entropy = j.at("target_entropy").get<double>();
    maybe(j, "optimizer", cfg.optimizer);
    return cfg;
}

RunSpec parse_run(const json& j) {
    reject_unknown(j,
                   {"train_epochs", "steps_per_epoch", "eval_every", "eval_epochs", "eval_steps",
                    "convergence_tol", "convergence_windows", "convergence_span"},
                   "run");
    RunSpec run;
    maybe(j, "train_epochs", run.train_epochs);
    maybe(j, "steps_per_epoch", run.steps_per_epoch);
    maybe(j, "eval_every", run.eval_every);
    maybe(j, "eval_epochs", run.eval_epochs);
    maybe(j, "eval_steps", run.eval_steps);
    maybe(j, "convergence_tol", run.convergence_tol);
    maybe(j, "convergence_windows", run.convergence_windows);
    maybe(j, "convergence_span", run.convergence_span);
    return run;
}

SweepSpec parse_sweep(const json& j) {
    reject_unknown(j, {"variable", "values"}, "sweep");
    SweepSpec sweep;
    sweep.variable = j.at("variable").get<std::string>();
    sweep.values = j.at("values").get<std::vector<double>>();
    return sweep;
}

} // namespace

void RunSpec::validate() const {
    if (train_epochs < 0 || steps_per_epoch < 1 || eval_every < 1 || eval_epochs < 1 ||
        eval_steps < 1)
        throw ConfigError("run: epoch/step counts out of range");
    if (!(convergence_tol > 0) || convergence_windows < 1 || convergence_span < 1)
        throw ConfigError("run: convergence parameters out of range");
}

void ExperimentSpec::validate() const {
    static const std::set<std::string> algos{"ptdfc", "dfc",     "dfnc",
                                             "mru-lru", "mfu-lfu", "oracle"};
    if (!algos.count(algo)) throw ConfigError("experiment: unknown algo \"" + algo + "\"");
    if (seeds.empty()) throw ConfigError("experiment: need at least one seed");
    if (!(p_max > 0.0) || !(p_max < 1.0)) throw ConfigError("experiment: p_max outside (0,1)");
    system.validate();
    sac.validate();
    run.validate();
    if (sweep) {
        if (sweep->variable != "cache_bits" && sweep->variable != "slot_seconds")
            throw ConfigError("sweep: variable must be cache_bits or slot_seconds");
        if (sweep->values.empty()) throw ConfigError("sweep: empty value list");
        for (double v : sweep->values)
            if (!(v > 0)) throw ConfigError("sweep: values must be positive");
    }
}

ExperimentSpec parse_experiment(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    reject_unknown(j, {"algo", "seeds", "out", "p_max", "sweep", "system", "sac", "run"},
                   "top level");
    ExperimentSpec spec;
    try {
        maybe(j, "algo", spec.algo);
        maybe(j, "seeds", spec.seeds);
        if (j.contains("out")) spec.out_path = j.at("out").get<std::string>();
        maybe(j, "p_max", spec.p_max);
        if (j.contains("system")) spec.system = parse_system(j.at("system"));
        if (j.contains("sac")) spec.sac = parse_sac(j.at("sac"));
        if (j.contains("run")) spec.run = parse_run(j.at("run"));
        if (j.contains("sweep")) spec.sweep = parse_sweep(j.at("sweep"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_experiment(buf.str());
}

std::string experiment_to_json(const ExperimentSpec& spec) {
    json tasks = json::array();
    for (const TaskSpec& t : spec.system.tasks)
        tasks.push_back({{"input_bits", t.input_bits},
                         {"output_bits", t.output_bits},
                         {"cycles_per_bit", t.cycles_per_bit}});
    json j{{"algo", spec.algo},
           {"seeds", spec.seeds},
           {"out", spec.out_path},
           {"p_max", spec.p_max},
           {"system",
            {{"num_cores", spec.system.num_cores},
             {"core_freq", spec.system.core_freq},
             {"switched_capacitance", spec.system.switched_capacitance},
             {"cache_bits", spec.system.cache_bits},
             {"slot_seconds", spec.system.slot_seconds},
             {"energy_weight", spec.system.energy_weight},
             {"discount", spec.system.discount},
             {"reward_scale", spec.system.reward_scale},
             {"tasks", tasks}}},
           {"sac",
            {{"hidden", spec.sac.hidden},
             {"lr", spec.sac.lr},
             {"lr_alpha", spec.sac.lr_alpha},
             {"discount", spec.sac.discount},
             {"target_smoothing", spec.sac.target_smoothing},
             {"target_update_every", spec.sac.target_update_every},
             {"batch_size", spec.sac.batch_size},
             {"buffer_capacity", spec.sac.buffer_capacity},
             {"warmup_steps", spec.sac.warmup_steps},
             {"update_every", spec.sac.update_every},
             {"updates_per_step", spec.sac.updates_per_step},
             {"log_std_min", spec.sac.log_std_min},
             {"log_std_max", spec.sac.log_std_max},
             {"init_log_alpha", spec.sac.init_log_alpha},
             {"optimizer", spec.sac.optimizer}}},
           {"run",
            {{"train_epochs", spec.run.train_epochs},
             {"steps_per_epoch", spec.run.steps_per_epoch},
             {"eval_every", spec.run.eval_every},
             {"eval_epochs", spec.run.eval_epochs},
             {"eval_steps", spec.run.eval_steps},
             {"convergence_tol", spec.run.convergence_tol},
             {"convergence_windows", spec.run.convergence_windows},
             {"convergence_span", spec.run.convergence_span}}}};
    if (spec.sac.target_entropy) j["sac"]["target_entropy"] = *spec.sac.target_entropy;
    if (spec.sweep)
        j["sweep"] = {{"variable", spec.sweep->variable}, {"values", spec.sweep->values}};
    return j.dump(2);
}

} // namespace mecsim
