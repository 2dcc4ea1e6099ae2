#include "mecsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mecsim/errors.hpp"

namespace mecsim {

std::string format_double(double v) {
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v || std::isnan(v)) return buf;
    }
    return buf;
}

std::string metrics_header() {
    return "algo,seed,sweep_var,sweep_value,epoch,mean_test_reward,"
           "mean_transmission_cost,mean_computation_cost,mean_weighted_cost";
}

std::string to_csv_line(const MetricsRow& row) {
    std::ostringstream os;
    os << row.algo << ',' << row.seed << ',' << row.sweep_var << ','
       << format_double(row.sweep_value) << ',' << row.epoch << ','
       << format_double(row.mean_test_reward) << ','
       << format_double(row.mean_transmission_cost) << ','
       << format_double(row.mean_computation_cost) << ','
       << format_double(row.mean_weighted_cost);
    return os.str();
}

MetricsRow parse_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
        throw ConfigError("metrics: expected 9 columns, got " + std::to_string(cells.size()) +
                          " in: " + line);
    MetricsRow row;
    row.algo = cells[0];
    row.seed = std::stoull(cells[1]);
    row.sweep_var = cells[2];
    row.sweep_value = std::strtod(cells[3].c_str(), nullptr);
    row.epoch = std::stoi(cells[4]);
    row.mean_test_reward = std::strtod(cells[5].c_str(), nullptr);
    row.mean_transmission_cost = std::strtod(cells[6].c_str(), nullptr);
    row.mean_computation_cost = std::strtod(cells[7].c_str(), nullptr);
    row.mean_weighted_cost = std::strtod(cells[8].c_str(), nullptr);
    return row;
}

void write_metrics(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << metrics_header() << '\n';
    for (const MetricsRow& row : rows) os << to_csv_line(row) << '\n';
}

std::vector<MetricsRow> read_metrics(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("metrics: empty input");
    if (line != metrics_header())
        throw ConfigError("metrics: unexpected header: " + line);
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_csv_line(line));
    }
    return rows;
}

std::vector<MetricsRow> read_metrics_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("metrics: cannot open " + path);
    return read_metrics(f);
}

std::vector<SummaryEntry> summarize(const std::vector<MetricsRow>& rows) {
    if (rows.empty()) return {};
    const std::string& var = rows.front().sweep_var;
    for (const MetricsRow& r : rows)
        if (r.sweep_var != var)
            throw ConfigError("summarize: mixed sweep variables (" + var + " vs " + r.sweep_var +
                              ")");

    // final row per replica
    std::map<std::tuple<std::string, double, std::uint64_t>, MetricsRow> last;
    for (const MetricsRow& r : rows) {
        auto key = std::make_tuple(r.algo, r.sweep_value, r.seed);
        auto it = last.find(key);
        if (it == last.end() || r.epoch >= it->second.epoch) last[key] = r;
    }

    std::map<std::pair<std::string, double>, std::vector<MetricsRow>> groups;
    for (const auto& [key, row] : last)
        groups[{std::get<0>(key), std::get<1>(key)}].push_back(row);

    const auto mean_se = [](const std::vector<double>& xs, double& mean, double& se) {
        const int n = static_cast<int>(xs.size());
        mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        se = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(double(n)) : 0.0;
    };

    std::vector<SummaryEntry> out;
    for (const auto& [key, members] : groups) {
        SummaryEntry e;
        e.algo = key.first;
        e.sweep_var = var;
        e.sweep_value = key.second;
        e.num_seeds = static_cast<int>(members.size());
        std::vector<double> reward, trans, comp, weighted;
        for (const MetricsRow& r : members) {
            reward.push_back(r.mean_test_reward);
            trans.push_back(r.mean_transmission_cost);
            comp.push_back(r.mean_computation_cost);
            weighted.push_back(r.mean_weighted_cost);
        }
        mean_se(reward, e.mean_reward, e.se_reward);
        mean_se(trans, e.mean_transmission, e.se_transmission);
        mean_se(comp, e.mean_computation, e.se_computation);
        mean_se(weighted, e.mean_weighted, e.se_weighted);
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const SummaryEntry& x, const SummaryEntry& y) {
        return std::tie(x.algo, x.sweep_var, x.sweep_value) <
               std::tie(y.algo, y.sweep_var, y.sweep_value);
    });
    return out;
}

std::string format_summary_table(const std::vector<SummaryEntry>& entries) {
    std::ostringstream os;
    os << "algo        sweep            seeds  weighted_cost (se)        transmission (se)    "
          "     computation (se)\n";
    for (const SummaryEntry& e : entries) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-11s %s=%-12g %3d   %13.6g (%.3g)  %13.6g (%.3g)  "
                                          "%13.6g (%.3g)\n",
                      e.algo.c_str(), e.sweep_var.c_str(), e.sweep_value, e.num_seeds,
                      e.mean_weighted, e.se_weighted, e.mean_transmission, e.se_transmission,
                      e.mean_computation, e.se_computation);
        os << line;
    }
    return os.str();
}

} // namespace mecsim
