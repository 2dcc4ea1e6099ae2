#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mecsim {

/// One evaluation block of one replica. Costs are per-slot means over the
/// evaluation steps; weighted = transmission + energy_weight * computation.
struct MetricsRow {
    std::string algo;      // ptdfc | dfc | dfnc | mru-lru | mfu-lfu | oracle
    std::uint64_t seed = 0;
    std::string sweep_var = "none"; // none | cache_bits | slot_seconds
    double sweep_value = 0.0;
    int epoch = 0; // training epochs completed when the block ran
    double mean_test_reward = 0.0;
    double mean_transmission_cost = 0.0;
    double mean_computation_cost = 0.0;
    double mean_weighted_cost = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Fixed column order; every metrics file starts with this line.
std::string metrics_header();

std::string to_csv_line(const MetricsRow& row);
MetricsRow parse_csv_line(const std::string& line);

void write_metrics(std::ostream& os, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics(std::istream& is);
std::vector<MetricsRow> read_metrics_file(const std::string& path);

/// Across-seed aggregate of the final (converged) row of each replica.
struct SummaryEntry {
    std::string algo;
    std::string sweep_var;
    double sweep_value = 0.0;
    int num_seeds = 0;
    double mean_reward = 0.0, se_reward = 0.0;
    double mean_transmission = 0.0, se_transmission = 0.0;
    double mean_computation = 0.0, se_computation = 0.0;
    double mean_weighted = 0.0, se_weighted = 0.0;
};

/// Collapses each (algo, sweep value, seed) to its last epoch, then
/// aggregates across seeds. Output sorted by (algo, sweep_var, sweep_value).
/// Mixing sweep variables in one call is an error.
std::vector<SummaryEntry> summarize(const std::vector<MetricsRow>& rows);

std::string format_summary_table(const std::vector<SummaryEntry>& entries);

} // namespace mecsim
