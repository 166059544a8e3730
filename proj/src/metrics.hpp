#pragma once

#include "config.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace mmdmix {

// metrics-v1 schema; column order is fixed and version-tagged in the manifest.
inline constexpr const char* kMetricsSchema = "metrics-v1";
inline constexpr const char* kMetricsHeader =
    "env_steps,episodes,train_loss,eval_return_mean,eval_return_median,"
    "eval_success_rate,epsilon";

struct MetricsRow {
    long long env_steps = 0;
    long long episodes = 0;
    double train_loss = 0.0;
    double eval_return_mean = 0.0;
    double eval_return_median = 0.0;
    double eval_success_rate = 0.0;
    double epsilon = 0.0;
};

class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);
    void append(const MetricsRow& row);

private:
    std::ofstream os_;
    long long last_steps_ = -1;
};

std::vector<MetricsRow> read_metrics_csv(const std::string& path);

std::string utc_timestamp_now();

/// manifest.json: config snapshot, master seed, version tag, timestamps and
/// output paths; written before training starts and finalized afterwards.
void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg,
                    const std::string& started_utc, const std::string& finished_utc);

/// Per-checkpoint median and 25/75 percentiles across runs (linear
/// interpolation between order statistics) of the success rate and the mean
/// evaluation return. All runs must share the same env_steps grid.
struct SummaryTable {
    int n_runs = 0;
    std::vector<long long> env_steps;
    std::vector<double> success_median, success_p25, success_p75;
    std::vector<double> return_median, return_p25, return_p75;
};

SummaryTable summarize_runs(const std::vector<std::string>& run_dirs);
std::string summary_csv(const SummaryTable& table);

/// q in [0, 1]; rank = q * (n - 1), linear interpolation between neighbors.
double percentile_linear(std::vector<double> values, double q);

} // namespace mmdmix
