#include "metrics.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

namespace mmdmix {

MetricsWriter::MetricsWriter(const std::string& path) : os_(path, std::ios::trunc) {
    if (!os_) throw IoError("cannot open metrics file for writing: " + path);
    os_ << kMetricsHeader << "\n";
    os_.flush();
}

void MetricsWriter::append(const MetricsRow& row) {
    if (row.env_steps <= last_steps_)
        throw ContractViolation("metrics rows must have strictly increasing env_steps");
    if (row.eval_success_rate < 0.0 || row.eval_success_rate > 1.0)
        throw ContractViolation("metrics success rate outside [0, 1]");
    last_steps_ = row.env_steps;
    os_ << row.env_steps << ',' << row.episodes << ',' << format_double(row.train_loss)
        << ',' << format_double(row.eval_return_mean) << ','
        << format_double(row.eval_return_median) << ','
        << format_double(row.eval_success_rate) << ',' << format_double(row.epsilon)
        << "\n";
    os_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open metrics file: " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("metrics file is empty: " + path);
    if (line != kMetricsHeader)
        throw IoError("metrics file has an unexpected header: " + path);
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        MetricsRow r;
        char c;
        if (!(ls >> r.env_steps >> c >> r.episodes >> c >> r.train_loss >> c >>
              r.eval_return_mean >> c >> r.eval_return_median >> c >>
              r.eval_success_rate >> c >> r.epsilon))
            throw IoError("malformed metrics row in " + path + ": " + line);
        rows.push_back(r);
    }
    return rows;
}

std::string utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg,
                    const std::string& started_utc, const std::string& finished_utc) {
    nlohmann::json j;
    j["kind"] = "mmdmix-run-manifest";
    j["version"] = "0.1.0";
    j["csv_schema"] = kMetricsSchema;
    j["master_seed"] = cfg.seed;
    j["started_utc"] = started_utc;
    if (!finished_utc.empty()) j["finished_utc"] = finished_utc;
    nlohmann::json c;
    for (const auto& [k, v] : cfg.to_kv()) c[k] = v;
    j["config"] = c;
    j["outputs"] = {{"metrics", "metrics.csv"},
                    {"checkpoint_latest", "checkpoint_latest.bin"},
                    {"checkpoint_final", "checkpoint_final.bin"}};
    const std::string path = out_dir + "/manifest.json";
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot write manifest: " + path);
    os << j.dump(2) << "\n";
}

double percentile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw ContractViolation("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

SummaryTable summarize_runs(const std::vector<std::string>& run_dirs) {
    if (run_dirs.empty()) throw ConfigError("summarize: no run directories given");
    std::vector<std::vector<MetricsRow>> runs;
    runs.reserve(run_dirs.size());
    for (const auto& dir : run_dirs) runs.push_back(read_metrics_csv(dir + "/metrics.csv"));

    const auto& first = runs.front();
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].size() != first.size())
            throw ContractViolation("summarize: run '" + run_dirs[r] + "' has " +
                                    std::to_string(runs[r].size()) + " rows, expected " +
                                    std::to_string(first.size()));
        for (std::size_t i = 0; i < first.size(); ++i)
            if (runs[r][i].env_steps != first[i].env_steps)
                throw ContractViolation("summarize: env_steps grids differ between '" +
                                        run_dirs[0] + "' and '" + run_dirs[r] + "'");
    }

    SummaryTable t;
    t.n_runs = static_cast<int>(runs.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> succ, ret;
        for (const auto& run : runs) {
            succ.push_back(run[i].eval_success_rate);
            ret.push_back(run[i].eval_return_mean);
        }
        t.env_steps.push_back(first[i].env_steps);
        t.success_median.push_back(percentile_linear(succ, 0.5));
        t.success_p25.push_back(percentile_linear(succ, 0.25));
        t.success_p75.push_back(percentile_linear(succ, 0.75));
        t.return_median.push_back(percentile_linear(ret, 0.5));
        t.return_p25.push_back(percentile_linear(ret, 0.25));
        t.return_p75.push_back(percentile_linear(ret, 0.75));
    }
    return t;
}

std::string summary_csv(const SummaryTable& t) {
    std::string out = "env_steps,runs,success_median,success_p25,success_p75,"
                      "return_median,return_p25,return_p75\n";
    for (std::size_t i = 0; i < t.env_steps.size(); ++i) {
        out += std::to_string(t.env_steps[i]);
        out += ',';
        out += std::to_string(t.n_runs);
        out += ',';
        out += format_double(t.success_median[i]);
        out += ',';
        out += format_double(t.success_p25[i]);
        out += ',';
        out += format_double(t.success_p75[i]);
        out += ',';
        out += format_double(t.return_median[i]);
        out += ',';
        out += format_double(t.return_p25[i]);
        out += ',';
        out += format_double(t.return_p75[i]);
        out += '\n';
    }
    return out;
}

} // namespace mmdmix
