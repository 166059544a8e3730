#include "mmdmix/mmdmix.h"

#include "config.hpp"
#include "env.hpp"
#include "errors.hpp"
#include "learner.hpp"
#include "metrics.hpp"
#include "selftest.hpp"
#include "tensor.hpp"

#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

thread_local std::string g_last_error = "";

mmdmix_status fail(mmdmix_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
mmdmix_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const mmdmix::ConfigError& e) {
        return fail(MMDMIX_ERR_CONFIG, e.what());
    } catch (const mmdmix::IoError& e) {
        return fail(MMDMIX_ERR_IO, e.what());
    } catch (const mmdmix::ContractViolation& e) {
        return fail(MMDMIX_ERR_CONTRACT, e.what());
    } catch (const std::exception& e) {
        return fail(MMDMIX_ERR_CONTRACT, e.what());
    }
}

} // namespace

// Raw key/value assignments on top of the defaults; values are re-validated
// against a scratch ExperimentConfig on every mutation so errors surface at
// the call that caused them.
struct mmdmix_config {
    std::map<std::string, std::string> kv;

    mmdmix::ExperimentConfig build() const {
        mmdmix::ExperimentConfig cfg;
        for (const auto& [k, v] : kv) cfg.set(k, v);
        cfg.validate();
        return cfg;
    }
};

extern "C" {

mmdmix_config* mmdmix_config_create(void) { return new mmdmix_config(); }

void mmdmix_config_free(mmdmix_config* cfg) { delete cfg; }

mmdmix_status mmdmix_config_load_file(mmdmix_config* cfg, const char* path) {
    return guarded([&]() -> mmdmix_status {
        if (!cfg || !path) return fail(MMDMIX_ERR_CONFIG, "null argument");
        std::ifstream is(path);
        if (!is) throw mmdmix::IoError(std::string("cannot open config file: ") + path);
        std::string line;
        int lineno = 0;
        mmdmix::ExperimentConfig scratch;
        std::map<std::string, std::string> pending = cfg->kv;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto b = line.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) continue;
            const auto e = line.find_last_not_of(" \t\r\n");
            line = line.substr(b, e - b + 1);
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw mmdmix::ConfigError(std::string(path) + ":" + std::to_string(lineno) +
                                          ": expected 'key = value', got '" + line + "'");
            auto trim = [](std::string s) {
                const auto x = s.find_first_not_of(" \t");
                if (x == std::string::npos) return std::string();
                const auto y = s.find_last_not_of(" \t");
                return s.substr(x, y - x + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            scratch.set(key, value); // per-key validation with file context
            pending[key] = value;
        }
        cfg->kv = std::move(pending);
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_config_set(mmdmix_config* cfg, const char* key, const char* value) {
    return guarded([&]() -> mmdmix_status {
        if (!cfg || !key || !value) return fail(MMDMIX_ERR_CONFIG, "null argument");
        mmdmix::ExperimentConfig scratch;
        scratch.set(key, value);
        cfg->kv[key] = value;
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_config_get(const mmdmix_config* cfg, const char* key, char* buf,
                                size_t buf_len) {
    return guarded([&]() -> mmdmix_status {
        if (!cfg || !key || !buf || buf_len == 0)
            return fail(MMDMIX_ERR_CONFIG, "null argument");
        const auto kv = cfg->build().to_kv();
        const auto it = kv.find(key);
        if (it == kv.end())
            throw mmdmix::ConfigError(std::string("unknown config key '") + key + "'");
        if (it->second.size() + 1 > buf_len)
            return fail(MMDMIX_ERR_CONFIG, "buffer too small for config value");
        std::memcpy(buf, it->second.c_str(), it->second.size() + 1);
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_train(const mmdmix_config* cfg, unsigned long long seed,
                           const char* out_dir) {
    return guarded([&]() -> mmdmix_status {
        if (!cfg || !out_dir) return fail(MMDMIX_ERR_CONFIG, "null argument");
        mmdmix::ExperimentConfig full = cfg->build();
        full.seed = seed;
        mmdmix::run_training(full, out_dir);
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_eval(const char* checkpoint_path, const char* env_name,
                          int episodes, unsigned long long seed,
                          mmdmix_eval_summary* out) {
    return guarded([&]() -> mmdmix_status {
        if (!checkpoint_path || !out) return fail(MMDMIX_ERR_CONFIG, "null argument");
        if (episodes < 1)
            throw mmdmix::ConfigError("eval: episodes must be >= 1");
        mmdmix::ParameterStore store;
        const std::string config_text = mmdmix::load_checkpoint(store, checkpoint_path);
        mmdmix::ExperimentConfig cfg = mmdmix::ExperimentConfig::from_text(config_text);
        if (env_name && *env_name) cfg.set("env.name", env_name);
        cfg.validate();
        auto env = mmdmix::make_env(cfg);
        const mmdmix::NetDims dims = mmdmix::make_dims(cfg, env->info());
        const mmdmix::EvalSummary es =
            mmdmix::evaluate(*env, store, dims, episodes, seed);
        out->return_mean = es.return_mean;
        out->return_median = es.return_median;
        out->success_rate = es.success_rate;
        out->episodes = es.episodes;
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_selftest(unsigned flags) {
    return guarded([&]() -> mmdmix_status {
        mmdmix::SelftestOptions opts;
        opts.fault_flip_abs = (flags & 1u) != 0;
        const mmdmix::SelftestReport report = mmdmix::run_selftest(std::cout, opts);
        if (!report.ok)
            return fail(MMDMIX_ERR_SELFTEST,
                        "selftest property failed: " + report.failed_property);
        return MMDMIX_OK;
    });
}

mmdmix_status mmdmix_summarize(const char* const* run_dirs, size_t n_dirs,
                               const char* out_csv_path) {
    return guarded([&]() -> mmdmix_status {
        if (!run_dirs || n_dirs == 0)
            return fail(MMDMIX_ERR_CONFIG, "summarize: no run directories given");
        std::vector<std::string> dirs;
        dirs.reserve(n_dirs);
        for (size_t i = 0; i < n_dirs; ++i) {
            if (!run_dirs[i]) return fail(MMDMIX_ERR_CONFIG, "null run directory");
            dirs.emplace_back(run_dirs[i]);
        }
        const mmdmix::SummaryTable table = mmdmix::summarize_runs(dirs);
        const std::string csv = mmdmix::summary_csv(table);
        if (out_csv_path) {
            std::ofstream os(out_csv_path, std::ios::trunc);
            if (!os)
                throw mmdmix::IoError(std::string("cannot write summary CSV: ") +
                                      out_csv_path);
            os << csv;
        } else {
            std::cout << csv;
        }
        return MMDMIX_OK;
    });
}

const char* mmdmix_last_error(void) { return g_last_error.c_str(); }

const char* mmdmix_version(void) { return "0.1.0"; }

} // extern "C"
