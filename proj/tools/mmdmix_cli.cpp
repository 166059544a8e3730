// Experiment front door for the mmdmix laboratory. Talks to the library
// exclusively through the C API.

#include <mmdmix/mmdmix.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

int report(mmdmix_status status) {
    if (status != MMDMIX_OK)
        std::fprintf(stderr, "error: %s\n", mmdmix_last_error());
    return static_cast<int>(status);
}

struct ConfigHandle {
    mmdmix_config* ptr = mmdmix_config_create();
    ~ConfigHandle() { mmdmix_config_free(ptr); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmdmix: distributional value-factorisation lab"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "run a training experiment");
    std::string train_config, train_out = "runs/latest";
    std::vector<std::string> train_sets;
    unsigned long long train_seed = 0;
    train->add_option("--config", train_config, "config file of 'key = value' lines");
    train->add_option("--set", train_sets, "override, e.g. --set mixer.kind=vdn")
        ->take_all();
    train->add_option("--seed", train_seed, "master seed")->required();
    train->add_option("--out", train_out, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
    std::string eval_checkpoint, eval_env;
    int eval_episodes = 32;
    unsigned long long eval_seed = 0;
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval->add_option("--env", eval_env, "environment override (default: from checkpoint)");
    eval->add_option("--episodes", eval_episodes, "number of greedy episodes");
    eval->add_option("--seed", eval_seed, "evaluation seed")->required();

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the property suites");
    bool fault_abs = false;
    selftest->add_flag("--fault-abs", fault_abs,
                       "flip the mixing-weight abs transform (test hook)");

    // summarize
    auto* summarize =
        app.add_subcommand("summarize", "aggregate run directories into percentile curves");
    std::vector<std::string> sum_dirs;
    std::string sum_out;
    summarize->add_option("dirs", sum_dirs, "run directories (each with metrics.csv)")
        ->required();
    summarize->add_option("--out", sum_out, "write the CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (*train) {
        ConfigHandle cfg;
        if (!train_config.empty()) {
            const mmdmix_status s = mmdmix_config_load_file(cfg.ptr, train_config.c_str());
            if (s != MMDMIX_OK) return report(s);
        }
        for (const auto& kv : train_sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                             kv.c_str());
                return static_cast<int>(MMDMIX_ERR_CONFIG);
            }
            const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
            const mmdmix_status s = mmdmix_config_set(cfg.ptr, key.c_str(), value.c_str());
            if (s != MMDMIX_OK) return report(s);
        }
        std::printf("training -> %s (seed %llu)\n", train_out.c_str(), train_seed);
        const mmdmix_status s = mmdmix_train(cfg.ptr, train_seed, train_out.c_str());
        if (s == MMDMIX_OK) std::printf("done: %s/metrics.csv\n", train_out.c_str());
        return report(s);
    }

    if (*eval) {
        mmdmix_eval_summary summary{};
        const mmdmix_status s =
            mmdmix_eval(eval_checkpoint.c_str(), eval_env.empty() ? nullptr : eval_env.c_str(),
                        eval_episodes, eval_seed, &summary);
        if (s == MMDMIX_OK) {
            std::printf("episodes=%d\n", summary.episodes);
            std::printf("return_mean=%.17g\n", summary.return_mean);
            std::printf("return_median=%.17g\n", summary.return_median);
            std::printf("success_rate=%.17g\n", summary.success_rate);
        }
        return report(s);
    }

    if (*selftest) return report(mmdmix_selftest(fault_abs ? 1u : 0u));

    if (*summarize) {
        std::vector<const char*> dirs;
        dirs.reserve(sum_dirs.size());
        for (const auto& d : sum_dirs) dirs.push_back(d.c_str());
        return report(mmdmix_summarize(dirs.data(), dirs.size(),
                                       sum_out.empty() ? nullptr : sum_out.c_str()));
    }

    return 0;
}
