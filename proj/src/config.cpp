#include "config.hpp"

#include "env.hpp"
#include "errors.hpp"
#include "grid_capture.hpp"
#include "matrix_game.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mmdmix {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expect) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expect);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) bad_value(key, value, "a number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(key, value, "a number");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) bad_value(key, value, "an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(key, value, "an integer");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "a boolean (true/false)");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_value(key, value, "a comma-separated number list");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) bad_value(key, value, "a comma-separated number list");
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config invariant violated: " + what);
}

} // namespace

Kernel ExperimentConfig::kernel() const {
    if (kernel_kind == "triangle") return Kernel::triangle(kernel_p);
    return Kernel::gaussian(kernel_bandwidths);
}

double ExperimentConfig::epsilon_at(long long env_steps) const {
    if (epsilon_anneal_steps <= 0) return epsilon_finish;
    const double t = std::min(1.0, static_cast<double>(env_steps) /
                                       static_cast<double>(epsilon_anneal_steps));
    return epsilon_start + (epsilon_finish - epsilon_start) * t;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "env.name") {
        if (value != "matrix_det" && value != "matrix_stoch" && value != "matrix_file" &&
            value != "grid")
            throw ConfigError("config key 'env.name': unknown environment '" + value + "'");
        env_name = value;
    } else if (key == "env.payoff_file") {
        payoff_file = value;
    } else if (key == "env.grid_size") {
        grid_size = static_cast<int>(parse_int(key, value));
        require(grid_size >= 2, "env.grid_size >= 2");
    } else if (key == "env.episode_limit") {
        episode_limit = static_cast<int>(parse_int(key, value));
        require(episode_limit >= 1, "env.episode_limit >= 1");
    } else if (key == "mixer.kind") {
        if (value != "vdn" && value != "qmix" && value != "mmdmix")
            throw ConfigError("config key 'mixer.kind': unknown mixer '" + value + "'");
        mixer_kind = value;
    } else if (key == "mixer.embed_dim") {
        embed_dim = static_cast<int>(parse_int(key, value));
        require(embed_dim >= 1, "mixer.embed_dim >= 1");
    } else if (key == "mixer.n_particles") {
        n_particles = static_cast<int>(parse_int(key, value));
        require(n_particles >= 1, "mixer.n_particles >= 1");
    } else if (key == "mixer.n_combined") {
        n_combined = static_cast<int>(parse_int(key, value));
        require(n_combined >= 1, "mixer.n_combined >= 1");
    } else if (key == "rem.enabled") {
        rem_enabled = parse_bool(key, value);
    } else if (key == "kernel.kind") {
        if (value != "triangle" && value != "gaussian")
            throw ConfigError("config key 'kernel.kind': unknown kernel '" + value + "'");
        kernel_kind = value;
    } else if (key == "kernel.p") {
        kernel_p = parse_double(key, value);
        require(kernel_p > 0.0 && kernel_p <= 2.0, "kernel.p in (0, 2]");
    } else if (key == "kernel.bandwidths") {
        kernel_bandwidths = parse_double_list(key, value);
        for (double h : kernel_bandwidths)
            require(h > 0.0, "kernel.bandwidths strictly positive");
    } else if (key == "agent.hidden_dim") {
        hidden_dim = static_cast<int>(parse_int(key, value));
        require(hidden_dim >= 1, "agent.hidden_dim >= 1");
    } else if (key == "epsilon.start") {
        epsilon_start = parse_double(key, value);
        require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon.start in [0, 1]");
    } else if (key == "epsilon.finish") {
        epsilon_finish = parse_double(key, value);
        require(epsilon_finish >= 0.0 && epsilon_finish <= 1.0, "epsilon.finish in [0, 1]");
    } else if (key == "epsilon.anneal_steps") {
        epsilon_anneal_steps = parse_int(key, value);
        require(epsilon_anneal_steps >= 1, "epsilon.anneal_steps >= 1");
    } else if (key == "train.gamma") {
        gamma = parse_double(key, value);
        require(gamma >= 0.0 && gamma <= 1.0, "train.gamma in [0, 1]");
    } else if (key == "train.lr") {
        lr = parse_double(key, value);
        require(lr > 0.0, "train.lr > 0");
    } else if (key == "train.rmsprop_decay") {
        rmsprop_decay = parse_double(key, value);
        require(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0, "train.rmsprop_decay in [0, 1)");
    } else if (key == "train.rmsprop_eps") {
        rmsprop_eps = parse_double(key, value);
        require(rmsprop_eps > 0.0, "train.rmsprop_eps > 0");
    } else if (key == "train.buffer_capacity") {
        buffer_capacity = static_cast<int>(parse_int(key, value));
        require(buffer_capacity >= 1, "train.buffer_capacity >= 1");
    } else if (key == "train.batch_size") {
        batch_size = static_cast<int>(parse_int(key, value));
        require(batch_size >= 1, "train.batch_size >= 1");
    } else if (key == "train.target_period") {
        target_period = static_cast<int>(parse_int(key, value));
        require(target_period >= 1, "train.target_period >= 1");
    } else if (key == "train.total_steps") {
        total_steps = parse_int(key, value);
        require(total_steps >= 0, "train.total_steps >= 0");
    } else if (key == "eval.interval") {
        eval_interval = parse_int(key, value);
        require(eval_interval >= 1, "eval.interval >= 1");
    } else if (key == "eval.episodes") {
        eval_episodes = static_cast<int>(parse_int(key, value));
        require(eval_episodes >= 1, "eval.episodes >= 1");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void ExperimentConfig::validate() const {
    require(batch_size <= buffer_capacity, "train.batch_size <= train.buffer_capacity");
    if (env_name == "matrix_file")
        require(!payoff_file.empty(), "env.payoff_file set when env.name = matrix_file");
    kernel().validate();
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["env.name"] = env_name;
    kv["env.payoff_file"] = payoff_file;
    kv["env.grid_size"] = std::to_string(grid_size);
    kv["env.episode_limit"] = std::to_string(episode_limit);
    kv["mixer.kind"] = mixer_kind;
    kv["mixer.embed_dim"] = std::to_string(embed_dim);
    kv["mixer.n_particles"] = std::to_string(n_particles);
    kv["mixer.n_combined"] = std::to_string(n_combined);
    kv["rem.enabled"] = rem_enabled ? "true" : "false";
    kv["kernel.kind"] = kernel_kind;
    kv["kernel.p"] = format_double(kernel_p);
    std::string bw;
    for (std::size_t i = 0; i < kernel_bandwidths.size(); ++i) {
        if (i) bw += ",";
        bw += format_double(kernel_bandwidths[i]);
    }
    kv["kernel.bandwidths"] = bw;
    kv["agent.hidden_dim"] = std::to_string(hidden_dim);
    kv["epsilon.start"] = format_double(epsilon_start);
    kv["epsilon.finish"] = format_double(epsilon_finish);
    kv["epsilon.anneal_steps"] = std::to_string(epsilon_anneal_steps);
    kv["train.gamma"] = format_double(gamma);
    kv["train.lr"] = format_double(lr);
    kv["train.rmsprop_decay"] = format_double(rmsprop_decay);
    kv["train.rmsprop_eps"] = format_double(rmsprop_eps);
    kv["train.buffer_capacity"] = std::to_string(buffer_capacity);
    kv["train.batch_size"] = std::to_string(batch_size);
    kv["train.target_period"] = std::to_string(target_period);
    kv["train.total_steps"] = std::to_string(total_steps);
    kv["eval.interval"] = std::to_string(eval_interval);
    kv["eval.episodes"] = std::to_string(eval_episodes);
    return kv;
}

std::string ExperimentConfig::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : to_kv()) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : kv) cfg.set(k, v);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected 'key = value', got '" << line << "'";
            throw ConfigError(os.str());
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    ExperimentConfig cfg;
    {
        // parse file content without final validation, overrides still pending
        ExperimentConfig fresh;
        std::istringstream text(buf.str());
        std::string line;
        int lineno = 0;
        while (std::getline(text, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                std::ostringstream os;
                os << path << ":" << lineno << ": expected 'key = value', got '" << line << "'";
                throw ConfigError(os.str());
            }
            fresh.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        cfg = fresh;
    }
    for (const auto& ov : overrides) {
        auto [k, v] = split_override(ov);
        cfg.set(k, v);
    }
    cfg.validate();
    return cfg;
}

std::pair<std::string, std::string> split_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value, got '" + text + "'");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::unique_ptr<Env> make_env(const ExperimentConfig& cfg) {
    if (cfg.env_name == "matrix_det")
        return std::make_unique<MatrixGame>(MatrixGame::deterministic_default());
    if (cfg.env_name == "matrix_stoch")
        return std::make_unique<MatrixGame>(MatrixGame::stochastic_default());
    if (cfg.env_name == "matrix_file")
        return std::make_unique<MatrixGame>(MatrixGame::from_payoff_file(cfg.payoff_file));
    if (cfg.env_name == "grid") {
        GridCapture::Params p;
        p.grid_size = cfg.grid_size;
        p.episode_limit = cfg.episode_limit;
        return std::make_unique<GridCapture>(p);
    }
    throw ConfigError("unknown environment '" + cfg.env_name + "'");
}

} // namespace mmdmix
