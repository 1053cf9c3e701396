#include "retopt/config_io.hpp"

#include "retopt/textio.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace retopt {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"num_bs", [](RunConfig& c, const std::string& v) { c.network.num_bs = static_cast<Eigen::Index>(parse_int(v)); }},
        {"num_cells", [](RunConfig& c, const std::string& v) { c.network.num_cells = static_cast<Eigen::Index>(parse_int(v)); }},
        {"num_ues", [](RunConfig& c, const std::string& v) { c.network.num_ues = static_cast<Eigen::Index>(parse_int(v)); }},
        {"carrier_freq_ghz", [](RunConfig& c, const std::string& v) { c.network.carrier_freq_ghz = parse_double(v); }},
        {"traffic_mean_mbps", [](RunConfig& c, const std::string& v) { c.network.traffic_mean_mbps = parse_double(v); }},
        {"traffic_var_mbps2", [](RunConfig& c, const std::string& v) { c.network.traffic_var_mbps2 = parse_double(v); }},
        {"antenna_height_m", [](RunConfig& c, const std::string& v) { c.network.antenna_height_m = parse_double(v); }},
        {"tilt_min_deg", [](RunConfig& c, const std::string& v) { c.network.tilt_min_deg = parse_double(v); }},
        {"tilt_max_deg", [](RunConfig& c, const std::string& v) { c.network.tilt_max_deg = parse_double(v); }},
        {"tilt_step_deg", [](RunConfig& c, const std::string& v) { c.network.tilt_step_deg = parse_double(v); }},
        {"inter_site_distance_m", [](RunConfig& c, const std::string& v) { c.network.inter_site_distance_m = parse_double(v); }},
        {"tx_power_dbm", [](RunConfig& c, const std::string& v) { c.network.tx_power_dbm = parse_double(v); }},
        {"rsrp_cov_threshold_dbm", [](RunConfig& c, const std::string& v) { c.network.rsrp_cov_threshold_dbm = parse_double(v); }},
        {"shadow_sigma_db", [](RunConfig& c, const std::string& v) { c.network.shadow_sigma_db = parse_double(v); }},
        {"rng_seed", [](RunConfig& c, const std::string& v) { c.network.rng_seed = static_cast<std::uint64_t>(parse_int(v)); }},
        {"t_episode", [](RunConfig& c, const std::string& v) { c.protocol.t_episode = static_cast<int>(parse_int(v)); }},
        {"n_episode", [](RunConfig& c, const std::string& v) { c.protocol.n_episode = static_cast<int>(parse_int(v)); }},
        {"t_epoch", [](RunConfig& c, const std::string& v) { c.protocol.t_epoch = static_cast<int>(parse_int(v)); }},
        {"gamma", [](RunConfig& c, const std::string& v) { c.hyper.gamma = parse_double(v); }},
        {"learning_rate", [](RunConfig& c, const std::string& v) { c.hyper.learning_rate = parse_double(v); }},
        {"batch_size", [](RunConfig& c, const std::string& v) { c.hyper.batch_size = static_cast<int>(parse_int(v)); }},
        {"epochs", [](RunConfig& c, const std::string& v) { c.hyper.epochs = static_cast<int>(parse_int(v)); }},
        {"rule_cov_low", [](RunConfig& c, const std::string& v) { c.rule.cov_low = parse_double(v); }},
        {"rule_qual_low", [](RunConfig& c, const std::string& v) { c.rule.qual_low = parse_double(v); }},
        {"rule_cap_low", [](RunConfig& c, const std::string& v) { c.rule.cap_low = parse_double(v); }},
        {"count_mode", [](RunConfig& c, const std::string& v) { c.count_mode = parse_count_mode(v); }},
        {"kernel_d0", [](RunConfig& c, const std::string& v) { c.kernel_d0 = parse_double(v); }},
        {"n_wedge", [](RunConfig& c, const std::string& v) { c.n_wedge = parse_double(v); }},
        {"greedy_execution", [](RunConfig& c, const std::string& v) { c.greedy_execution = parse_bool(v); }},
        {"collect_steps", [](RunConfig& c, const std::string& v) { c.collect_steps = static_cast<int>(parse_int(v)); }},
        {"behavior_eps", [](RunConfig& c, const std::string& v) { c.behavior_eps = parse_double(v); }},
        {"dqn_baseline_steps", [](RunConfig& c, const std::string& v) { c.dqn_baseline_steps = static_cast<int>(parse_int(v)); }},
        {"dqn_train_eps", [](RunConfig& c, const std::string& v) { c.dqn_train_eps = parse_double(v); }},
        {"cvar_level", [](RunConfig& c, const std::string& v) { c.cvar_level = parse_double(v); }},
    };
    return table;
}

}  // namespace

void validate(const RunConfig& config) {
    validate(config.network);
    validate(config.protocol);
    validate(config.hyper);
    if (config.kernel_d0 <= 0.0) {
        throw std::invalid_argument("config: kernel_d0 must be positive");
    }
    if (config.n_wedge < 0.0) {
        throw std::invalid_argument("config: n_wedge must be non-negative");
    }
    if (config.collect_steps < 1) {
        throw std::invalid_argument("config: collect_steps must be at least 1");
    }
    if (config.behavior_eps < 0.0 || config.behavior_eps > 1.0 || config.dqn_train_eps < 0.0 ||
        config.dqn_train_eps > 1.0) {
        throw std::invalid_argument("config: epsilons must lie in [0,1]");
    }
    if (config.dqn_baseline_steps < 0) {
        throw std::invalid_argument("config: dqn_baseline_steps must be non-negative");
    }
    if (config.cvar_level <= 0.0 || config.cvar_level > 1.0) {
        throw std::invalid_argument("config: cvar_level must lie in (0,1]");
    }
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
        try {
            it->second(config, value);
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + key +
                                        "): " + e.what());
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    const auto put = [&out](const char* key, const std::string& value) {
        out << key << " = " << value << '\n';
    };
    put("num_bs", std::to_string(c.network.num_bs));
    put("num_cells", std::to_string(c.network.num_cells));
    put("num_ues", std::to_string(c.network.num_ues));
    put("carrier_freq_ghz", format_double(c.network.carrier_freq_ghz));
    put("traffic_mean_mbps", format_double(c.network.traffic_mean_mbps));
    put("traffic_var_mbps2", format_double(c.network.traffic_var_mbps2));
    put("antenna_height_m", format_double(c.network.antenna_height_m));
    put("tilt_min_deg", format_double(c.network.tilt_min_deg));
    put("tilt_max_deg", format_double(c.network.tilt_max_deg));
    put("tilt_step_deg", format_double(c.network.tilt_step_deg));
    put("inter_site_distance_m", format_double(c.network.inter_site_distance_m));
    put("tx_power_dbm", format_double(c.network.tx_power_dbm));
    put("rsrp_cov_threshold_dbm", format_double(c.network.rsrp_cov_threshold_dbm));
    put("shadow_sigma_db", format_double(c.network.shadow_sigma_db));
    put("rng_seed", std::to_string(c.network.rng_seed));
    put("t_episode", std::to_string(c.protocol.t_episode));
    put("n_episode", std::to_string(c.protocol.n_episode));
    put("t_epoch", std::to_string(c.protocol.t_epoch));
    put("gamma", format_double(c.hyper.gamma));
    put("learning_rate", format_double(c.hyper.learning_rate));
    put("batch_size", std::to_string(c.hyper.batch_size));
    put("epochs", std::to_string(c.hyper.epochs));
    put("rule_cov_low", format_double(c.rule.cov_low));
    put("rule_qual_low", format_double(c.rule.qual_low));
    put("rule_cap_low", format_double(c.rule.cap_low));
    put("count_mode", count_mode_name(c.count_mode));
    put("kernel_d0", format_double(c.kernel_d0));
    put("n_wedge", format_double(c.n_wedge));
    put("greedy_execution", c.greedy_execution ? "true" : "false");
    put("collect_steps", std::to_string(c.collect_steps));
    put("behavior_eps", format_double(c.behavior_eps));
    put("dqn_baseline_steps", std::to_string(c.dqn_baseline_steps));
    put("dqn_train_eps", format_double(c.dqn_train_eps));
    put("cvar_level", format_double(c.cvar_level));
    return out.str();
}

std::uint64_t config_hash(const RunConfig& config) {
    RunConfig canon = config;
    canon.network.rng_seed = 0;  // seeds are embedded in artifact names instead
    canon.n_wedge = 100.0;       // grid parameter, likewise named per artifact
    return fnv1a64(serialize_config(canon));
}

SpibbConfig make_spibb_config(const RunConfig& config) {
    SpibbConfig spibb;
    spibb.n_wedge = config.n_wedge;
    spibb.hyper = config.hyper;
    spibb.mode = config.count_mode;
    spibb.kernel_d0 = config.kernel_d0;
    spibb.greedy_execution = config.greedy_execution;
    return spibb;
}

}  // namespace retopt
