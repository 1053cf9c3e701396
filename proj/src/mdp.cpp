#include "retopt/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace retopt {

const char* action_name(Action a) {
    switch (a) {
        case Action::Down: return "down";
        case Action::Keep: return "keep";
        case Action::Up: return "up";
    }
    return "?";
}

double normalize_tilt(double tilt_deg, const NetworkConfig& config) {
    const double span = config.tilt_max_deg - config.tilt_min_deg;
    return (tilt_deg - config.tilt_min_deg) / span;
}

double denormalize_tilt(double tilt_norm, const NetworkConfig& config) {
    const double span = config.tilt_max_deg - config.tilt_min_deg;
    return config.tilt_min_deg + tilt_norm * span;
}

double reward(const CellKpis& kpis) {
    return std::log(1.0 + kpis.cov * kpis.cov + kpis.cap * kpis.cap + kpis.qual * kpis.qual);
}

CellObs make_obs(double tilt_deg, const CellKpis& kpis, const NetworkConfig& config) {
    CellObs obs;
    obs << normalize_tilt(tilt_deg, config), kpis.cov, kpis.cap, kpis.qual;
    return obs;
}

CellObs observe(const NetworkState& state, const NetworkConfig& config, Eigen::Index cell) {
    if (cell < 0 || cell >= state.tilts_deg.size()) {
        throw std::out_of_range("observe: cell index out of range");
    }
    const auto kpis = compute_kpis(state, config);
    return make_obs(state.tilts_deg[cell], kpis[static_cast<std::size_t>(cell)], config);
}

std::vector<CellObs> observe_all(const NetworkState& state, const NetworkConfig& config,
                                 const LinkGeometry* geom) {
    const auto kpis = geom ? compute_kpis(state, config, *geom) : compute_kpis(state, config);
    std::vector<CellObs> obs;
    obs.reserve(kpis.size());
    for (Eigen::Index c = 0; c < state.tilts_deg.size(); ++c) {
        obs.push_back(make_obs(state.tilts_deg[c], kpis[static_cast<std::size_t>(c)], config));
    }
    return obs;
}

StepResult step(const NetworkState& state, const NetworkConfig& config,
                const std::vector<Action>& actions, const LinkGeometry* geom) {
    const auto cells = static_cast<std::size_t>(state.tilts_deg.size());
    if (actions.size() != cells) {
        throw std::invalid_argument("step: one action per cell required");
    }
    StepResult result;
    result.state = state;
    for (std::size_t c = 0; c < cells; ++c) {
        const double delta = action_delta_deg(actions[c], config);
        const double moved = state.tilts_deg[static_cast<Eigen::Index>(c)] + delta;
        result.state.tilts_deg[static_cast<Eigen::Index>(c)] =
            std::clamp(moved, config.tilt_min_deg, config.tilt_max_deg);
    }
    const auto kpis = geom ? compute_kpis(result.state, config, *geom)
                           : compute_kpis(result.state, config);
    result.obs.reserve(cells);
    result.rewards.resize(static_cast<Eigen::Index>(cells));
    for (std::size_t c = 0; c < cells; ++c) {
        result.obs.push_back(
            make_obs(result.state.tilts_deg[static_cast<Eigen::Index>(c)], kpis[c], config));
        result.rewards[static_cast<Eigen::Index>(c)] = reward(kpis[c]);
    }
    return result;
}

NetworkState reset_episode(NetworkState state, const NetworkConfig& config, Rng& rng) {
    const int steps = config.tilt_grid_size();
    for (Eigen::Index c = 0; c < state.tilts_deg.size(); ++c) {
        const int k = static_cast<int>(rng.uniform_int(0, steps - 1));
        state.tilts_deg[c] = config.tilt_min_deg + k * config.tilt_step_deg;
    }
    return state;
}

NetworkState reset_episode(NetworkState state, const NetworkConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return reset_episode(std::move(state), config, rng);
}

void validate(const EvalProtocol& protocol) {
    if (protocol.t_episode <= 0 || protocol.n_episode <= 0 || protocol.t_epoch <= 0) {
        throw std::invalid_argument("protocol: all step counts must be positive");
    }
    if (protocol.t_episode * protocol.n_episode != protocol.t_epoch) {
        throw std::invalid_argument("protocol: t_episode * n_episode must equal t_epoch");
    }
}

Env::Env(NetworkConfig config, std::uint64_t network_seed, std::uint64_t episode_seed,
         EvalProtocol protocol)
    : config_(std::move(config)), protocol_(protocol), episode_rng_(episode_seed) {
    validate(protocol_);
    config_.rng_seed = network_seed;
    state_ = build_network(config_);
    geom_ = make_link_geometry(state_, config_);
    begin_epoch();
}

void Env::begin_epoch() {
    t_ = 0;
    state_ = reset_episode(std::move(state_), config_, episode_rng_);
    obs_ = observe_all(state_, config_, &geom_);
}

EnvStep Env::step(const std::vector<Action>& actions) {
    StepResult result = retopt::step(state_, config_, actions, &geom_);
    state_ = std::move(result.state);
    EnvStep out;
    out.rewards = std::move(result.rewards);
    out.next_obs = std::move(result.obs);
    ++t_;
    out.episode_end = (t_ % protocol_.t_episode == 0);
    if (out.episode_end) {
        state_ = reset_episode(std::move(state_), config_, episode_rng_);
        obs_ = observe_all(state_, config_, &geom_);
    } else {
        obs_ = out.next_obs;
    }
    return out;
}

}  // namespace retopt
