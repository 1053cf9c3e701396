#pragma once

#include "retopt/netsim.hpp"
#include "retopt/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace retopt {

// Per-cell observation [normalized tilt, Cov, Cap, Qual], each in [0, 1].
using CellObs = Eigen::Vector4d;

enum class Action : int { Down = 0, Keep = 1, Up = 2 };
inline constexpr std::array<Action, 3> kAllActions{Action::Down, Action::Keep, Action::Up};
inline constexpr int kNumActions = 3;

inline double action_delta_deg(Action a, const NetworkConfig& config) {
    switch (a) {
        case Action::Down: return -config.tilt_step_deg;
        case Action::Keep: return 0.0;
        case Action::Up: return config.tilt_step_deg;
    }
    return 0.0;
}

const char* action_name(Action a);

double normalize_tilt(double tilt_deg, const NetworkConfig& config);
double denormalize_tilt(double tilt_norm, const NetworkConfig& config);

// r = ln(1 + cov^2 + cap^2 + qual^2), in [0, ln 4] for KPIs in [0, 1].
double reward(const CellKpis& kpis);

CellObs make_obs(double tilt_deg, const CellKpis& kpis, const NetworkConfig& config);

CellObs observe(const NetworkState& state, const NetworkConfig& config, Eigen::Index cell);

std::vector<CellObs> observe_all(const NetworkState& state, const NetworkConfig& config,
                                 const LinkGeometry* geom = nullptr);

struct StepResult {
    NetworkState state;
    std::vector<CellObs> obs;  // next observation per cell
    Eigen::VectorXd rewards;   // reward per cell at the new state
};

// All tilt changes are applied simultaneously, then KPIs are recomputed once.
StepResult step(const NetworkState& state, const NetworkConfig& config,
                const std::vector<Action>& actions, const LinkGeometry* geom = nullptr);

// Episode reset: every tilt redrawn uniformly on the grid; UE layout untouched.
NetworkState reset_episode(NetworkState state, const NetworkConfig& config, Rng& rng);
NetworkState reset_episode(NetworkState state, const NetworkConfig& config, std::uint64_t seed);

// Test-epoch schedule: t_epoch steps split into episodes of t_episode steps
// with a uniform-random tilt reset at each episode start.
struct EvalProtocol {
    int t_episode = 20;
    int n_episode = 25;
    int t_epoch = 500;
};

void validate(const EvalProtocol& protocol);

struct EnvStep {
    Eigen::VectorXd rewards;        // per-cell reward at the post-action state
    std::vector<CellObs> next_obs;  // post-action observation, before any reset
    bool episode_end = false;
};

// Stateful rollout wrapper: one fixed UE layout (network_seed), cached link
// geometry, and automatic uniform tilt resets at episode boundaries driven by
// episode_seed. obs() is the observation the next action should be chosen from.
class Env {
public:
    Env(NetworkConfig config, std::uint64_t network_seed, std::uint64_t episode_seed,
        EvalProtocol protocol = {});

    const NetworkConfig& config() const { return config_; }
    const NetworkState& state() const { return state_; }
    const LinkGeometry& geometry() const { return geom_; }
    const EvalProtocol& protocol() const { return protocol_; }
    const std::vector<CellObs>& obs() const { return obs_; }
    Eigen::Index num_cells() const { return state_.tilts_deg.size(); }
    int t() const { return t_; }
    int episode() const { return t_ / protocol_.t_episode; }

    EnvStep step(const std::vector<Action>& actions);

    // Restart the epoch clock and redraw tilts for a fresh first episode.
    void begin_epoch();

private:
    NetworkConfig config_;
    EvalProtocol protocol_;
    NetworkState state_;
    LinkGeometry geom_;
    Rng episode_rng_;
    std::vector<CellObs> obs_;
    int t_ = 0;
};

}  // namespace retopt
