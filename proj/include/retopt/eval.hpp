#pragma once

#include "retopt/mdp.hpp"
#include "retopt/policies.hpp"
#include "retopt/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace retopt {

// Per-step network average and its time average.
std::pair<Eigen::VectorXd, double> avg_network_reward(const Eigen::MatrixXd& rewards);
// Per-step worst cell and its time average.
std::pair<Eigen::VectorXd, double> min_cell_reward(const Eigen::MatrixXd& rewards);

// Lower empirical quantile: smallest value v with P[x <= v] >= level.
double value_at_risk(const std::vector<double>& values, double level);
// Mean of every value at or below the VaR.
double cvar(const std::vector<double>& values, double level);

struct EvalReport {
    Eigen::MatrixXd per_step;              // t_epoch x cells, mean over runs
    Eigen::VectorXd avg_network_per_step;  // network mean at each step, mean over runs
    Eigen::VectorXd min_cell_per_step;     // worst cell at each step, mean over runs
    Eigen::VectorXd cvar_per_step;         // CVaR over runs of the network mean at each step
    Eigen::VectorXd per_run_avg;           // one average reward per run
    Eigen::VectorXd per_run_min_cell;      // one time-averaged worst-cell reward per run
    double avg_reward = 0.0;
    double avg_reward_std = 0.0;
    double min_cell_avg = 0.0;
    double min_cell_std = 0.0;
    int runs = 0;
    double cvar_level = 0.05;
    double cvar = 0.0;  // CVaR over the per-run averages
};

// Built once per run, after the run's environment exists: policies that depend
// on the concrete network (per-run nets, tilt-target search) hook in here.
using PolicyFactory =
    std::function<std::shared_ptr<const Policy>(Env& env, std::uint64_t run_seed)>;

PolicyFactory fixed_policy(std::shared_ptr<const Policy> policy);

// One epoch of t_epoch steps in a freshly constructed env; row t holds the
// per-cell rewards after step t.
Eigen::MatrixXd rollout_rewards(Env& env, const Policy& policy, std::uint64_t action_seed);

// K independent runs: per seed a fresh network (layout stream `network`,
// episode stream `eval_episode`, action stream `eval_actions`), shared across
// policies so comparisons are paired.
EvalReport evaluate_policy(const PolicyFactory& factory, const NetworkConfig& config,
                           const std::vector<std::uint64_t>& seeds,
                           const EvalProtocol& protocol = {}, double cvar_level = 0.05);

}  // namespace retopt
