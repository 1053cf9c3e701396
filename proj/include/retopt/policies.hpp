#pragma once

#include "retopt/mdp.hpp"
#include "retopt/qnet.hpp"
#include "retopt/rng.hpp"

#include <Eigen/Dense>

#include <memory>

namespace retopt {

struct RuleThresholds {
    double cov_low = 0.7;
    double qual_low = 0.5;
    double cap_low = 0.5;
};

// Deterministic one-hot: low coverage → Down (widen), otherwise low quality or
// low capacity → Up (tighten), otherwise Keep.
Eigen::Vector3d rule_based_probs(const CellObs& s, const RuleThresholds& thresholds = {});

// Argmax with ties broken Keep > Down > Up.
Action greedy_action(const Eigen::Vector3d& action_values);

// Argmax action gets 1 - eps + eps/3, the others eps/3 each.
Eigen::Vector3d eps_greedy_probs(const Eigen::Vector3d& action_values, double eps);
Eigen::Vector3d dqn_eps_greedy_probs(const QNet& net, const CellObs& s, double eps);

// Inverse-CDF draw in canonical action order (Down, Keep, Up).
Action sample_action(const Eigen::Vector3d& probs, Rng& rng);

class Policy {
public:
    virtual ~Policy() = default;
    virtual Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const = 0;
    Action sample(const CellObs& s, Eigen::Index cell, Rng& rng) const;
    std::vector<Action> sample_all(const std::vector<CellObs>& obs, Rng& rng) const;
};

class RuleBasedPolicy final : public Policy {
public:
    explicit RuleBasedPolicy(RuleThresholds thresholds = {});
    Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const override;

private:
    RuleThresholds thresholds_;
};

class RandomPolicy final : public Policy {
public:
    Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const override;
};

// eps = 0 is the greedy policy.
class DqnPolicy final : public Policy {
public:
    DqnPolicy(QNet net, double eps);
    Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const override;
    const QNet& net() const { return net_; }
    double eps() const { return eps_; }

private:
    QNet net_;
    double eps_;
};

// Moves each cell one step toward a fixed per-cell tilt target.
class TiltTargetPolicy final : public Policy {
public:
    TiltTargetPolicy(Eigen::VectorXd targets_deg, NetworkConfig config);
    Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const override;
    const Eigen::VectorXd& targets_deg() const { return targets_deg_; }

private:
    Eigen::VectorXd targets_deg_;
    NetworkConfig config_;
};

struct OptimalSearchResult {
    Eigen::VectorXd targets_deg;
    double avg_reward = 0.0;
    int sweeps = 0;
    bool converged = false;
};

// Greedy coordinate ascent over the integer tilt grid: sweep cells round-robin,
// each time picking the tilt that maximizes the network-average reward with the
// other cells held fixed, until a sweep changes nothing (at most max_sweeps).
OptimalSearchResult optimal_search(const NetworkState& state, const NetworkConfig& config,
                                   const LinkGeometry& geom, int max_sweeps = 10);

// Online epsilon-greedy Q-learning with experience replay and the bootstrapped
// max target; deliberately stoppable long before convergence via `steps`.
QNet train_dqn_baseline(Env& env, const TrainHyper& hyper, int steps, double eps,
                        std::uint64_t seed);

}  // namespace retopt
