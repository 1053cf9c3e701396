#include "retopt/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace retopt {

Eigen::Vector3d rule_based_probs(const CellObs& s, const RuleThresholds& thresholds) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    const double cov = s(1), cap = s(2), qual = s(3);
    if (cov < thresholds.cov_low) {
        p(static_cast<int>(Action::Down)) = 1.0;
    } else if (qual < thresholds.qual_low || cap < thresholds.cap_low) {
        p(static_cast<int>(Action::Up)) = 1.0;
    } else {
        p(static_cast<int>(Action::Keep)) = 1.0;
    }
    return p;
}

Action greedy_action(const Eigen::Vector3d& action_values) {
    const double top = action_values.maxCoeff();
    if (action_values(static_cast<int>(Action::Keep)) == top) return Action::Keep;
    if (action_values(static_cast<int>(Action::Down)) == top) return Action::Down;
    return Action::Up;
}

Eigen::Vector3d eps_greedy_probs(const Eigen::Vector3d& action_values, double eps) {
    if (eps < 0.0 || eps > 1.0) {
        throw std::invalid_argument("eps_greedy_probs: eps outside [0,1]");
    }
    Eigen::Vector3d p = Eigen::Vector3d::Constant(eps / kNumActions);
    p(static_cast<int>(greedy_action(action_values))) += 1.0 - eps;
    return p;
}

Eigen::Vector3d dqn_eps_greedy_probs(const QNet& net, const CellObs& s, double eps) {
    return eps_greedy_probs(net.values(s), eps);
}

Action sample_action(const Eigen::Vector3d& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int a = 0; a < kNumActions - 1; ++a) {
        acc += probs(a);
        if (u < acc) return static_cast<Action>(a);
    }
    return static_cast<Action>(kNumActions - 1);
}

Action Policy::sample(const CellObs& s, Eigen::Index cell, Rng& rng) const {
    return sample_action(probs(s, cell), rng);
}

std::vector<Action> Policy::sample_all(const std::vector<CellObs>& obs, Rng& rng) const {
    std::vector<Action> actions;
    actions.reserve(obs.size());
    for (std::size_t c = 0; c < obs.size(); ++c) {
        actions.push_back(sample(obs[c], static_cast<Eigen::Index>(c), rng));
    }
    return actions;
}

RuleBasedPolicy::RuleBasedPolicy(RuleThresholds thresholds) : thresholds_(thresholds) {}

Eigen::Vector3d RuleBasedPolicy::probs(const CellObs& s, Eigen::Index /*cell*/) const {
    return rule_based_probs(s, thresholds_);
}

Eigen::Vector3d RandomPolicy::probs(const CellObs& /*s*/, Eigen::Index /*cell*/) const {
    return Eigen::Vector3d::Constant(1.0 / kNumActions);
}

DqnPolicy::DqnPolicy(QNet net, double eps) : net_(std::move(net)), eps_(eps) {
    if (eps_ < 0.0 || eps_ > 1.0) {
        throw std::invalid_argument("dqn policy: eps outside [0,1]");
    }
}

Eigen::Vector3d DqnPolicy::probs(const CellObs& s, Eigen::Index /*cell*/) const {
    return eps_greedy_probs(net_.values(s), eps_);
}

TiltTargetPolicy::TiltTargetPolicy(Eigen::VectorXd targets_deg, NetworkConfig config)
    : targets_deg_(std::move(targets_deg)), config_(std::move(config)) {}

Eigen::Vector3d TiltTargetPolicy::probs(const CellObs& s, Eigen::Index cell) const {
    if (cell < 0 || cell >= targets_deg_.size()) {
        throw std::out_of_range("tilt target policy: cell index out of range");
    }
    const double current = denormalize_tilt(s(0), config_);
    const double gap = targets_deg_[cell] - current;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    if (std::abs(gap) < 0.5 * config_.tilt_step_deg) {
        p(static_cast<int>(Action::Keep)) = 1.0;
    } else if (gap > 0.0) {
        p(static_cast<int>(Action::Up)) = 1.0;
    } else {
        p(static_cast<int>(Action::Down)) = 1.0;
    }
    return p;
}

namespace {

double network_avg_reward(const NetworkState& state, const NetworkConfig& config,
                          const LinkGeometry& geom) {
    const auto kpis = compute_kpis(state, config, geom);
    double sum = 0.0;
    for (const auto& k : kpis) sum += reward(k);
    return sum / static_cast<double>(kpis.size());
}

}  // namespace

OptimalSearchResult optimal_search(const NetworkState& state, const NetworkConfig& config,
                                   const LinkGeometry& geom, int max_sweeps) {
    NetworkState work = state;
    const int grid = config.tilt_grid_size();
    double current = network_avg_reward(work, config, geom);

    OptimalSearchResult result;
    result.converged = false;
    while (result.sweeps < max_sweeps && !result.converged) {
        ++result.sweeps;
        bool changed = false;
        for (Eigen::Index c = 0; c < work.tilts_deg.size(); ++c) {
            const double original = work.tilts_deg[c];
            double best_tilt = original;
            double best_val = current;
            for (int g = 0; g < grid; ++g) {
                const double tilt = config.tilt_min_deg + g * config.tilt_step_deg;
                if (tilt == original) continue;
                work.tilts_deg[c] = tilt;
                const double val = network_avg_reward(work, config, geom);
                if (val > best_val + 1e-12) {
                    best_val = val;
                    best_tilt = tilt;
                }
            }
            work.tilts_deg[c] = best_tilt;
            current = best_val;
            if (best_tilt != original) changed = true;
        }
        result.converged = !changed;
    }
    result.targets_deg = work.tilts_deg;
    result.avg_reward = current;
    return result;
}

QNet train_dqn_baseline(Env& env, const TrainHyper& hyper, int steps, double eps,
                        std::uint64_t seed) {
    validate(hyper);
    if (steps < 0) {
        throw std::invalid_argument("train_dqn_baseline: steps must be non-negative");
    }
    QNet net;
    net.init(derive_seed(seed, 1));
    Rng action_rng(derive_seed(seed, 2));
    Rng replay_rng(derive_seed(seed, 3));

    struct Sample {
        CellObs s;
        Action a;
        double r;
        CellObs s_next;
    };
    std::vector<Sample> replay;
    replay.reserve(static_cast<std::size_t>(steps) * static_cast<std::size_t>(env.num_cells()));

    for (int t = 0; t < steps; ++t) {
        const std::vector<CellObs> obs = env.obs();
        std::vector<Action> actions;
        actions.reserve(obs.size());
        for (const auto& s : obs) {
            actions.push_back(sample_action(eps_greedy_probs(net.values(s), eps), action_rng));
        }
        const EnvStep result = env.step(actions);
        for (std::size_t c = 0; c < obs.size(); ++c) {
            replay.push_back({obs[c], actions[c], result.rewards[static_cast<Eigen::Index>(c)],
                              result.next_obs[c]});
        }

        const int batch = hyper.batch_size;
        std::vector<CellObs> batch_obs(static_cast<std::size_t>(batch));
        std::vector<Action> batch_actions(static_cast<std::size_t>(batch));
        Eigen::MatrixXd next_cols(4, batch);
        Eigen::VectorXd rewards(batch);
        for (int i = 0; i < batch; ++i) {
            const auto pick = static_cast<std::size_t>(
                replay_rng.uniform_int(0, static_cast<std::int64_t>(replay.size()) - 1));
            batch_obs[static_cast<std::size_t>(i)] = replay[pick].s;
            batch_actions[static_cast<std::size_t>(i)] = replay[pick].a;
            next_cols.col(i) = replay[pick].s_next;
            rewards(i) = replay[pick].r;
        }
        const Eigen::MatrixXd next_q = net.values_batch(next_cols);
        const Eigen::VectorXd targets =
            rewards + hyper.gamma * next_q.colwise().maxCoeff().transpose();
        net.sgd_step(batch_obs, batch_actions, targets, hyper.learning_rate);
    }
    return net;
}

}  // namespace retopt
