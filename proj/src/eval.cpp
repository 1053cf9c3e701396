#include "retopt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retopt {

std::pair<Eigen::VectorXd, double> avg_network_reward(const Eigen::MatrixXd& rewards) {
    if (rewards.size() == 0) {
        throw std::invalid_argument("avg_network_reward: empty matrix");
    }
    Eigen::VectorXd per_step = rewards.rowwise().mean();
    return {std::move(per_step), rewards.mean()};
}

std::pair<Eigen::VectorXd, double> min_cell_reward(const Eigen::MatrixXd& rewards) {
    if (rewards.size() == 0) {
        throw std::invalid_argument("min_cell_reward: empty matrix");
    }
    Eigen::VectorXd per_step = rewards.rowwise().minCoeff();
    const double avg = per_step.mean();
    return {std::move(per_step), avg};
}

double value_at_risk(const std::vector<double>& values, double level) {
    if (values.empty()) {
        throw std::invalid_argument("value_at_risk: empty input");
    }
    if (level <= 0.0 || level > 1.0) {
        throw std::invalid_argument("value_at_risk: level outside (0,1]");
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    return sorted[k - 1];
}

double cvar(const std::vector<double>& values, double level) {
    const double var = value_at_risk(values, level);
    double sum = 0.0;
    std::size_t count = 0;
    for (const double v : values) {
        if (v <= var) {
            sum += v;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

PolicyFactory fixed_policy(std::shared_ptr<const Policy> policy) {
    return [policy = std::move(policy)](Env&, std::uint64_t) { return policy; };
}

Eigen::MatrixXd rollout_rewards(Env& env, const Policy& policy, std::uint64_t action_seed) {
    const EvalProtocol& protocol = env.protocol();
    Eigen::MatrixXd rewards(protocol.t_epoch, env.num_cells());
    Rng rng(action_seed);
    for (int t = 0; t < protocol.t_epoch; ++t) {
        const std::vector<Action> actions = policy.sample_all(env.obs(), rng);
        const EnvStep result = env.step(actions);
        rewards.row(t) = result.rewards.transpose();
    }
    return rewards;
}

EvalReport evaluate_policy(const PolicyFactory& factory, const NetworkConfig& config,
                           const std::vector<std::uint64_t>& seeds,
                           const EvalProtocol& protocol, double cvar_level) {
    if (seeds.empty()) {
        throw std::invalid_argument("evaluate_policy: at least one seed required");
    }
    validate(protocol);
    const auto runs = static_cast<int>(seeds.size());

    EvalReport report;
    report.runs = runs;
    report.cvar_level = cvar_level;
    report.per_run_avg.resize(runs);
    report.per_run_min_cell.resize(runs);

    Eigen::MatrixXd avg_curves(protocol.t_epoch, runs);  // network mean per step, per run
    for (int k = 0; k < runs; ++k) {
        Env env(config, derive_seed(seeds[static_cast<std::size_t>(k)], streams::network),
                derive_seed(seeds[static_cast<std::size_t>(k)], streams::eval_episode), protocol);
        const std::shared_ptr<const Policy> policy =
            factory(env, seeds[static_cast<std::size_t>(k)]);
        const Eigen::MatrixXd rewards = rollout_rewards(
            env, *policy, derive_seed(seeds[static_cast<std::size_t>(k)], streams::eval_actions));

        if (k == 0) {
            report.per_step = rewards;
        } else {
            report.per_step += rewards;
        }
        auto [avg_curve, avg] = avg_network_reward(rewards);
        auto [min_curve, min_avg] = min_cell_reward(rewards);
        avg_curves.col(k) = avg_curve;
        if (k == 0) {
            report.min_cell_per_step = min_curve;
        } else {
            report.min_cell_per_step += min_curve;
        }
        report.per_run_avg[k] = avg;
        report.per_run_min_cell[k] = min_avg;
    }
    report.per_step /= runs;
    report.min_cell_per_step /= runs;
    report.avg_network_per_step = avg_curves.rowwise().mean();

    report.cvar_per_step.resize(protocol.t_epoch);
    std::vector<double> at_t(static_cast<std::size_t>(runs));
    for (int t = 0; t < protocol.t_epoch; ++t) {
        for (int k = 0; k < runs; ++k) at_t[static_cast<std::size_t>(k)] = avg_curves(t, k);
        report.cvar_per_step[t] = cvar(at_t, cvar_level);
    }

    report.avg_reward = report.per_run_avg.mean();
    report.min_cell_avg = report.per_run_min_cell.mean();
    const auto pop_std = [](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return std::sqrt((v.array() - mean).square().mean());
    };
    report.avg_reward_std = pop_std(report.per_run_avg);
    report.min_cell_std = pop_std(report.per_run_min_cell);

    const std::vector<double> run_avgs(report.per_run_avg.data(),
                                       report.per_run_avg.data() + report.per_run_avg.size());
    report.cvar = cvar(run_avgs, cvar_level);
    return report;
}

}  // namespace retopt
