#pragma once

#include "retopt/collect.hpp"
#include "retopt/policies.hpp"
#include "retopt/qnet.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <string>

namespace retopt {

enum class CountMode { SimilarityKernel, LiteralDistanceSum };

CountMode parse_count_mode(const std::string& name);
const char* count_mode_name(CountMode mode);

struct SpibbConfig {
    double n_wedge = 100.0;
    TrainHyper hyper{};
    CountMode mode = CountMode::SimilarityKernel;
    double kernel_d0 = 0.5;
    // Execute the constrained policy (baseline probabilities on bootstrapped
    // actions, remaining mass on the best free action). Plain greedy argmax is
    // opt-in: it discards the safety constraint at run time.
    bool greedy_execution = false;
};

// Dataset states grouped per action; pseudo-counts and bootstrapped-set
// membership (count <= n_wedge) are computed lazily per query.
class BootstrapIndex {
public:
    BootstrapIndex(const Dataset& dataset, CountMode mode, double kernel_d0, double n_wedge);

    double pseudo_count(const CellObs& s, Action a) const;
    Eigen::Vector3d pseudo_counts(const CellObs& s) const;
    bool is_bootstrapped(const CellObs& s, Action a) const;
    std::array<bool, 3> bootstrapped(const CellObs& s) const;

    double n_wedge() const { return n_wedge_; }
    CountMode mode() const { return mode_; }
    double kernel_d0() const { return kernel_d0_; }
    Eigen::Index rows(Action a) const { return states_[static_cast<std::size_t>(a)].cols(); }

private:
    std::array<Eigen::MatrixXd, 3> states_;  // 4 x n_a, one column per dataset state
    CountMode mode_;
    double kernel_d0_;
    double n_wedge_;
};

// One Q-update target: the next-state backup follows the behavior probabilities
// on bootstrapped actions and takes the max over the rest. With nothing
// bootstrapped this is exactly the plain max target; with everything
// bootstrapped it is exactly the behavior expectation.
double spibb_target(const QNet& net, const BootstrapIndex& index, const Transition& transition,
                    double gamma);

// Offline training on a fixed dataset: epochs x floor(N/batch) minibatches,
// targets recomputed with the current net each update. Returns the final net.
QNet train_spibb(const Dataset& dataset, const SpibbConfig& config, std::uint64_t seed);

// Same loop with the plain max target (no bootstrapping), for comparison runs.
QNet train_offline_dqn(const Dataset& dataset, const TrainHyper& hyper, std::uint64_t seed);

// Execution-time variant: behavior probabilities on bootstrapped actions, all
// remaining mass on the best non-bootstrapped action.
class SpibbProjectedPolicy final : public Policy {
public:
    SpibbProjectedPolicy(QNet net, std::shared_ptr<const BootstrapIndex> index,
                         std::shared_ptr<const Policy> baseline);
    Eigen::Vector3d probs(const CellObs& s, Eigen::Index cell) const override;

private:
    QNet net_;
    std::shared_ptr<const BootstrapIndex> index_;
    std::shared_ptr<const Policy> baseline_;
};

}  // namespace retopt
