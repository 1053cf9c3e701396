#include "retopt/spibb.hpp"

#include "retopt/rng.hpp"

#include <iostream>
#include <limits>
#include <stdexcept>

namespace retopt {

CountMode parse_count_mode(const std::string& name) {
    if (name == "kernel") return CountMode::SimilarityKernel;
    if (name == "literal") return CountMode::LiteralDistanceSum;
    throw std::invalid_argument("unknown count mode: " + name + " (expected kernel|literal)");
}

const char* count_mode_name(CountMode mode) {
    return mode == CountMode::SimilarityKernel ? "kernel" : "literal";
}

BootstrapIndex::BootstrapIndex(const Dataset& dataset, CountMode mode, double kernel_d0,
                               double n_wedge)
    : mode_(mode), kernel_d0_(kernel_d0), n_wedge_(n_wedge) {
    if (dataset.rows.empty()) {
        throw std::invalid_argument("bootstrap index: empty dataset");
    }
    if (kernel_d0_ <= 0.0) {
        throw std::invalid_argument("bootstrap index: kernel_d0 must be positive");
    }
    if (n_wedge_ < 0.0) {
        throw std::invalid_argument("bootstrap index: n_wedge must be non-negative");
    }
    std::array<std::vector<const Transition*>, 3> by_action;
    for (const Transition& row : dataset.rows) {
        by_action[static_cast<std::size_t>(row.a)].push_back(&row);
    }
    for (std::size_t a = 0; a < by_action.size(); ++a) {
        states_[a].resize(4, static_cast<Eigen::Index>(by_action[a].size()));
        for (std::size_t i = 0; i < by_action[a].size(); ++i) {
            states_[a].col(static_cast<Eigen::Index>(i)) = by_action[a][i]->s;
        }
    }
}

double BootstrapIndex::pseudo_count(const CellObs& s, Action a) const {
    const Eigen::MatrixXd& pts = states_[static_cast<std::size_t>(a)];
    // Sequential scalar accumulation in dataset order: the result is then
    // bit-reproducible and matches a naive loop over the rows term by term.
    double count = 0.0;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        const double dist = (CellObs(pts.col(j)) - s).norm();
        count += mode_ == CountMode::SimilarityKernel
                     ? std::max(0.0, 1.0 - dist / kernel_d0_)
                     : dist;
    }
    return count;
}

Eigen::Vector3d BootstrapIndex::pseudo_counts(const CellObs& s) const {
    Eigen::Vector3d counts;
    for (int a = 0; a < kNumActions; ++a) {
        counts(a) = pseudo_count(s, static_cast<Action>(a));
    }
    return counts;
}

bool BootstrapIndex::is_bootstrapped(const CellObs& s, Action a) const {
    return pseudo_count(s, a) <= n_wedge_;
}

std::array<bool, 3> BootstrapIndex::bootstrapped(const CellObs& s) const {
    std::array<bool, 3> flags{};
    for (int a = 0; a < kNumActions; ++a) {
        flags[static_cast<std::size_t>(a)] = is_bootstrapped(s, static_cast<Action>(a));
    }
    return flags;
}

double spibb_target(const QNet& net, const BootstrapIndex& index, const Transition& transition,
                    double gamma) {
    const Eigen::Vector3d q = net.values(transition.s_next);
    const auto boot = index.bootstrapped(transition.s_next);
    const bool any_boot = boot[0] || boot[1] || boot[2];
    const bool all_boot = boot[0] && boot[1] && boot[2];
    if (!any_boot) {
        return transition.r + gamma * q.maxCoeff();
    }
    if (all_boot) {
        return transition.r + gamma * transition.pi_b.dot(q);
    }
    double boot_sum = 0.0;
    double free_mass = 0.0;
    double free_max = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) {
        if (boot[static_cast<std::size_t>(a)]) {
            boot_sum += transition.pi_b(a) * q(a);
        } else {
            free_mass += transition.pi_b(a);
            free_max = std::max(free_max, q(a));
        }
    }
    return transition.r + gamma * (boot_sum + free_mass * free_max);
}

namespace {

template <typename TargetFn>
QNet train_offline_loop(const Dataset& dataset, const TrainHyper& hyper, std::uint64_t seed,
                        TargetFn&& target_fn) {
    validate(hyper);
    if (dataset.rows.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    QNet net;
    net.init(derive_seed(seed, 1));
    Rng batch_rng(derive_seed(seed, 2));

    const auto n = static_cast<std::int64_t>(dataset.rows.size());
    int batch = hyper.batch_size;
    int batches_per_epoch = static_cast<int>(n / batch);
    if (batches_per_epoch == 0) {
        std::cerr << "warning: batch size " << batch << " exceeds dataset size " << n
                  << "; using one full batch per epoch\n";
        batch = static_cast<int>(n);
        batches_per_epoch = 1;
    }

    std::vector<CellObs> obs(static_cast<std::size_t>(batch));
    std::vector<Action> actions(static_cast<std::size_t>(batch));
    std::vector<const Transition*> rows(static_cast<std::size_t>(batch));
    Eigen::VectorXd targets(batch);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (int b = 0; b < batches_per_epoch; ++b) {
            for (int i = 0; i < batch; ++i) {
                const auto pick = static_cast<std::size_t>(batch_rng.uniform_int(0, n - 1));
                rows[static_cast<std::size_t>(i)] = &dataset.rows[pick];
                obs[static_cast<std::size_t>(i)] = dataset.rows[pick].s;
                actions[static_cast<std::size_t>(i)] = dataset.rows[pick].a;
            }
            for (int i = 0; i < batch; ++i) {
                targets(i) = target_fn(net, *rows[static_cast<std::size_t>(i)]);
            }
            net.sgd_step(obs, actions, targets, hyper.learning_rate);
        }
    }
    return net;
}

}  // namespace

QNet train_spibb(const Dataset& dataset, const SpibbConfig& config, std::uint64_t seed) {
    const BootstrapIndex index(dataset, config.mode, config.kernel_d0, config.n_wedge);
    const double gamma = config.hyper.gamma;
    return train_offline_loop(dataset, config.hyper, seed,
                              [&index, gamma](const QNet& net, const Transition& tr) {
                                  return spibb_target(net, index, tr, gamma);
                              });
}

QNet train_offline_dqn(const Dataset& dataset, const TrainHyper& hyper, std::uint64_t seed) {
    const double gamma = hyper.gamma;
    return train_offline_loop(dataset, hyper, seed,
                              [gamma](const QNet& net, const Transition& tr) {
                                  return tr.r + gamma * net.values(tr.s_next).maxCoeff();
                              });
}

SpibbProjectedPolicy::SpibbProjectedPolicy(QNet net, std::shared_ptr<const BootstrapIndex> index,
                                           std::shared_ptr<const Policy> baseline)
    : net_(std::move(net)), index_(std::move(index)), baseline_(std::move(baseline)) {
    if (!index_ || !baseline_) {
        throw std::invalid_argument("projected policy: index and baseline required");
    }
}

Eigen::Vector3d SpibbProjectedPolicy::probs(const CellObs& s, Eigen::Index cell) const {
    const auto boot = index_->bootstrapped(s);
    const bool any_boot = boot[0] || boot[1] || boot[2];
    const bool all_boot = boot[0] && boot[1] && boot[2];
    const Eigen::Vector3d base = baseline_->probs(s, cell);
    const Eigen::Vector3d q = net_.values(s);
    if (all_boot) return base;
    if (!any_boot) {
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        p(static_cast<int>(greedy_action(q))) = 1.0;
        return p;
    }
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    double free_mass = 0.0;
    int best = -1;
    for (Action cand : {Action::Keep, Action::Down, Action::Up}) {
        const int a = static_cast<int>(cand);
        if (boot[static_cast<std::size_t>(a)]) {
            p(a) = base(a);
        } else {
            free_mass += base(a);
            if (best < 0 || q(a) > q(best)) best = a;
        }
    }
    p(best) += free_mass;
    return p;
}

}  // namespace retopt
