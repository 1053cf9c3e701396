#pragma once

#include "retopt/mdp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace retopt {

struct TrainHyper {
    double gamma = 0.9;
    double learning_rate = 1e-3;
    int batch_size = 50;
    int epochs = 20;
};

void validate(const TrainHyper& hyper);

// State-action value network: input [obs(4), one-hot action(3)], ReLU hidden
// layers, scalar linear output. Parameters live in one flat vector so
// optimizer steps and serialization stay trivial.
class QNet {
public:
    explicit QNet(int input_dim = 7, std::vector<int> hidden = {100, 50, 20});

    void init(std::uint64_t seed);

    int input_dim() const { return dims_.front(); }
    const std::vector<int>& layer_dims() const { return dims_; }
    Eigen::Index num_params() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::VectorXd& params() { return params_; }

    // inputs: one column per sample. Returns a row of outputs.
    Eigen::RowVectorXd forward(const Eigen::MatrixXd& inputs) const;
    double forward_one(const Eigen::VectorXd& input) const;

    double value(const CellObs& obs, Action a) const;
    Eigen::Vector3d values(const CellObs& obs) const;
    // One column of three action values per observation column (4 x n in).
    Eigen::MatrixXd values_batch(const Eigen::MatrixXd& obs_cols) const;

    // Mean squared error over the batch.
    double loss(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const;
    Eigen::VectorXd loss_grad(const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& targets) const;

    // Plain gradient descent on the batch loss; returns the pre-step loss.
    // Non-finite targets are rejected.
    double sgd_step(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                    double learning_rate);
    double sgd_step(const std::vector<CellObs>& obs, const std::vector<Action>& actions,
                    const Eigen::VectorXd& targets, double learning_rate);

    void save(const std::string& path) const;
    static QNet load(const std::string& path);

private:
    std::vector<int> dims_;  // [input, hidden..., 1]
    std::vector<Eigen::Index> weight_offset_;
    std::vector<Eigen::Index> bias_offset_;
    Eigen::VectorXd params_;
};

Eigen::VectorXd encode_input(const CellObs& obs, Action a);
// One encoded column per (obs, action) pair.
Eigen::MatrixXd encode_inputs(const std::vector<CellObs>& obs, const std::vector<Action>& actions);

// Max relative error between analytic and finite-difference gradients over
// `probes` randomly chosen coordinates. epsilon must lie in [1e-7, 1e-3].
// Each probe is graded against the best of the centered and the two one-sided
// differences: wherever the loss is differentiable the three agree, and at an
// activation switch backprop legitimately reports a one-sided slope.
double gradient_check(const QNet& net, const Eigen::MatrixXd& inputs,
                      const Eigen::VectorXd& targets, int probes, std::uint64_t seed,
                      double epsilon = 1e-6);

}  // namespace retopt
