#include "retopt/qnet.hpp"

#include "retopt/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace retopt {

namespace {

using WeightMap = Eigen::Map<const Eigen::MatrixXd>;
using BiasMap = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

void validate(const TrainHyper& hyper) {
    if (!(hyper.gamma > 0.0 && hyper.gamma < 1.0)) {
        throw std::invalid_argument("hyper: gamma must lie in (0,1)");
    }
    if (hyper.learning_rate <= 0.0) {
        throw std::invalid_argument("hyper: learning rate must be positive");
    }
    if (hyper.batch_size <= 0 || hyper.epochs < 0) {
        throw std::invalid_argument("hyper: batch_size must be positive, epochs non-negative");
    }
}

QNet::QNet(int input_dim, std::vector<int> hidden) {
    if (input_dim <= 0) {
        throw std::invalid_argument("qnet: input_dim must be positive");
    }
    dims_.push_back(input_dim);
    for (int h : hidden) {
        if (h <= 0) {
            throw std::invalid_argument("qnet: hidden widths must be positive");
        }
        dims_.push_back(h);
    }
    dims_.push_back(1);

    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        weight_offset_.push_back(offset);
        offset += static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l];
        bias_offset_.push_back(offset);
        offset += dims_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(offset);
}

void QNet::init(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const double bound = std::sqrt(6.0 / dims_[l]);
        const Eigen::Index count = static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l];
        for (Eigen::Index i = 0; i < count; ++i) {
            params_[weight_offset_[l] + i] = rng.uniform(-bound, bound);
        }
        params_.segment(bias_offset_[l], dims_[l + 1]).setZero();
    }
}

Eigen::RowVectorXd QNet::forward(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != dims_.front()) {
        throw std::invalid_argument("qnet: input row count mismatch");
    }
    Eigen::MatrixXd activation = inputs;
    const std::size_t layers = dims_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        WeightMap w(params_.data() + weight_offset_[l], dims_[l + 1], dims_[l]);
        BiasMap b(params_.data() + bias_offset_[l], dims_[l + 1]);
        Eigen::MatrixXd z = (w * activation).colwise() + b;
        if (l + 1 < layers) {
            activation = z.array().max(0.0);
        } else {
            activation = std::move(z);
        }
    }
    return activation.row(0);
}

double QNet::forward_one(const Eigen::VectorXd& input) const {
    return forward(input)(0);
}

double QNet::value(const CellObs& obs, Action a) const {
    return forward_one(encode_input(obs, a));
}

Eigen::Vector3d QNet::values(const CellObs& obs) const {
    Eigen::MatrixXd inputs(dims_.front(), kNumActions);
    for (int a = 0; a < kNumActions; ++a) {
        inputs.col(a) = encode_input(obs, static_cast<Action>(a));
    }
    const Eigen::RowVectorXd out = forward(inputs);
    return Eigen::Vector3d(out(0), out(1), out(2));
}

Eigen::MatrixXd QNet::values_batch(const Eigen::MatrixXd& obs_cols) const {
    if (obs_cols.rows() != 4) {
        throw std::invalid_argument("qnet: observation columns must have 4 rows");
    }
    const Eigen::Index n = obs_cols.cols();
    Eigen::MatrixXd inputs = Eigen::MatrixXd::Zero(dims_.front(), n * kNumActions);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int a = 0; a < kNumActions; ++a) {
            inputs.block(0, i * kNumActions + a, 4, 1) = obs_cols.col(i);
            inputs(4 + a, i * kNumActions + a) = 1.0;
        }
    }
    const Eigen::RowVectorXd out = forward(inputs);
    Eigen::MatrixXd q(kNumActions, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int a = 0; a < kNumActions; ++a) {
            q(a, i) = out(i * kNumActions + a);
        }
    }
    return q;
}

double QNet::loss(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const {
    const Eigen::RowVectorXd out = forward(inputs);
    return (out.transpose() - targets).squaredNorm() / static_cast<double>(targets.size());
}

Eigen::VectorXd QNet::loss_grad(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& targets) const {
    if (inputs.rows() != dims_.front()) {
        throw std::invalid_argument("qnet: input row count mismatch");
    }
    if (inputs.cols() != targets.size()) {
        throw std::invalid_argument("qnet: one target per input column required");
    }
    const std::size_t layers = dims_.size() - 1;

    std::vector<Eigen::MatrixXd> activations;  // activations[l] feeds layer l
    activations.reserve(layers + 1);
    activations.push_back(inputs);
    std::vector<Eigen::MatrixXd> pre;  // pre-activation of each layer
    pre.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        WeightMap w(params_.data() + weight_offset_[l], dims_[l + 1], dims_[l]);
        BiasMap b(params_.data() + bias_offset_[l], dims_[l + 1]);
        pre.push_back((w * activations.back()).colwise() + b);
        if (l + 1 < layers) {
            activations.push_back(pre.back().array().max(0.0).matrix());
        }
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    // d(mean squared error)/d(output)
    Eigen::MatrixXd delta = (2.0 / static_cast<double>(targets.size())) *
                            (pre.back().row(0).transpose() - targets).transpose();
    for (std::size_t l = layers; l-- > 0;) {
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + weight_offset_[l], dims_[l + 1], dims_[l]);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + bias_offset_[l], dims_[l + 1]);
        gw = delta * activations[l].transpose();
        gb = delta.rowwise().sum();
        if (l > 0) {
            WeightMap w(params_.data() + weight_offset_[l], dims_[l + 1], dims_[l]);
            delta = (w.transpose() * delta).cwiseProduct(
                (pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return grad;
}

double QNet::sgd_step(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                      double learning_rate) {
    if (inputs.cols() == 0) {
        throw std::invalid_argument("qnet: empty batch");
    }
    if (!targets.allFinite()) {
        throw std::invalid_argument("qnet: non-finite target");
    }
    const double pre_loss = loss(inputs, targets);
    params_ -= learning_rate * loss_grad(inputs, targets);
    return pre_loss;
}

double QNet::sgd_step(const std::vector<CellObs>& obs, const std::vector<Action>& actions,
                      const Eigen::VectorXd& targets, double learning_rate) {
    return sgd_step(encode_inputs(obs, actions), targets, learning_rate);
}

void QNet::save(const std::string& path) const {
    nlohmann::json header;
    header["format"] = "qnet-v1";
    header["input_dim"] = dims_.front();
    header["hidden"] = std::vector<int>(dims_.begin() + 1, dims_.end() - 1);
    header["params"] = static_cast<std::int64_t>(params_.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("qnet: cannot open for writing: " + path);
    }
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(sizeof(double) * params_.size()));
    if (!out) {
        throw std::runtime_error("qnet: write failed: " + path);
    }
}

QNet QNet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("qnet: cannot open for reading: " + path);
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw std::runtime_error("qnet: missing header: " + path);
    }
    const auto header = nlohmann::json::parse(header_line);
    if (header.value("format", "") != "qnet-v1") {
        throw std::runtime_error("qnet: unknown format in " + path);
    }
    QNet net(header.at("input_dim").get<int>(), header.at("hidden").get<std::vector<int>>());
    const auto expected = header.at("params").get<std::int64_t>();
    if (expected != net.num_params()) {
        throw std::runtime_error("qnet: parameter count mismatch in " + path);
    }
    in.read(reinterpret_cast<char*>(net.params_.data()),
            static_cast<std::streamsize>(sizeof(double) * net.params_.size()));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * net.params_.size())) {
        throw std::runtime_error("qnet: truncated parameter block in " + path);
    }
    return net;
}

Eigen::VectorXd encode_input(const CellObs& obs, Action a) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4 + kNumActions);
    x.head<4>() = obs;
    x(4 + static_cast<int>(a)) = 1.0;
    return x;
}

Eigen::MatrixXd encode_inputs(const std::vector<CellObs>& obs,
                              const std::vector<Action>& actions) {
    if (obs.size() != actions.size()) {
        throw std::invalid_argument("encode_inputs: obs/action length mismatch");
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4 + kNumActions,
                                              static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        x.block(0, col, 4, 1) = obs[i];
        x(4 + static_cast<int>(actions[i]), col) = 1.0;
    }
    return x;
}

double gradient_check(const QNet& net, const Eigen::MatrixXd& inputs,
                      const Eigen::VectorXd& targets, int probes, std::uint64_t seed,
                      double epsilon) {
    if (epsilon < 1e-7 || epsilon > 1e-3) {
        throw std::invalid_argument("gradient_check: epsilon outside [1e-7, 1e-3]");
    }
    const Eigen::VectorXd analytic = net.loss_grad(inputs, targets);
    QNet probe = net;
    Rng rng(seed);
    const double h = epsilon;
    const double mid = probe.loss(inputs, targets);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        const auto i = static_cast<Eigen::Index>(
            rng.uniform_int(0, static_cast<std::int64_t>(net.num_params()) - 1));
        const double saved = probe.params()[i];
        probe.params()[i] = saved + h;
        const double hi = probe.loss(inputs, targets);
        probe.params()[i] = saved - h;
        const double lo = probe.loss(inputs, targets);
        probe.params()[i] = saved;
        // The loss is piecewise linear in any one parameter, so when an
        // activation switches inside [saved-h, saved+h] the centered
        // difference estimates no derivative while backprop legitimately
        // reports a one-sided slope. Grade each probe by the best of the
        // centered and the two one-sided estimators: where the loss is
        // differentiable all three agree, so nothing is relaxed there, and a
        // wrong analytic gradient matches none of them.
        const double candidates[] = {(hi - lo) / (2.0 * h), (hi - mid) / h, (mid - lo) / h};
        double err = std::numeric_limits<double>::infinity();
        for (const double numeric : candidates) {
            const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
            err = std::min(err, std::abs(numeric - analytic[i]) / scale);
        }
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace retopt
