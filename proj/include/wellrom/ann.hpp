#pragma once

#include "wellrom/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wellrom {

struct AnnParams {
    std::vector<int> hidden{20, 20};
    double lambda = 1e-4;       // L2 penalty on weights, biases excluded
    int epochs = 400;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    std::uint64_t seed = 1;
};

/// Feed-forward net, tanh hidden layers and linear output. Inputs and
/// targets are standardized internally; weights act on standardized data.
struct NeuralNet {
    std::vector<Eigen::MatrixXd> weights; // weights[l]: size(l+1) x size(l)
    std::vector<Eigen::VectorXd> biases;
    Standardizer input_scaler;
    Standardizer output_scaler;
    double lambda = 0.0;
    double final_loss = 0.0; // regularized cost on standardized training data

    std::vector<int> layer_sizes() const;

    /// Raw net output for standardized input rows (n x d -> n x m).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& xs) const;
    /// Destandardized predictions for raw inputs.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
};

/// Random initialization (scaled normal) of a net with the given sizes.
NeuralNet init_net(const std::vector<int>& sizes, std::uint64_t seed);

struct NetGradient {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// J = (1/2n) [ sum (h - y)^2 + lambda sum theta^2 ] on standardized data,
/// with its backpropagated gradient.
double cost(const NeuralNet& net, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
            double lambda, NetGradient* gradient = nullptr);

/// Mini-batch gradient descent with momentum. Throws TrainingError if the
/// loss becomes non-finite.
NeuralNet fit_ann(const Dataset& data, const AnnParams& params);

/// Binary container "WRNN".
void write_net(const std::string& path, const NeuralNet& net);
NeuralNet read_net(const std::string& path);

} // namespace wellrom
