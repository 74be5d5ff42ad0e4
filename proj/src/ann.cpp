#include "wellrom/ann.hpp"

#include "binary_io.hpp"
#include "wellrom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace wellrom {

namespace {

constexpr char kNetMagic[4] = {'W', 'R', 'N', 'N'};
constexpr std::uint32_t kNetVersion = 1;

// Activations per layer, rows = samples. acts[0] is the input.
std::vector<Eigen::MatrixXd> forward_all(const NeuralNet& net, const Eigen::MatrixXd& xs)
{
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(net.weights.size() + 1);
    acts.push_back(xs);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        Eigen::MatrixXd z = acts.back() * net.weights[l].transpose();
        z.rowwise() += net.biases[l].transpose();
        if (l + 1 < net.weights.size())
            z = z.array().tanh().matrix();
        acts.push_back(std::move(z));
    }
    return acts;
}

void write_scaler(detail::BinaryWriter& w, const Standardizer& s)
{
    w.vec(std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size()));
    w.vec(std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size()));
}

Standardizer read_scaler(detail::BinaryReader& rd)
{
    Standardizer s;
    const auto m = rd.vec();
    const auto c = rd.vec();
    if (m.size() != c.size())
        throw InputError("corrupt standardizer");
    s.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    s.scale = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    return s;
}

} // namespace

std::vector<int> NeuralNet::layer_sizes() const
{
    std::vector<int> sizes;
    if (weights.empty())
        return sizes;
    sizes.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights)
        sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
}

Eigen::MatrixXd NeuralNet::forward(const Eigen::MatrixXd& xs) const
{
    if (weights.empty() || xs.cols() != weights.front().cols())
        throw InputError("input width does not match the network");
    return forward_all(*this, xs).back();
}

Eigen::MatrixXd NeuralNet::predict(const Eigen::MatrixXd& x) const
{
    return output_scaler.inverse(forward(input_scaler.transform(x)));
}

Eigen::VectorXd NeuralNet::predict(const Eigen::VectorXd& x) const
{
    return predict(Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

NeuralNet init_net(const std::vector<int>& sizes, std::uint64_t seed)
{
    if (sizes.size() < 2)
        throw InputError("network needs input and output layers");
    for (int s : sizes)
        if (s < 1)
            throw InputError("layer sizes must be positive");
    NeuralNet net;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
        const double sd = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w.data()[i] = sd * normal(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    }
    const auto din = static_cast<Eigen::Index>(sizes.front());
    const auto dout = static_cast<Eigen::Index>(sizes.back());
    net.input_scaler = {Eigen::VectorXd::Zero(din), Eigen::VectorXd::Ones(din)};
    net.output_scaler = {Eigen::VectorXd::Zero(dout), Eigen::VectorXd::Ones(dout)};
    return net;
}

double cost(const NeuralNet& net, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
            double lambda, NetGradient* gradient)
{
    if (xs.rows() != ys.rows() || xs.rows() == 0)
        throw InputError("cost needs matching, non-empty inputs and targets");
    if (ys.cols() != net.weights.back().rows())
        throw InputError("target width does not match the network");
    const auto acts = forward_all(net, xs);
    const double n = static_cast<double>(xs.rows());
    const Eigen::MatrixXd diff = acts.back() - ys;
    double penalty = 0.0;
    for (const auto& w : net.weights)
        penalty += w.squaredNorm();
    const double j = (diff.squaredNorm() + lambda * penalty) / (2.0 * n);
    if (!gradient)
        return j;

    const std::size_t nl = net.weights.size();
    gradient->weights.resize(nl);
    gradient->biases.resize(nl);
    Eigen::MatrixXd delta = diff / n;
    for (std::size_t l = nl; l-- > 0;) {
        gradient->weights[l] = delta.transpose() * acts[l] + (lambda / n) * net.weights[l];
        gradient->biases[l] = delta.colwise().sum().transpose();
        if (l > 0)
            delta = ((delta * net.weights[l]).array() * (1.0 - acts[l].array().square())).matrix();
    }
    return j;
}

NeuralNet fit_ann(const Dataset& data, const AnnParams& params)
{
    data.validate();
    if (params.epochs < 1 || params.batch_size < 1 || !(params.learning_rate > 0.0)
        || params.lambda < 0.0 || params.momentum < 0.0 || params.momentum >= 1.0)
        throw InputError("invalid network training parameters");

    std::vector<int> sizes{static_cast<int>(data.features())};
    sizes.insert(sizes.end(), params.hidden.begin(), params.hidden.end());
    sizes.push_back(static_cast<int>(data.outputs()));
    NeuralNet net = init_net(sizes, params.seed);
    // Training starts from the target mean; a constant target stays exact.
    net.weights.back().setZero();
    net.lambda = params.lambda;
    net.input_scaler = Standardizer::fit(data.x);
    net.output_scaler = Standardizer::fit(data.y);
    const Eigen::MatrixXd xs = net.input_scaler.transform(data.x);
    const Eigen::MatrixXd ys = net.output_scaler.transform(data.y);

    const auto n = static_cast<int>(xs.rows());
    const int batch = std::min(params.batch_size, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(params.seed, 0xA11));

    NetGradient vel;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        vel.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        vel.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    NetGradient g;
    Eigen::MatrixXd xb, yb;
    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int start = 0; start < n; start += batch) {
            const int b = std::min(batch, n - start);
            xb.resize(b, xs.cols());
            yb.resize(b, ys.cols());
            for (int k = 0; k < b; ++k) {
                xb.row(k) = xs.row(order[static_cast<std::size_t>(start + k)]);
                yb.row(k) = ys.row(order[static_cast<std::size_t>(start + k)]);
            }
            // Batch cost (1/2b) sum (h-y)^2 + (lambda/2n) sum theta^2.
            cost(net, xb, yb, params.lambda * b / n, &g);
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                vel.weights[l] = params.momentum * vel.weights[l] - params.learning_rate * g.weights[l];
                vel.biases[l] = params.momentum * vel.biases[l] - params.learning_rate * g.biases[l];
                net.weights[l] += vel.weights[l];
                net.biases[l] += vel.biases[l];
            }
        }
        net.final_loss = cost(net, xs, ys, params.lambda);
        if (!std::isfinite(net.final_loss))
            throw TrainingError("network training diverged", epoch);
    }
    return net;
}

void write_net(const std::string& path, const NeuralNet& net)
{
    detail::BinaryWriter w(path, kNetMagic, kNetVersion);
    w.f64(net.lambda);
    w.f64(net.final_loss);
    w.u64(net.weights.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        w.u64(static_cast<std::uint64_t>(net.weights[l].rows()));
        w.u64(static_cast<std::uint64_t>(net.weights[l].cols()));
        w.f64s(net.weights[l].data(), static_cast<std::size_t>(net.weights[l].size()));
        w.f64s(net.biases[l].data(), static_cast<std::size_t>(net.biases[l].size()));
    }
    write_scaler(w, net.input_scaler);
    write_scaler(w, net.output_scaler);
    w.finish();
}

NeuralNet read_net(const std::string& path)
{
    detail::BinaryReader rd(path, kNetMagic, kNetVersion);
    NeuralNet net;
    net.lambda = rd.f64();
    net.final_loss = rd.f64();
    const auto layers = rd.u64();
    if (layers == 0 || layers > 64)
        throw InputError("corrupt network header in " + path);
    for (std::uint64_t l = 0; l < layers; ++l) {
        const auto r = rd.u64();
        const auto c = rd.u64();
        if (r == 0 || c == 0 || r > 100000 || c > 100000
            || (l > 0 && static_cast<Eigen::Index>(c) != net.weights.back().rows()))
            throw InputError("corrupt network layer in " + path);
        Eigen::MatrixXd w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        Eigen::VectorXd b(static_cast<Eigen::Index>(r));
        rd.f64s(w.data(), static_cast<std::size_t>(r * c));
        rd.f64s(b.data(), static_cast<std::size_t>(r));
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.input_scaler = read_scaler(rd);
    net.output_scaler = read_scaler(rd);
    if (net.input_scaler.mean.size() != net.weights.front().cols()
        || net.output_scaler.mean.size() != net.weights.back().rows())
        throw InputError("network scalers do not match its layers in " + path);
    return net;
}

} // namespace wellrom
