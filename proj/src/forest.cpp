#include "wellrom/forest.hpp"

#include "binary_io.hpp"
#include "wellrom/errors.hpp"
#include "wellrom/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace wellrom {

namespace {

constexpr char kForestMagic[4] = {'W', 'R', 'R', 'F'};
constexpr std::uint32_t kForestVersion = 1;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best split of samples[begin, end). Targets are centred on the node mean,
// so the RSS reduction of a left block with sum L is |L|^2 n / (nL nR).
Split best_split(const Eigen::MatrixXd& x, const RowMatrix& y, const std::vector<int>& samples,
                 int begin, int end, const std::vector<int>& features, int min_leaf)
{
    const int n = end - begin;
    const auto m = y.cols();
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m);
    for (int k = begin; k < end; ++k)
        mean += y.row(samples[static_cast<std::size_t>(k)]);
    mean /= n;
    RowMatrix centred(n, m);
    double rss = 0.0;
    for (int k = 0; k < n; ++k) {
        centred.row(k) = y.row(samples[static_cast<std::size_t>(begin + k)]) - mean;
        rss += centred.row(k).squaredNorm();
    }

    Split best;
    const double min_gain = 1e-12 * rss;
    if (!(rss > 0.0))
        return best;

    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n));
    Eigen::RowVectorXd left(m);
    for (int f : features) {
        for (int k = 0; k < n; ++k)
            order[static_cast<std::size_t>(k)] = {x(samples[static_cast<std::size_t>(begin + k)], f), k};
        std::sort(order.begin(), order.end());
        left.setZero();
        for (int k = 0; k + 1 < n; ++k) {
            left += centred.row(order[static_cast<std::size_t>(k)].second);
            const int nl = k + 1;
            const int nr = n - nl;
            if (nr < min_leaf)
                break;
            const double v0 = order[static_cast<std::size_t>(k)].first;
            const double v1 = order[static_cast<std::size_t>(k + 1)].first;
            if (nl < min_leaf || v0 == v1)
                continue;
            const double gain = left.squaredNorm() * n / (static_cast<double>(nl) * nr);
            // Gains equal to rounding are ties; the earlier candidate stays.
            if (gain > best.gain * (1.0 + 1e-12) && gain > min_gain) {
                double thr = 0.5 * (v0 + v1);
                if (!(thr >= v0 && thr < v1))
                    thr = v0;
                best = {f, thr, gain};
            }
        }
    }
    return best;
}

std::vector<int> draw_features(int d, int k, std::mt19937_64& rng)
{
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    if (k >= d)
        return all;
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, d - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

int RegressionTree::leaf_of(const double* x) const
{
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(k)];
        k = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return k;
}

int RegressionTree::leaves() const
{
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                          [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const
{
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        deepest = std::max(deepest, level[k]);
        if (!nodes[k].is_leaf()) {
            level[static_cast<std::size_t>(nodes[k].left)] = level[k] + 1;
            level[static_cast<std::size_t>(nodes[k].right)] = level[k] + 1;
        }
    }
    return deepest;
}

RegressionTree fit_tree(const Eigen::MatrixXd& x, const RowMatrix& y, std::vector<int> rows,
                        const TreeParams& params, std::mt19937_64& rng)
{
    if (params.max_features < 1 || params.min_leaf < 1)
        throw InputError("tree needs max_features >= 1 and min_leaf >= 1");
    if (static_cast<int>(rows.size()) < params.min_leaf || rows.empty())
        throw InputError("fewer training rows than the minimum leaf size");
    if (x.rows() != y.rows())
        throw InputError("feature and target row counts differ");
    const int d = static_cast<int>(x.cols());

    RegressionTree tree;
    tree.samples = std::move(rows);
    tree.nodes.push_back({-1, 0.0, -1, -1, 0, static_cast<int>(tree.samples.size())});

    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const int begin = tree.nodes[static_cast<std::size_t>(id)].begin;
        const int end = tree.nodes[static_cast<std::size_t>(id)].end;
        if (end - begin < 2 * params.min_leaf)
            continue;
        const auto features = draw_features(d, params.max_features, rng);
        const Split s = best_split(x, y, tree.samples, begin, end, features, params.min_leaf);
        if (s.feature < 0)
            continue;

        auto first = tree.samples.begin() + begin;
        auto last = tree.samples.begin() + end;
        auto mid = std::stable_partition(first, last, [&](int r) { return x(r, s.feature) <= s.threshold; });
        const int split_at = static_cast<int>(mid - tree.samples.begin());

        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, begin, split_at});
        tree.nodes.push_back({-1, 0.0, -1, -1, split_at, end});
        TreeNode& nd = tree.nodes[static_cast<std::size_t>(id)];
        nd.feature = s.feature;
        nd.threshold = s.threshold;
        nd.left = left;
        nd.right = left + 1;
        stack.push_back(left + 1);
        stack.push_back(left);
    }
    return tree;
}

Eigen::VectorXd leaf_value(const RegressionTree& tree, int leaf, const RowMatrix& y)
{
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(leaf)];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(y.cols());
    for (int k = nd.begin; k < nd.end; ++k)
        v += y.row(tree.samples[static_cast<std::size_t>(k)]).transpose();
    return v / static_cast<double>(nd.end - nd.begin);
}

std::uint64_t tree_seed(std::uint64_t forest_seed, int t) noexcept
{
    return derive_seed(forest_seed, static_cast<std::uint64_t>(t));
}

Eigen::VectorXd ForestModel::predict_tree(int t, const Eigen::VectorXd& x) const
{
    if (x.size() != n_features)
        throw InputError("feature vector has " + std::to_string(x.size()) + " entries, model expects "
                         + std::to_string(n_features));
    const RegressionTree& tree = trees.at(static_cast<std::size_t>(t));
    return leaf_value(tree, tree.leaf_of(x.data()), targets);
}

Eigen::VectorXd ForestModel::predict(const Eigen::VectorXd& x) const
{
    if (x.size() != n_features)
        throw InputError("feature vector has " + std::to_string(x.size()) + " entries, model expects "
                         + std::to_string(n_features));
    if (trees.empty())
        throw InputError("forest has no trees");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(targets.cols());
    for (const RegressionTree& tree : trees)
        sum += leaf_value(tree, tree.leaf_of(x.data()), targets);
    return sum / static_cast<double>(trees.size());
}

Eigen::MatrixXd ForestModel::predict(const Eigen::MatrixXd& x) const
{
    Eigen::MatrixXd out(x.rows(), targets.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out.row(i) = predict(Eigen::VectorXd(x.row(i).transpose())).transpose();
    return out;
}

ForestModel fit_forest(const Dataset& data, const ForestParams& params)
{
    data.validate();
    if (params.n_trees < 1)
        throw InputError("forest needs at least one tree");
    if (data.rows() < params.tree.min_leaf)
        throw InputError("fewer training rows than the minimum leaf size");

    ForestModel f;
    f.targets = data.y;
    f.n_features = static_cast<int>(data.features());
    f.params = params;
    f.trees.resize(static_cast<std::size_t>(params.n_trees));
    const int n = static_cast<int>(data.rows());

    parallel_for(f.trees.size(), params.workers, [&](std::size_t t) {
        std::mt19937_64 rng(tree_seed(params.seed, static_cast<int>(t)));
        std::vector<int> rows(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int& r : rows)
                r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        f.trees[t] = fit_tree(data.x, f.targets, std::move(rows), params.tree, rng);
    });
    return f;
}

void write_forest(const std::string& path, const ForestModel& model)
{
    detail::BinaryWriter w(path, kForestMagic, kForestVersion);
    w.i64(model.n_features);
    w.i64(model.params.n_trees);
    w.i64(model.params.tree.max_features);
    w.i64(model.params.tree.min_leaf);
    w.u32(model.params.bootstrap ? 1u : 0u);
    w.u64(model.params.seed);
    w.u64(static_cast<std::uint64_t>(model.targets.rows()));
    w.u64(static_cast<std::uint64_t>(model.targets.cols()));
    w.f64s(model.targets.data(), static_cast<std::size_t>(model.targets.size()));
    w.u64(model.trees.size());
    for (const RegressionTree& t : model.trees) {
        w.u64(t.nodes.size());
        for (const TreeNode& nd : t.nodes) {
            w.i64(nd.feature);
            w.f64(nd.threshold);
            w.i64(nd.left);
            w.i64(nd.right);
            w.i64(nd.begin);
            w.i64(nd.end);
        }
        w.ints(t.samples);
    }
    w.finish();
}

ForestModel read_forest(const std::string& path)
{
    detail::BinaryReader rd(path, kForestMagic, kForestVersion);
    ForestModel f;
    f.n_features = static_cast<int>(rd.i64());
    f.params.n_trees = static_cast<int>(rd.i64());
    f.params.tree.max_features = static_cast<int>(rd.i64());
    f.params.tree.min_leaf = static_cast<int>(rd.i64());
    f.params.bootstrap = rd.u32() != 0;
    f.params.seed = rd.u64();
    const auto rows = rd.u64();
    const auto cols = rd.u64();
    if (rows > (1u << 26) || cols > (1u << 20) || f.n_features < 1)
        throw InputError("corrupt forest header in " + path);
    f.targets.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    rd.f64s(f.targets.data(), static_cast<std::size_t>(rows * cols));
    const auto ntrees = rd.u64();
    if (ntrees > (1u << 20))
        throw InputError("corrupt forest header in " + path);
    f.trees.resize(static_cast<std::size_t>(ntrees));
    for (RegressionTree& t : f.trees) {
        const auto nn = rd.u64();
        if (nn > (1u << 26))
            throw InputError("corrupt tree in " + path);
        t.nodes.resize(static_cast<std::size_t>(nn));
        for (TreeNode& nd : t.nodes) {
            nd.feature = static_cast<int>(rd.i64());
            nd.threshold = rd.f64();
            nd.left = static_cast<int>(rd.i64());
            nd.right = static_cast<int>(rd.i64());
            nd.begin = static_cast<int>(rd.i64());
            nd.end = static_cast<int>(rd.i64());
        }
        t.samples = rd.ints();
        for (const TreeNode& nd : t.nodes) {
            const bool bad_leaf = nd.is_leaf() && (nd.begin < 0 || nd.end > static_cast<int>(t.samples.size()) || nd.begin >= nd.end);
            const bool bad_node = !nd.is_leaf() && (nd.feature >= f.n_features || nd.left <= 0 || nd.right <= 0 || nd.left >= static_cast<int>(nn) || nd.right >= static_cast<int>(nn));
            if (bad_leaf || bad_node)
                throw InputError("corrupt tree in " + path);
        }
        for (int s : t.samples)
            if (s < 0 || s >= static_cast<int>(rows))
                throw InputError("corrupt tree in " + path);
    }
    return f;
}

} // namespace wellrom
