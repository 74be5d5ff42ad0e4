#pragma once

#include "wellrom/dataset.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace wellrom {

struct TreeParams {
    int max_features = 3; // N_fmax, features searched per split
    int min_leaf = 2;     // N_l, samples required in each child
};

/// Internal nodes send x[feature] <= threshold left. Leaves reference a slice
/// [begin, end) of the tree's sample list (training row ids, with bootstrap
/// repeats); the leaf value is the mean target over that slice.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    std::vector<int> samples;

    int leaf_of(const double* x) const;
    int leaves() const;
    int depth() const;
};

/// Greedy CART on the given training rows, splitting on the total residual
/// sum of squares over all outputs. Ties go to the lowest feature index,
/// then the lowest threshold.
RegressionTree fit_tree(const Eigen::MatrixXd& x, const RowMatrix& y, std::vector<int> rows,
                        const TreeParams& params, std::mt19937_64& rng);

/// Mean target vector of a leaf.
Eigen::VectorXd leaf_value(const RegressionTree& tree, int leaf, const RowMatrix& y);

struct ForestParams {
    int n_trees = 200;
    TreeParams tree;
    bool bootstrap = true;
    std::uint64_t seed = 1;
    int workers = 1;
};

/// Seed of the generator used for tree `t` of a forest.
std::uint64_t tree_seed(std::uint64_t forest_seed, int t) noexcept;

struct ForestModel {
    std::vector<RegressionTree> trees;
    RowMatrix targets; // training targets referenced by the leaves
    int n_features = 0;
    ForestParams params;

    int outputs() const noexcept { return static_cast<int>(targets.cols()); }

    Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    /// Prediction of a single tree.
    Eigen::VectorXd predict_tree(int t, const Eigen::VectorXd& x) const;
};

ForestModel fit_forest(const Dataset& data, const ForestParams& params);

/// Binary container "WRRF".
void write_forest(const std::string& path, const ForestModel& model);
ForestModel read_forest(const std::string& path);

} // namespace wellrom
