#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace wellrom {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Supervised regression data. `groups` (optional, one id per row) keeps rows
/// of the same configuration in the same cross-validation fold.
struct Dataset {
    Eigen::MatrixXd x; // n x d
    Eigen::MatrixXd y; // n x m
    std::vector<std::string> feature_names;
    std::vector<int> groups;

    Eigen::Index rows() const noexcept { return x.rows(); }
    Eigen::Index features() const noexcept { return x.cols(); }
    Eigen::Index outputs() const noexcept { return y.cols(); }

    /// Throws InputError on empty data, shape mismatch or non-finite entries.
    void validate() const;
    Dataset subset_rows(const std::vector<int>& rows) const;
    Dataset subset_features(const std::vector<int>& features) const;
};

/// Per-column affine map to zero mean and unit standard deviation. Constant
/// columns get scale 1.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& data);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& data) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& data) const;
    Eigen::VectorXd transform_row(const Eigen::VectorXd& row) const;
    Eigen::VectorXd inverse_row(const Eigen::VectorXd& row) const;
};

/// Pooled coefficient of determination 1 - SSE / SST over all outputs, with
/// SST taken about the per-output mean of `truth`. Returns 0 when SST = 0
/// and the prediction is exact, -inf otherwise.
double r2_score(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction);

/// Stream seed for item `index` derived from a base seed (SplitMix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

} // namespace wellrom
