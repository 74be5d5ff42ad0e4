#include "wellrom/dataset.hpp"

#include "wellrom/errors.hpp"

#include <cmath>
#include <limits>

namespace wellrom {

void Dataset::validate() const
{
    if (x.rows() < 1 || x.cols() < 1)
        throw InputError("dataset has no rows or no features");
    if (y.rows() != x.rows() || y.cols() < 1)
        throw InputError("targets do not match the feature rows");
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols())
        throw InputError("feature name count does not match the feature columns");
    if (!groups.empty() && static_cast<Eigen::Index>(groups.size()) != x.rows())
        throw InputError("group ids do not match the rows");
    if (!x.allFinite() || !y.allFinite())
        throw InputError("dataset contains non-finite values");
}

Dataset Dataset::subset_rows(const std::vector<int>& rows) const
{
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    d.y.resize(static_cast<Eigen::Index>(rows.size()), y.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] < 0 || rows[k] >= x.rows())
            throw InputError("row index out of range");
        d.x.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
        d.y.row(static_cast<Eigen::Index>(k)) = y.row(rows[k]);
        if (!groups.empty())
            d.groups.push_back(groups[static_cast<std::size_t>(rows[k])]);
    }
    d.feature_names = feature_names;
    return d;
}

Dataset Dataset::subset_features(const std::vector<int>& features) const
{
    Dataset d;
    d.x.resize(x.rows(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k] < 0 || features[k] >= x.cols())
            throw InputError("feature index out of range");
        d.x.col(static_cast<Eigen::Index>(k)) = x.col(features[k]);
        if (!feature_names.empty())
            d.feature_names.push_back(feature_names[static_cast<std::size_t>(features[k])]);
    }
    d.y = y;
    d.groups = groups;
    return d;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& data)
{
    if (data.rows() < 1)
        throw InputError("cannot standardize an empty matrix");
    Standardizer s;
    s.mean = data.colwise().mean().transpose();
    s.scale.resize(data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double var = (data.col(j).array() - s.mean[j]).square().mean();
        const double sd = std::sqrt(var);
        s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& data) const
{
    if (data.cols() != mean.size())
        throw InputError("standardizer column count mismatch");
    return (data.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd Standardizer::inverse(const Eigen::MatrixXd& data) const
{
    if (data.cols() != mean.size())
        throw InputError("standardizer column count mismatch");
    return (data.array().rowwise() * scale.transpose().array()).matrix().rowwise()
           + mean.transpose();
}

Eigen::VectorXd Standardizer::transform_row(const Eigen::VectorXd& row) const
{
    if (row.size() != mean.size())
        throw InputError("standardizer column count mismatch");
    return (row - mean).cwiseQuotient(scale);
}

Eigen::VectorXd Standardizer::inverse_row(const Eigen::VectorXd& row) const
{
    if (row.size() != mean.size())
        throw InputError("standardizer column count mismatch");
    return row.cwiseProduct(scale) + mean;
}

double r2_score(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction)
{
    if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols() || truth.rows() == 0)
        throw InputError("r2 inputs must be non-empty and of equal shape");
    const Eigen::RowVectorXd mu = truth.colwise().mean();
    const double sst = (truth.rowwise() - mu).squaredNorm();
    const double sse = (truth - prediction).squaredNorm();
    if (sst == 0.0)
        return sse == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - sse / sst;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace wellrom
