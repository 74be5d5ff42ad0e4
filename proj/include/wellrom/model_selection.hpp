#pragma once

#include "wellrom/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace wellrom {

/// Fold id per row. Rows are shuffled with `seed`; when the dataset carries
/// group ids, whole groups are assigned to folds instead of single rows.
std::vector<int> assign_folds(const Dataset& data, int k, std::uint64_t seed);

/// Fits candidate `index` on `train` and returns predictions for `test_x`.
using FitPredict =
    std::function<Eigen::MatrixXd(const Dataset& train, const Eigen::MatrixXd& test_x, std::size_t index)>;

struct CvResult {
    std::size_t best = 0;
    std::vector<double> mean_scores;              // per candidate
    std::vector<std::vector<double>> fold_scores; // [candidate][fold]
};

/// Grid search scored by mean fold R^2; ties go to the earliest candidate.
CvResult kfold_cv(const Dataset& data, std::size_t candidates, const FitPredict& fit_predict, int k,
                  std::uint64_t seed);

/// Columns: candidate,label,mean_r2,fold_1..fold_k
void write_cv_csv(const std::string& path, const std::vector<std::string>& labels,
                  const CvResult& result);

struct SelectionResult {
    std::vector<int> features; // ascending feature ids
    double score = 0.0;
    /// Subsets in evaluation order with their scores.
    std::vector<std::pair<std::vector<int>, double>> trace;
};

/// Forward best-first search over feature subsets. The empty subset scores
/// 0; the search stops after `stall_limit` expansions without improvement.
SelectionResult wrapper_select(int n_features,
                               const std::function<double(const std::vector<int>&)>& score,
                               int stall_limit = 5);

} // namespace wellrom
