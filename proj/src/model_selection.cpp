#include "wellrom/model_selection.hpp"

#include "wellrom/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

namespace wellrom {

std::vector<int> assign_folds(const Dataset& data, int k, std::uint64_t seed)
{
    const auto n = static_cast<int>(data.rows());
    if (k < 2)
        throw InputError("cross-validation needs at least two folds");
    std::mt19937_64 rng(seed);
    std::vector<int> fold(static_cast<std::size_t>(n));

    if (data.groups.empty()) {
        if (n < k)
            throw InputError("fewer rows than folds");
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < n; ++i)
            fold[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % k;
        return fold;
    }

    std::vector<int> ids = data.groups;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (static_cast<int>(ids.size()) < k)
        throw InputError("fewer groups than folds");
    std::shuffle(ids.begin(), ids.end(), rng);
    std::map<int, int> group_fold;
    for (std::size_t i = 0; i < ids.size(); ++i)
        group_fold[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i)
        fold[static_cast<std::size_t>(i)] = group_fold.at(data.groups[static_cast<std::size_t>(i)]);
    return fold;
}

CvResult kfold_cv(const Dataset& data, std::size_t candidates, const FitPredict& fit_predict, int k,
                  std::uint64_t seed)
{
    data.validate();
    if (candidates == 0)
        throw InputError("hyperparameter grid is empty");
    const auto fold = assign_folds(data, k, seed);

    std::vector<Dataset> train(static_cast<std::size_t>(k)), test(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        std::vector<int> tr, te;
        for (int i = 0; i < static_cast<int>(data.rows()); ++i)
            (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
        train[static_cast<std::size_t>(f)] = data.subset_rows(tr);
        test[static_cast<std::size_t>(f)] = data.subset_rows(te);
    }

    CvResult r;
    r.fold_scores.assign(candidates, std::vector<double>(static_cast<std::size_t>(k), 0.0));
    r.mean_scores.assign(candidates, 0.0);
    for (std::size_t c = 0; c < candidates; ++c) {
        for (int f = 0; f < k; ++f) {
            const auto fs = static_cast<std::size_t>(f);
            const Eigen::MatrixXd pred = fit_predict(train[fs], test[fs].x, c);
            r.fold_scores[c][fs] = r2_score(test[fs].y, pred);
        }
        r.mean_scores[c] = std::accumulate(r.fold_scores[c].begin(), r.fold_scores[c].end(), 0.0) / k;
        if (r.mean_scores[c] > r.mean_scores[r.best])
            r.best = c;
    }
    return r;
}

void write_cv_csv(const std::string& path, const std::vector<std::string>& labels,
                  const CvResult& result)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    const std::size_t k = result.fold_scores.empty() ? 0 : result.fold_scores.front().size();
    out << "candidate,label,mean_r2";
    for (std::size_t f = 0; f < k; ++f)
        out << ",fold_" << f + 1;
    out << '\n';
    out.precision(10);
    for (std::size_t c = 0; c < result.mean_scores.size(); ++c) {
        out << c << ',' << (c < labels.size() ? labels[c] : std::string()) << ',' << result.mean_scores[c];
        for (double s : result.fold_scores[c])
            out << ',' << s;
        out << '\n';
    }
}

SelectionResult wrapper_select(int n_features,
                               const std::function<double(const std::vector<int>&)>& score,
                               int stall_limit)
{
    if (n_features < 1)
        throw InputError("feature selection needs at least one feature");
    if (stall_limit < 1)
        throw InputError("stall limit must be positive");

    SelectionResult res;
    std::map<std::vector<int>, double> seen;
    seen[{}] = 0.0;
    // Open list ordered by score (desc), then by insertion for determinism.
    struct Entry {
        double score;
        long order;
        std::vector<int> subset;
    };
    auto worse = [](const Entry& a, const Entry& b) {
        return a.score != b.score ? a.score < b.score : a.order > b.order;
    };
    std::vector<Entry> open{{0.0, 0, {}}};
    long counter = 1;
    std::vector<int> best_subset;
    double best = 0.0;
    int stall = 0;

    while (!open.empty() && stall < stall_limit) {
        auto it = std::max_element(open.begin(), open.end(), worse);
        Entry cur = *it;
        open.erase(it);
        bool improved = false;
        for (int f = 0; f < n_features; ++f) {
            if (std::binary_search(cur.subset.begin(), cur.subset.end(), f))
                continue;
            std::vector<int> child = cur.subset;
            child.insert(std::upper_bound(child.begin(), child.end(), f), f);
            if (seen.count(child))
                continue;
            const double s = score(child);
            seen[child] = s;
            res.trace.emplace_back(child, s);
            open.push_back({s, counter++, child});
            if (s > best) {
                best = s;
                best_subset = child;
                improved = true;
            }
        }
        stall = improved ? 0 : stall + 1;
    }
    res.features = best_subset;
    res.score = best;
    return res;
}

} // namespace wellrom
