#include "intreg/mmif.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "intreg/rng.hpp"

namespace intreg {

std::vector<double> compute_weights(std::span<const double> oob_errors) {
    if (oob_errors.empty()) throw std::invalid_argument("compute_weights: empty");
    std::vector<double> inv(oob_errors.size());
    double total = 0.0;
    for (std::size_t i = 0; i < oob_errors.size(); ++i) {
        inv[i] = 1.0 / std::max(oob_errors[i], kOobErrorFloor);
        total += inv[i];
    }
    for (double& w : inv) w /= total;
    return inv;
}

namespace {

MmitConfig cv_select_config(const Dataset& data, std::uint64_t seed, const MmifConfig& cfg) {
    // 5-fold CV over the forest grid, returning the best (depth, min_split)
    MmitGrid grid{cfg.cv_max_depths, cfg.cv_min_splits};
    if (data.n_rows() < 5)
        return {grid.max_depths.front(), grid.min_samples.front(), cfg.loss};
    FoldAssignment folds = make_folds(data.n_rows(), 5, mix_seed(seed, 0x637653));
    return mmit_cv_best_config(data, folds, grid, cfg.loss);
}

}  // namespace

double MmifModel::predict(std::span<const double> x) const {
    double pred = 0.0;
    std::vector<double> sub;
    for (const auto& m : members_) {
        sub.clear();
        for (std::size_t c : m.feature_subset) sub.push_back(x[c]);
        pred += m.weight * m.tree->predict(sub);
    }
    return pred;
}

nlohmann::json MmifModel::hyperparams() const {
    return {{"n_trees", members_.size()}, {"shared_cv", config_.shared_cv}};
}

nlohmann::json MmifModel::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : members_) {
        arr.push_back({{"tree", m.tree->to_json()},
                       {"feature_subset", m.feature_subset},
                       {"oob_error", m.oob_error},
                       {"weight", m.weight},
                       {"max_depth", m.config.max_depth},
                       {"min_sample", m.config.min_sample}});
    }
    return {{"members", arr}};
}

std::unique_ptr<Regressor> train_mmif(const Dataset& train, std::uint64_t seed,
                                      const MmifConfig& config) {
    const std::size_t n = train.n_rows(), m = train.n_cols();
    if (n < 5) throw std::invalid_argument("train_mmif: need at least 5 rows");
    const std::size_t n_sub = (2 * n) / 3;
    const std::size_t m_sub = (m + 2) / 3;  // ceil(m/3)

    MmitConfig shared_cfg;
    if (config.shared_cv) shared_cfg = cv_select_config(train, mix_seed(seed, 1), config);

    std::vector<ForestMember> members(config.n_trees);
    std::vector<double> oob_errors(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        Rng rng(mix_seed(seed, t + 2));
        auto row_order = rng.sample_without_replacement(n, n);
        std::vector<std::size_t> rows(row_order.begin(),
                                      row_order.begin() + static_cast<std::ptrdiff_t>(n_sub));
        std::vector<std::size_t> oob(row_order.begin() + static_cast<std::ptrdiff_t>(n_sub),
                                     row_order.end());
        std::sort(rows.begin(), rows.end());
        std::sort(oob.begin(), oob.end());
        auto cols = rng.sample_without_replacement(m, m_sub);
        std::sort(cols.begin(), cols.end());

        Dataset sub = train.subset(rows, cols);
        MmitConfig tree_cfg =
            config.shared_cv ? shared_cfg
                             : cv_select_config(sub, mix_seed(seed, 0x1000 + t), config);
        auto tree = grow_mmit(sub, tree_cfg);

        double oob_sum = 0.0;
        std::vector<double> x_sub(m_sub);
        for (std::size_t r : oob) {
            auto x = train.row(r);
            for (std::size_t j = 0; j < m_sub; ++j) x_sub[j] = x[cols[j]];
            oob_sum += hinge_loss(tree->predict(x_sub), train.target(r), {2, 0.0});
        }
        oob_errors[t] = oob.empty() ? 0.0 : oob_sum / static_cast<double>(oob.size());

        members[t].tree = std::move(tree);
        members[t].feature_subset = std::move(cols);
        members[t].oob_indices = std::move(oob);
        members[t].oob_error = oob_errors[t];
        members[t].config = tree_cfg;
    }

    auto weights = compute_weights(oob_errors);
    for (std::size_t t = 0; t < config.n_trees; ++t) members[t].weight = weights[t];
    return std::make_unique<MmifModel>(std::move(members), config);
}

}  // namespace intreg
