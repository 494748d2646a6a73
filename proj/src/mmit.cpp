#include "intreg/mmit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "intreg/rng.hpp"

namespace intreg {

nlohmann::json TreeNode::to_json() const {
    if (is_leaf()) {
        return {{"kind", "leaf"},
                {"value", value},
                {"achieved_loss", achieved_loss},
                {"n_samples", n_samples}};
    }
    return {{"kind", "split"},
            {"feature", feature},
            {"threshold", threshold},
            {"left", left->to_json()},
            {"right", right->to_json()}};
}

std::unique_ptr<TreeNode> TreeNode::from_json(const nlohmann::json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.at("kind") == "leaf") {
        node->value = j.at("value");
        node->achieved_loss = j.at("achieved_loss");
        node->n_samples = j.at("n_samples");
    } else {
        node->feature = j.at("feature");
        node->threshold = j.at("threshold");
        node->left = from_json(j.at("left"));
        node->right = from_json(j.at("right"));
    }
    return node;
}

std::optional<SplitResult> split_search(const Dataset& data, std::span<const int> samples,
                                        const HingeLossSpec& loss, std::size_t min_child) {
    const std::size_t s = samples.size();
    if (s < 2 || min_child < 1 || s < 2 * min_child) return std::nullopt;

    ConstantSolver solver;
    const auto& targets = data.targets();
    double parent_cost = solver.fit_subset(targets, samples, loss).total_loss;

    std::optional<SplitResult> best;
    std::vector<std::pair<double, int>> order(s);
    std::vector<int> left_idx, right_idx;
    left_idx.reserve(s);
    right_idx.reserve(s);

    for (std::size_t f = 0; f < data.n_cols(); ++f) {
        for (std::size_t i = 0; i < s; ++i) {
            int r = samples[i];
            order[i] = {data.at(static_cast<std::size_t>(r), f), r};
        }
        std::sort(order.begin(), order.end());
        for (std::size_t k = min_child; k + min_child <= s; ++k) {
            if (order[k - 1].first == order[k].first) continue;  // not a boundary
            double threshold = 0.5 * (order[k - 1].first + order[k].first);
            left_idx.clear();
            right_idx.clear();
            for (std::size_t i = 0; i < k; ++i) left_idx.push_back(order[i].second);
            for (std::size_t i = k; i < s; ++i) right_idx.push_back(order[i].second);
            double cost = solver.fit_subset(targets, left_idx, loss).total_loss +
                          solver.fit_subset(targets, right_idx, loss).total_loss;
            double gain = parent_cost - cost;
            if (gain > kSplitGainFloor && (!best || gain > best->gain)) {
                best = SplitResult{static_cast<int>(f), threshold, gain};
            }
        }
    }
    return best;
}

namespace {

std::unique_ptr<TreeNode> grow_node(const Dataset& train, const MmitConfig& cfg,
                                    std::vector<int>& samples, int depth,
                                    ConstantSolver& solver, double& total_cost) {
    auto node = std::make_unique<TreeNode>();
    ConstantFit fit = solver.fit_subset(train.targets(), samples, cfg.loss);
    node->value = fit.value;
    node->n_samples = samples.size();
    node->achieved_loss = fit.total_loss / static_cast<double>(samples.size());

    bool depth_ok = cfg.max_depth < 0 || depth < cfg.max_depth;
    bool size_ok = samples.size() >= 2 &&
                   samples.size() >= static_cast<std::size_t>(std::max(cfg.min_sample, 2));
    if (!depth_ok || !size_ok) return node;

    auto split = split_search(train, samples, cfg.loss);
    if (!split) return node;

    std::vector<int> left_samples, right_samples;
    for (int r : samples) {
        if (train.at(static_cast<std::size_t>(r), static_cast<std::size_t>(split->feature)) <=
            split->threshold)
            left_samples.push_back(r);
        else
            right_samples.push_back(r);
    }
    assert(!left_samples.empty() && !right_samples.empty());

    // accepted splits strictly decrease total training cost
    double before = total_cost;
    total_cost -= split->gain;
    assert(total_cost < before);
    (void)before;

    node->feature = split->feature;
    node->threshold = split->threshold;
    node->left = grow_node(train, cfg, left_samples, depth + 1, solver, total_cost);
    node->right = grow_node(train, cfg, right_samples, depth + 1, solver, total_cost);
    return node;
}

}  // namespace

std::unique_ptr<TreeNode> grow_mmit(const Dataset& train, const MmitConfig& config) {
    std::vector<int> samples(train.n_rows());
    for (std::size_t i = 0; i < train.n_rows(); ++i) samples[i] = static_cast<int>(i);
    ConstantSolver solver;
    double total_cost = solver.fit_subset(train.targets(), samples, config.loss).total_loss;
    return grow_node(train, config, samples, 0, solver, total_cost);
}

nlohmann::json MmitModel::hyperparams() const {
    return {{"max_depth", config_.max_depth}, {"min_sample", config_.min_sample}};
}

std::unique_ptr<Regressor> train_mmit(const Dataset& train, const MmitConfig& config) {
    return std::make_unique<MmitModel>(grow_mmit(train, config), config);
}

MmitGrid MmitGrid::full() {
    return {{0, 1, 5, 10, 20, -1}, {0, 1, 2, 4, 8, 16, 20}};
}

MmitGrid MmitGrid::fast() {
    return {{1, 5, -1}, {2, 8, 20}};
}

namespace {

// Walk at most cap levels down (cap < 0 means unbounded); interior nodes carry
// the best constant of their samples, so stopping early reproduces the tree
// that would have been grown with max_depth = cap.
double predict_capped(const TreeNode* node, std::span<const double> x, int cap) {
    int depth = 0;
    while (!node->is_leaf() && (cap < 0 || depth < cap)) {
        node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? node->left.get()
                   : node->right.get();
        ++depth;
    }
    return node->value;
}

}  // namespace

MmitConfig mmit_cv_best_config(const Dataset& train, const FoldAssignment& folds,
                               const MmitGrid& grid, const HingeLossSpec& loss) {
    std::vector<std::pair<Dataset, Dataset>> splits;
    splits.reserve(static_cast<std::size_t>(folds.k));
    for (int f = 0; f < folds.k; ++f)
        splits.emplace_back(train.subset_rows(folds.complement_indices(f)),
                            train.subset_rows(folds.fold_indices(f)));

    int grow_depth = -1;
    if (std::none_of(grid.max_depths.begin(), grid.max_depths.end(),
                     [](int d) { return d < 0; }))
        grow_depth = *std::max_element(grid.max_depths.begin(), grid.max_depths.end());

    std::vector<std::vector<double>> err(
        grid.max_depths.size(), std::vector<double>(grid.min_samples.size(), 0.0));
    for (std::size_t ms = 0; ms < grid.min_samples.size(); ++ms) {
        MmitConfig cfg{grow_depth, grid.min_samples[ms], loss};
        for (auto& [tr, te] : splits) {
            auto tree = grow_mmit(tr, cfg);
            for (std::size_t d = 0; d < grid.max_depths.size(); ++d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < te.n_rows(); ++i)
                    sum += hinge_loss(predict_capped(tree.get(), te.row(i),
                                                     grid.max_depths[d]),
                                      te.target(i), {2, 0.0});
                err[d][ms] += sum / static_cast<double>(te.n_rows());
            }
        }
    }

    double best_err = std::numeric_limits<double>::infinity();
    MmitConfig best{grid.max_depths.front(), grid.min_samples.front(), loss};
    for (std::size_t d = 0; d < grid.max_depths.size(); ++d)
        for (std::size_t ms = 0; ms < grid.min_samples.size(); ++ms)
            if (err[d][ms] < best_err) {
                best_err = err[d][ms];
                best = MmitConfig{grid.max_depths[d], grid.min_samples[ms], loss};
            }
    return best;
}

std::unique_ptr<Regressor> mmit_cv_select(const Dataset& train, std::uint64_t seed,
                                          const MmitGrid& grid, const HingeLossSpec& loss) {
    FoldAssignment folds = make_folds(train.n_rows(), 5, mix_seed(seed, 0x6d6d6974));
    return train_mmit(train, mmit_cv_best_config(train, folds, grid, loss));
}

}  // namespace intreg
