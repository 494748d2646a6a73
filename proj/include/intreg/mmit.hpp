#pragma once

#include <limits>
#include <memory>
#include <optional>

#include "intreg/constant.hpp"
#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/regressor.hpp"
#include "json.hpp"

namespace intreg {

// CART-structured binary tree; leaves hold the best constant (hinge-optimal
// over the candidate set) of the samples reaching them. Routing: x goes left
// iff x[feature] <= threshold.
struct TreeNode {
    // internal
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;
    // leaf
    double value = 0.0;
    double achieved_loss = 0.0;  // mean hinge loss at value
    std::size_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
    double predict(std::span<const double> x) const {
        const TreeNode* node = this;
        while (!node->is_leaf())
            node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
                       ? node->left.get()
                       : node->right.get();
        return node->value;
    }

    nlohmann::json to_json() const;
    static std::unique_ptr<TreeNode> from_json(const nlohmann::json& j);
};

struct MmitConfig {
    int max_depth = -1;      // -1 means unbounded
    int min_sample = 0;      // minimum samples required to attempt a split
    HingeLossSpec loss{2, 0.0};
};

struct SplitResult {
    int feature;
    double threshold;
    double gain;  // parent total cost minus (left + right) total cost
};

inline constexpr double kSplitGainFloor = 1e-12;

// Exhaustive scan over every feature; thresholds are midpoints between
// consecutive distinct sorted values; child cost is the child's total hinge
// loss at its own best constant. Ties: lowest feature, then lowest threshold.
// min_child is the minimum rows either child must keep (>= 1).
std::optional<SplitResult> split_search(const Dataset& data, std::span<const int> samples,
                                        const HingeLossSpec& loss, std::size_t min_child = 1);

std::unique_ptr<TreeNode> grow_mmit(const Dataset& train, const MmitConfig& config);

class MmitModel final : public Regressor {
public:
    MmitModel(std::unique_ptr<TreeNode> root, MmitConfig config)
        : root_(std::move(root)), config_(config) {}
    double predict(std::span<const double> x) const override { return root_->predict(x); }
    nlohmann::json hyperparams() const override;
    const TreeNode& root() const { return *root_; }

private:
    std::unique_ptr<TreeNode> root_;
    MmitConfig config_;
};

std::unique_ptr<Regressor> train_mmit(const Dataset& train, const MmitConfig& config);

struct MmitGrid {
    std::vector<int> max_depths;   // -1 encodes unbounded
    std::vector<int> min_samples;

    static MmitGrid full();  // depth {0,1,5,10,20,inf} x min_sample {0,1,2,4,8,16,20}
    static MmitGrid fast();   // shrunk grid for the --fast profile
};

// Best (max_depth, min_sample) by CV on mean squared hinge error over the
// given folds. Greedy growth ignores the depth cap, so the depth-d tree is the
// unbounded tree truncated at depth d; one deep tree per (fold, min_sample)
// scores the whole depth grid. Ties break toward the earlier grid entry
// (depth-major order).
MmitConfig mmit_cv_best_config(const Dataset& train, const FoldAssignment& folds,
                               const MmitGrid& grid, const HingeLossSpec& loss);

// 5-fold CV over the grid on mean squared hinge error, refit on full train.
std::unique_ptr<Regressor> mmit_cv_select(const Dataset& train, std::uint64_t seed,
                                          const MmitGrid& grid = MmitGrid::full(),
                                          const HingeLossSpec& loss = {2, 0.0});

}  // namespace intreg
