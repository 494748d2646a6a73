#pragma once

#include <memory>
#include <vector>

#include "intreg/mmit.hpp"

namespace intreg {

// w_i = (1/e_i') / sum_j (1/e_j'), e' = max(e, 1e-12); weights sum to 1.
std::vector<double> compute_weights(std::span<const double> oob_errors);

inline constexpr double kOobErrorFloor = 1e-12;

struct ForestMember {
    std::unique_ptr<TreeNode> tree;
    std::vector<std::size_t> feature_subset;
    std::vector<std::size_t> oob_indices;  // row indices into the forest's train set
    double oob_error = 0.0;
    double weight = 0.0;
    MmitConfig config;  // per-tree CV-selected hyperparameters
};

struct MmifConfig {
    std::size_t n_trees = 100;
    HingeLossSpec loss{2, 0.0};
    // Per-tree 5-fold CV on the tree's subsample (default, matches the
    // protocol); shared_cv runs one CV on the full train set instead.
    bool shared_cv = false;
    std::vector<int> cv_max_depths = {2, 5, 10, 15, 20, 25};
    std::vector<int> cv_min_splits = {2, 5, 10, 20, 50};

    static MmifConfig fast() {
        MmifConfig c;
        c.shared_cv = true;
        c.cv_max_depths = {5, 15, 25};
        c.cv_min_splits = {2, 10, 50};
        return c;
    }
};

class MmifModel final : public Regressor {
public:
    MmifModel(std::vector<ForestMember> members, MmifConfig config)
        : members_(std::move(members)), config_(std::move(config)) {}

    double predict(std::span<const double> x) const override;
    nlohmann::json hyperparams() const override;
    nlohmann::json to_json() const;

    const std::vector<ForestMember>& members() const { return members_; }

private:
    std::vector<ForestMember> members_;
    MmifConfig config_;
};

// Each tree trains on floor(2n/3) rows sampled without replacement with
// ceil(m/3) features; the complement rows are its out-of-bag set, whose mean
// squared hinge error sets the tree's aggregation weight.
std::unique_ptr<Regressor> train_mmif(const Dataset& train, std::uint64_t seed,
                                      const MmifConfig& config = {});

}  // namespace intreg
