#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/regressor.hpp"

namespace intreg {

// (y_l, y_u) -> (exp y_l, exp y_u) with exp(-inf) = 0 and exp(+inf) = +inf;
// the resulting non-negative intervals are what the AFT likelihood operates
// on. Throws when a finite bound exceeds 700 (exp overflow).
std::vector<IntervalTarget> transform_targets_exp(std::span<const IntervalTarget> targets);

struct BoostConfig {
    double learning_rate = 0.1;
    int max_depth = 6;
    double min_child_weight = 1.0;   // minimum sum of Hessians per child
    double reg_alpha = 0.0;          // L1 on leaf values (soft threshold on G)
    double reg_lambda = 1.0;         // L2 on leaf values
    double sigma = 1.0;              // aft_loss_distribution_scale
    AftDistribution distribution = AftDistribution::normal;
    int n_rounds = 100;
    // Opt-in preprocessing: replace -inf lower bounds (original scale) with
    // this value, turning left-censored targets interval-censored.
    std::optional<double> clamp_left_censored;
};

struct GbmTreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;  // indices into the tree's node vector
    double value = 0.0;         // leaf weight (pre learning-rate)
};

struct GbmTree {
    std::vector<GbmTreeNode> nodes;
    double predict(std::span<const double> x) const;
};

// Second-order (Newton) split gain and leaf value with L1/L2 regularization:
// value = -soft_threshold(G, alpha) / (H + lambda).
double gbm_leaf_value(double sum_grad, double sum_hess, double reg_alpha, double reg_lambda);
double gbm_split_score(double sum_grad, double sum_hess, double reg_alpha, double reg_lambda);

class GbmAftModel final : public Regressor {
public:
    GbmAftModel(double base_score, std::vector<GbmTree> trees, BoostConfig config)
        : base_score_(base_score), trees_(std::move(trees)), config_(config) {}

    // Accumulated log-space score; this IS the final prediction (no exp).
    double predict(std::span<const double> x) const override;
    nlohmann::json hyperparams() const override;

    double base_score() const { return base_score_; }
    const std::vector<GbmTree>& trees() const { return trees_; }

private:
    double base_score_;
    std::vector<GbmTree> trees_;
    BoostConfig config_;
};

std::unique_ptr<Regressor> train_gbm_aft(const Dataset& train, const BoostConfig& config);

struct GbmGrid {
    std::vector<double> learning_rates = {0.001, 0.01, 0.1, 1.0};
    std::vector<int> max_depths = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> min_child_weights = {0.001, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> reg_alphas = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> reg_lambdas = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> sigmas = {0.5, 0.8, 1.1, 1.4, 1.7, 2.0};
    std::vector<AftDistribution> distributions = {AftDistribution::normal,
                                                  AftDistribution::logistic,
                                                  AftDistribution::extreme};

    std::size_t cells_per_distribution() const {
        return learning_rates.size() * max_depths.size() * min_child_weights.size() *
               reg_alphas.size() * reg_lambdas.size() * sigmas.size();
    }
};

struct GbmCvOptions {
    bool exhaustive = false;     // search the full grid instead of sampling
    std::size_t sample_cells = 200;
    std::optional<double> clamp_left_censored;
};

// 5-fold CV on mean squared hinge error over the hyperparameter grid; a
// seeded random subsample of cells is searched unless exhaustive is set.
std::unique_ptr<Regressor> gbm_cv_select(const Dataset& train, std::uint64_t seed,
                                         const GbmGrid& grid = {},
                                         const GbmCvOptions& options = {});

}  // namespace intreg
