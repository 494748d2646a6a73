#pragma once

#include <memory>
#include <vector>

#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/regressor.hpp"

namespace intreg {

// Linear max-margin interval model: predict(x) = x . beta + beta0, trained by
// FISTA (monotone restart, backtracking line search) on
//   (1/n) sum hinge(x_i . beta + beta0) + lambda * ||beta||_1
// with the intercept unpenalized. Features are standardized internally; beta
// lives in the standardized space.
struct LinearModel {
    std::vector<double> beta;
    double beta0 = 0.0;
    double lambda = 0.0;
    bool converged = true;
};

struct FistaSettings {
    double rel_tol = 1e-8;
    int max_iters = 10000;
};

// Fits on an already-standardized feature matrix (row-major, n x m).
LinearModel fit_linear_at_lambda(const std::vector<double>& features, std::size_t n,
                                 std::size_t m, std::span<const IntervalTarget> targets,
                                 double lambda, const HingeLossSpec& loss,
                                 const LinearModel* init = nullptr,
                                 const FistaSettings& settings = {});

// Objective value (mean hinge + lambda * l1) for a given iterate; exposed for
// the descent-property tests.
double linear_objective(const std::vector<double>& features, std::size_t n, std::size_t m,
                        std::span<const IntervalTarget> targets, const LinearModel& model,
                        double lambda, const HingeLossSpec& loss);

class LinearRegressor final : public Regressor {
public:
    LinearRegressor(LinearModel model, FeatureStats stats)
        : model_(std::move(model)), stats_(std::move(stats)) {}
    double predict(std::span<const double> x) const override;
    nlohmann::json hyperparams() const override;
    const LinearModel& model() const { return model_; }
    const FeatureStats& stats() const { return stats_; }

private:
    LinearModel model_;
    FeatureStats stats_;
};

// Standardizes, fits at a single lambda, wraps as a Regressor.
std::unique_ptr<Regressor> train_linear_at_lambda(const Dataset& train, double lambda,
                                                  const HingeLossSpec& loss = {2, 0.0});

// Lambda path {0.001 * 1.2^j} with warm starts until beta = 0; lambda chosen
// by 5-fold CV on mean squared hinge error, ties toward larger lambda; refit
// on the full train set at the selected lambda.
std::unique_ptr<Regressor> fit_linear_path_cv(const Dataset& train, std::uint64_t seed,
                                              const HingeLossSpec& loss = {2, 0.0});

}  // namespace intreg
