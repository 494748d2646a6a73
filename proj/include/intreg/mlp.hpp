#pragma once

#include <memory>
#include <vector>

#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/regressor.hpp"

namespace intreg {

enum class Activation { relu, sigmoid };

inline const char* to_string(Activation a) {
    return a == Activation::relu ? "relu" : "sigmoid";
}

struct MlpConfig {
    int num_layers = 1;       // hidden layers, 1 or 2
    int hidden_size = 10;     // 5, 10 or 20
    Activation activation = Activation::relu;
    double learning_rate = 0.001;
    int max_epochs = 1000;
    int patience = 50;
    std::uint64_t seed = 0;
};

// Fully connected net, n_inputs -> hidden^{num_layers} -> 1, scalar output
// with no output activation. All parameters live in one contiguous vector so
// Adam and the finite-difference gradient checks can treat them uniformly.
class MlpNet {
public:
    MlpNet(std::size_t n_inputs, const MlpConfig& config);

    double forward(std::span<const double> x) const;

    // Mean hinge loss over the batch plus its gradient w.r.t. every parameter.
    double loss_and_grad(const std::vector<double>& X, std::size_t n,
                         std::span<const IntervalTarget> targets, const HingeLossSpec& loss,
                         std::vector<double>& grad) const;

    double batch_loss(const std::vector<double>& X, std::size_t n,
                      std::span<const IntervalTarget> targets,
                      const HingeLossSpec& loss) const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t n_params() const { return params_.size(); }

private:
    struct Layer {
        std::size_t in, out;
        std::size_t w_off, b_off;  // offsets into params_
    };

    std::size_t n_inputs_;
    Activation activation_;
    std::vector<Layer> layers_;
    std::vector<double> params_;

    friend class MlpTrainer;
};

class MlpRegressor final : public Regressor {
public:
    MlpRegressor(MlpNet net, MlpConfig config, FeatureStats stats)
        : net_(std::move(net)), config_(config), stats_(std::move(stats)) {}
    double predict(std::span<const double> x) const override;
    nlohmann::json hyperparams() const override;
    const MlpNet& net() const { return net_; }

private:
    MlpNet net_;
    MlpConfig config_;
    FeatureStats stats_;
};

// Full-batch Adam on the mean hinge loss, seeded 20% validation split for
// early stopping, returns the best-validation snapshot. Features are
// standardized internally. Throws on NaN loss (divergence).
std::unique_ptr<Regressor> train_mlp(const Dataset& train, const MlpConfig& config,
                                     const HingeLossSpec& loss = {2, 0.0});

struct MlpGrid {
    std::vector<int> num_layers = {1, 2};
    std::vector<int> hidden_sizes = {5, 10, 20};
    std::vector<Activation> activations = {Activation::relu, Activation::sigmoid};
    int max_epochs = 1000;

    static MlpGrid full() { return {}; }
    static MlpGrid fast() { return {{1}, {10}, {Activation::relu, Activation::sigmoid}, 300}; }
};

// 5-fold CV over the config grid on mean squared hinge error; ties broken by
// fewer parameters; refits the best config on the full train set.
std::unique_ptr<Regressor> mlp_cv_select(const Dataset& train, std::uint64_t seed,
                                         const MlpGrid& grid = MlpGrid::full(),
                                         const HingeLossSpec& loss = {2, 0.0});

}  // namespace intreg
