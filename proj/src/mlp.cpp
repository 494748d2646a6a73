#include "intreg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "intreg/rng.hpp"

namespace intreg {

namespace {

inline double activate(Activation a, double v) {
    if (a == Activation::relu) return v > 0 ? v : 0.0;
    return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

inline double activate_grad(Activation a, double post) {
    // derivative expressed through the post-activation value
    if (a == Activation::relu) return post > 0 ? 1.0 : 0.0;
    return post * (1.0 - post);
}

}  // namespace

MlpNet::MlpNet(std::size_t n_inputs, const MlpConfig& config)
    : n_inputs_(n_inputs), activation_(config.activation) {
    if (config.num_layers < 1) throw std::invalid_argument("MlpNet: num_layers < 1");
    std::vector<std::size_t> sizes;
    sizes.push_back(n_inputs);
    for (int l = 0; l < config.num_layers; ++l)
        sizes.push_back(static_cast<std::size_t>(config.hidden_size));
    sizes.push_back(1);

    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer{sizes[l], sizes[l + 1], off, off + sizes[l] * sizes[l + 1]};
        off = layer.b_off + layer.out;
        layers_.push_back(layer);
    }
    params_.assign(off, 0.0);

    // seeded uniform fan-in scaling
    Rng rng(mix_seed(config.seed, 0x6d6c70));
    for (const Layer& layer : layers_) {
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (std::size_t i = 0; i < layer.in * layer.out; ++i)
            params_[layer.w_off + i] = rng.uniform(-bound, bound);
        for (std::size_t i = 0; i < layer.out; ++i)
            params_[layer.b_off + i] = rng.uniform(-bound, bound);
    }
}

double MlpNet::forward(std::span<const double> x) const {
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        next.assign(layer.out, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double v = params_[layer.b_off + o];
            const double* w = params_.data() + layer.w_off + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) v += w[i] * cur[i];
            next[o] = (l + 1 == layers_.size()) ? v : activate(activation_, v);
        }
        cur.swap(next);
    }
    return cur[0];
}

double MlpNet::loss_and_grad(const std::vector<double>& X, std::size_t n,
                             std::span<const IntervalTarget> targets,
                             const HingeLossSpec& loss, std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    const std::size_t n_layers = layers_.size();
    std::vector<std::vector<double>> act(n_layers + 1);  // post-activation per layer
    std::vector<std::vector<double>> delta(n_layers + 1);
    double total = 0.0;

    for (std::size_t s = 0; s < n; ++s) {
        const double* x = X.data() + s * n_inputs_;
        act[0].assign(x, x + n_inputs_);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const Layer& layer = layers_[l];
            act[l + 1].assign(layer.out, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                double v = params_[layer.b_off + o];
                const double* w = params_.data() + layer.w_off + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) v += w[i] * act[l][i];
                act[l + 1][o] = (l + 1 == n_layers) ? v : activate(activation_, v);
            }
        }
        double pred = act[n_layers][0];
        total += hinge_loss(pred, targets[s], loss);
        double dpred = hinge_subgrad(pred, targets[s], loss) / static_cast<double>(n);
        if (dpred == 0.0) continue;

        delta[n_layers].assign(1, dpred);
        for (std::size_t l = n_layers; l-- > 0;) {
            const Layer& layer = layers_[l];
            if (l > 0) delta[l].assign(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                double d = delta[l + 1][o];
                if (d == 0.0) continue;
                double* gw = grad.data() + layer.w_off + o * layer.in;
                const double* w = params_.data() + layer.w_off + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) {
                    gw[i] += d * act[l][i];
                    if (l > 0) delta[l][i] += d * w[i];
                }
                grad[layer.b_off + o] += d;
            }
            if (l > 0)
                for (std::size_t i = 0; i < layer.in; ++i)
                    delta[l][i] *= activate_grad(activation_, act[l][i]);
        }
    }
    return total / static_cast<double>(n);
}

double MlpNet::batch_loss(const std::vector<double>& X, std::size_t n,
                          std::span<const IntervalTarget> targets,
                          const HingeLossSpec& loss) const {
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        std::span<const double> x{X.data() + s * n_inputs_, n_inputs_};
        total += hinge_loss(forward(x), targets[s], loss);
    }
    return total / static_cast<double>(n);
}

double MlpRegressor::predict(std::span<const double> x) const {
    std::vector<double> xn(x.size());
    stats_.apply(x, xn);
    return net_.forward(xn);
}

nlohmann::json MlpRegressor::hyperparams() const {
    return {{"num_layers", config_.num_layers},
            {"hidden_size", config_.hidden_size},
            {"activation", to_string(config_.activation)},
            {"learning_rate", config_.learning_rate}};
}

std::unique_ptr<Regressor> train_mlp(const Dataset& train, const MlpConfig& config,
                                     const HingeLossSpec& loss) {
    const std::size_t n = train.n_rows(), m = train.n_cols();
    FeatureStats stats = compute_feature_stats(train);
    std::vector<double> X(n * m);
    for (std::size_t i = 0; i < n; ++i) stats.apply(train.row(i), {X.data() + i * m, m});

    // seeded 20% validation split for early stopping
    Rng split_rng(mix_seed(config.seed, 0x76616c));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    split_rng.shuffle(order);
    std::size_t n_val = std::max<std::size_t>(1, n / 5);
    if (n_val >= n) n_val = n - 1;
    std::vector<double> Xtr, Xval;
    std::vector<IntervalTarget> ttr, tval;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = order[i];
        auto* dst = i < n_val ? &Xval : &Xtr;
        dst->insert(dst->end(), X.begin() + static_cast<std::ptrdiff_t>(r * m),
                    X.begin() + static_cast<std::ptrdiff_t>((r + 1) * m));
        (i < n_val ? tval : ttr).push_back(train.target(r));
    }
    const std::size_t n_tr = ttr.size();

    MlpNet net(m, config);
    const std::size_t P = net.n_params();
    std::vector<double> grad(P), m1(P, 0.0), m2(P, 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    double best_val = net.batch_loss(Xval, n_val, tval, loss);
    std::vector<double> best_params = net.params();
    int since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double tr_loss = net.loss_and_grad(Xtr, n_tr, ttr, loss, grad);
        if (std::isnan(tr_loss))
            throw std::runtime_error("train_mlp: diverged (NaN loss) at epoch " +
                                     std::to_string(epoch));
        double bc1 = 1.0 - std::pow(beta1, epoch);
        double bc2 = 1.0 - std::pow(beta2, epoch);
        auto& p = net.params();
        for (std::size_t j = 0; j < P; ++j) {
            m1[j] = beta1 * m1[j] + (1.0 - beta1) * grad[j];
            m2[j] = beta2 * m2[j] + (1.0 - beta2) * grad[j] * grad[j];
            p[j] -= config.learning_rate * (m1[j] / bc1) /
                    (std::sqrt(m2[j] / bc2) + adam_eps);
        }
        double val = net.batch_loss(Xval, n_val, tval, loss);
        if (val < best_val) {
            best_val = val;
            best_params = p;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    net.params() = std::move(best_params);
    return std::make_unique<MlpRegressor>(std::move(net), config, std::move(stats));
}

std::unique_ptr<Regressor> mlp_cv_select(const Dataset& train, std::uint64_t seed,
                                         const MlpGrid& grid, const HingeLossSpec& loss) {
    FoldAssignment folds = make_folds(train.n_rows(), 5, mix_seed(seed, 0x6d6c7063));
    std::vector<std::pair<Dataset, Dataset>> splits;
    for (int f = 0; f < folds.k; ++f)
        splits.emplace_back(train.subset_rows(folds.complement_indices(f)),
                            train.subset_rows(folds.fold_indices(f)));

    auto param_count = [&](const MlpConfig& c) {
        MlpNet probe(train.n_cols(), c);
        return probe.n_params();
    };

    double best_err = std::numeric_limits<double>::infinity();
    std::size_t best_pcount = 0;
    MlpConfig best_cfg;
    bool first = true;
    for (int nl : grid.num_layers) {
        for (int hs : grid.hidden_sizes) {
            for (Activation act : grid.activations) {
                MlpConfig cfg;
                cfg.num_layers = nl;
                cfg.hidden_size = hs;
                cfg.activation = act;
                cfg.max_epochs = grid.max_epochs;
                cfg.seed = mix_seed(seed, hash_string(std::string(to_string(act)) +
                                                      std::to_string(nl) + "_" +
                                                      std::to_string(hs)));
                double err = 0.0;
                for (auto& [tr, te] : splits) {
                    auto model = train_mlp(tr, cfg, loss);
                    auto preds = predict_all(*model, te);
                    err += mean_squared_hinge_error(preds, te.targets());
                }
                std::size_t pc = param_count(cfg);
                bool better = first || err < best_err ||
                              (err == best_err && pc < best_pcount);
                if (better) {
                    best_err = err;
                    best_cfg = cfg;
                    best_pcount = pc;
                    first = false;
                }
            }
        }
    }
    best_cfg.seed = mix_seed(seed, 0xf17);
    return train_mlp(train, best_cfg, loss);
}

}  // namespace intreg
