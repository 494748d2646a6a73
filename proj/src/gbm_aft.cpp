#include "intreg/gbm_aft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "intreg/constant.hpp"
#include "intreg/rng.hpp"

namespace intreg {

std::vector<IntervalTarget> transform_targets_exp(std::span<const IntervalTarget> targets) {
    std::vector<IntervalTarget> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        if ((t.finite_lower() && t.lower() > 700.0) || (t.finite_upper() && t.upper() > 700.0))
            throw std::invalid_argument(
                "transform_targets_exp: bound above 700 overflows exp; pre-scale the data");
        double lo = t.finite_lower() ? std::exp(t.lower()) : 0.0;
        double hi = t.finite_upper() ? std::exp(t.upper()) : IntervalTarget::inf();
        out.emplace_back(lo, hi);
    }
    return out;
}

double GbmTree::predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

double gbm_leaf_value(double sum_grad, double sum_hess, double reg_alpha, double reg_lambda) {
    return -soft_threshold(sum_grad, reg_alpha) / (sum_hess + reg_lambda);
}

double gbm_split_score(double sum_grad, double sum_hess, double reg_alpha, double reg_lambda) {
    double g = soft_threshold(sum_grad, reg_alpha);
    return g * g / (sum_hess + reg_lambda);
}

namespace {

constexpr double kGbmGainFloor = 1e-12;

struct TreeBuilder {
    const Dataset& data;
    const std::vector<double>& grads;
    const std::vector<double>& hess;
    const BoostConfig& cfg;
    GbmTree tree;

    int build(std::vector<int>& samples, int depth) {
        double G = 0.0, H = 0.0;
        for (int r : samples) {
            G += grads[static_cast<std::size_t>(r)];
            H += hess[static_cast<std::size_t>(r)];
        }
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().value = gbm_leaf_value(G, H, cfg.reg_alpha, cfg.reg_lambda);
        if (depth >= cfg.max_depth || samples.size() < 2) return idx;

        double parent_score = gbm_split_score(G, H, cfg.reg_alpha, cfg.reg_lambda);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> order(samples.size());
        for (std::size_t f = 0; f < data.n_cols(); ++f) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                order[i] = {data.at(static_cast<std::size_t>(samples[i]), f), samples[i]};
            std::sort(order.begin(), order.end());
            double GL = 0.0, HL = 0.0;
            for (std::size_t k = 1; k < order.size(); ++k) {
                GL += grads[static_cast<std::size_t>(order[k - 1].second)];
                HL += hess[static_cast<std::size_t>(order[k - 1].second)];
                if (order[k - 1].first == order[k].first) continue;
                double GR = G - GL, HR = H - HL;
                if (HL < cfg.min_child_weight || HR < cfg.min_child_weight) continue;
                double gain = 0.5 * (gbm_split_score(GL, HL, cfg.reg_alpha, cfg.reg_lambda) +
                                     gbm_split_score(GR, HR, cfg.reg_alpha, cfg.reg_lambda) -
                                     parent_score);
                if (gain > best_gain + kGbmGainFloor) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (order[k - 1].first + order[k].first);
                }
            }
        }
        if (best_feature < 0 || best_gain <= kGbmGainFloor) return idx;

        std::vector<int> left_s, right_s;
        for (int r : samples) {
            if (data.at(static_cast<std::size_t>(r), static_cast<std::size_t>(best_feature)) <=
                best_threshold)
                left_s.push_back(r);
            else
                right_s.push_back(r);
        }
        tree.nodes[static_cast<std::size_t>(idx)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(idx)].threshold = best_threshold;
        int li = build(left_s, depth + 1);
        tree.nodes[static_cast<std::size_t>(idx)].left = li;
        int ri = build(right_s, depth + 1);
        tree.nodes[static_cast<std::size_t>(idx)].right = ri;
        return idx;
    }
};

std::vector<IntervalTarget> preprocess_targets(std::span<const IntervalTarget> targets,
                                               const std::optional<double>& clamp) {
    if (!clamp) return {targets.begin(), targets.end()};
    std::vector<IntervalTarget> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        if (!t.finite_lower())
            out.emplace_back(std::min(*clamp, t.upper()), t.upper());
        else
            out.push_back(t);
    }
    return out;
}

}  // namespace

double GbmAftModel::predict(std::span<const double> x) const {
    double score = base_score_;
    for (const auto& t : trees_) score += config_.learning_rate * t.predict(x);
    return score;
}

nlohmann::json GbmAftModel::hyperparams() const {
    return {{"learning_rate", config_.learning_rate},
            {"max_depth", config_.max_depth},
            {"min_child_weight", config_.min_child_weight},
            {"reg_alpha", config_.reg_alpha},
            {"reg_lambda", config_.reg_lambda},
            {"aft_loss_distribution_scale", config_.sigma},
            {"distribution", to_string(config_.distribution)},
            {"n_rounds", config_.n_rounds}};
}

std::unique_ptr<Regressor> train_gbm_aft(const Dataset& train, const BoostConfig& config) {
    const std::size_t n = train.n_rows();
    auto log_targets = preprocess_targets(train.targets(), config.clamp_left_censored);
    auto exp_targets = transform_targets_exp(log_targets);
    const AftLossSpec aft_spec{config.distribution, config.sigma};

    // base score: best constant of the log-space (original) intervals
    double base = best_constant(log_targets, HingeLossSpec{2, 0.0});

    std::vector<double> scores(n, base);
    std::vector<double> grads(n), hess(n);
    std::vector<GbmTree> trees;
    trees.reserve(static_cast<std::size_t>(config.n_rounds));
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);

    for (int round = 0; round < config.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            auto [g, h] = aft_grad_hess(scores[i], exp_targets[i], aft_spec);
            grads[i] = g;
            hess[i] = h;
        }
        TreeBuilder builder{train, grads, hess, config, {}};
        std::vector<int> samples = all;
        builder.build(samples, 0);
        for (std::size_t i = 0; i < n; ++i)
            scores[i] += config.learning_rate * builder.tree.predict(train.row(i));
        trees.push_back(std::move(builder.tree));
    }
    return std::make_unique<GbmAftModel>(base, std::move(trees), config);
}

std::unique_ptr<Regressor> gbm_cv_select(const Dataset& train, std::uint64_t seed,
                                         const GbmGrid& grid, const GbmCvOptions& options) {
    std::vector<BoostConfig> cells;
    if (options.exhaustive) {
        for (auto dist : grid.distributions)
            for (double lr : grid.learning_rates)
                for (int depth : grid.max_depths)
                    for (double mcw : grid.min_child_weights)
                        for (double alpha : grid.reg_alphas)
                            for (double lambda : grid.reg_lambdas)
                                for (double sigma : grid.sigmas) {
                                    BoostConfig c;
                                    c.learning_rate = lr;
                                    c.max_depth = depth;
                                    c.min_child_weight = mcw;
                                    c.reg_alpha = alpha;
                                    c.reg_lambda = lambda;
                                    c.sigma = sigma;
                                    c.distribution = dist;
                                    c.clamp_left_censored = options.clamp_left_censored;
                                    cells.push_back(c);
                                }
    } else {
        Rng rng(mix_seed(seed, 0x67626d));
        auto pick = [&rng](const auto& v) { return v[rng.below(v.size())]; };
        for (std::size_t i = 0; i < options.sample_cells; ++i) {
            BoostConfig c;
            c.learning_rate = pick(grid.learning_rates);
            c.max_depth = pick(grid.max_depths);
            c.min_child_weight = pick(grid.min_child_weights);
            c.reg_alpha = pick(grid.reg_alphas);
            c.reg_lambda = pick(grid.reg_lambdas);
            c.sigma = pick(grid.sigmas);
            c.distribution = pick(grid.distributions);
            c.clamp_left_censored = options.clamp_left_censored;
            cells.push_back(c);
        }
    }

    FoldAssignment folds = make_folds(train.n_rows(), 5, mix_seed(seed, 0x67626d63));
    std::vector<std::pair<Dataset, Dataset>> splits;
    for (int f = 0; f < folds.k; ++f)
        splits.emplace_back(train.subset_rows(folds.complement_indices(f)),
                            train.subset_rows(folds.fold_indices(f)));

    double best_err = std::numeric_limits<double>::infinity();
    const BoostConfig* best_cfg = &cells.front();
    for (const auto& cfg : cells) {
        double err = 0.0;
        for (auto& [tr, te] : splits) {
            auto model = train_gbm_aft(tr, cfg);
            auto preds = predict_all(*model, te);
            err += mean_squared_hinge_error(preds, te.targets());
        }
        if (err < best_err) {
            best_err = err;
            best_cfg = &cfg;
        }
    }
    return train_gbm_aft(train, *best_cfg);
}

}  // namespace intreg
