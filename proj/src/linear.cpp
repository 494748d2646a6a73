#include "intreg/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "intreg/rng.hpp"

namespace intreg {

namespace {

// w layout: [beta_0 .. beta_{m-1}, beta0]; only the first m entries are penalized
struct Problem {
    const std::vector<double>& X;  // n x m row-major, standardized
    std::size_t n, m;
    std::span<const IntervalTarget> targets;
    HingeLossSpec loss;

    double smooth(std::span<const double> w) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = X.data() + i * m;
            double pred = w[m];
            for (std::size_t j = 0; j < m; ++j) pred += x[j] * w[j];
            sum += hinge_loss(pred, targets[i], loss);
        }
        return sum / static_cast<double>(n);
    }

    void smooth_grad(std::span<const double> w, std::span<double> grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = X.data() + i * m;
            double pred = w[m];
            for (std::size_t j = 0; j < m; ++j) pred += x[j] * w[j];
            double g = hinge_subgrad(pred, targets[i], loss);
            if (g == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) grad[j] += g * x[j];
            grad[m] += g;
        }
        for (double& v : grad) v /= static_cast<double>(n);
    }

    double l1(std::span<const double> w) const {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += std::abs(w[j]);
        return s;
    }
};

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

double linear_objective(const std::vector<double>& features, std::size_t n, std::size_t m,
                        std::span<const IntervalTarget> targets, const LinearModel& model,
                        double lambda, const HingeLossSpec& loss) {
    Problem prob{features, n, m, targets, loss};
    std::vector<double> w(model.beta);
    w.push_back(model.beta0);
    return prob.smooth(w) + lambda * prob.l1(w);
}

LinearModel fit_linear_at_lambda(const std::vector<double>& features, std::size_t n,
                                 std::size_t m, std::span<const IntervalTarget> targets,
                                 double lambda, const HingeLossSpec& loss,
                                 const LinearModel* init, const FistaSettings& settings) {
    Problem prob{features, n, m, targets, loss};
    const std::size_t dim = m + 1;

    std::vector<double> x(dim, 0.0);  // current iterate
    if (init) {
        std::copy(init->beta.begin(), init->beta.end(), x.begin());
        x[m] = init->beta0;
    }
    std::vector<double> y = x;  // momentum point
    std::vector<double> grad(dim), cand(dim), x_prev(dim);
    double t_momentum = 1.0;
    double step_L = 1.0;

    auto objective = [&](std::span<const double> w) {
        return prob.smooth(w) + lambda * prob.l1(w);
    };

    double fx = objective(x);
    bool converged = false;

    for (int iter = 0; iter < settings.max_iters; ++iter) {
        double gy = prob.smooth(y);
        prob.smooth_grad(y, grad);

        // backtracking: double L until the quadratic upper bound holds at the prox point
        for (;;) {
            for (std::size_t j = 0; j < m; ++j)
                cand[j] = soft_threshold(y[j] - grad[j] / step_L, lambda / step_L);
            cand[m] = y[m] - grad[m] / step_L;
            double g_cand = prob.smooth(cand);
            double quad = gy, dist2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double d = cand[j] - y[j];
                quad += grad[j] * d;
                dist2 += d * d;
            }
            quad += 0.5 * step_L * dist2;
            if (g_cand <= quad + 1e-12 * std::max(1.0, std::abs(gy))) break;
            step_L *= 2.0;
            if (step_L > 1e16) break;
        }

        double f_cand = objective(cand);
        x_prev = x;
        double fx_prev = fx;
        if (f_cand <= fx) {
            // accept; standard FISTA momentum
            x = cand;
            fx = f_cand;
            double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
            for (std::size_t j = 0; j < dim; ++j)
                y[j] = x[j] + ((t_momentum - 1.0) / t_next) * (x[j] - x_prev[j]);
            t_momentum = t_next;
        } else {
            // monotone restart: keep x, drop momentum
            t_momentum = 1.0;
            y = x;
        }

        if (std::abs(fx_prev - fx) <= settings.rel_tol * std::max(1.0, std::abs(fx_prev))) {
            converged = true;
            break;
        }
    }

    LinearModel model;
    model.beta.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
    model.beta0 = x[m];
    model.lambda = lambda;
    model.converged = converged;
    return model;
}

double LinearRegressor::predict(std::span<const double> x) const {
    std::vector<double> xn(x.size());
    stats_.apply(x, xn);
    double pred = model_.beta0;
    for (std::size_t j = 0; j < xn.size(); ++j) pred += model_.beta[j] * xn[j];
    return pred;
}

nlohmann::json LinearRegressor::hyperparams() const {
    std::size_t nonzero = 0;
    for (double b : model_.beta)
        if (b != 0.0) ++nonzero;
    return {{"lambda", model_.lambda}, {"nonzero_coefficients", nonzero}};
}

namespace {

std::vector<double> standardized_matrix(const Dataset& data, const FeatureStats& stats) {
    const std::size_t n = data.n_rows(), m = data.n_cols();
    std::vector<double> X(n * m);
    for (std::size_t i = 0; i < n; ++i) stats.apply(data.row(i), {X.data() + i * m, m});
    return X;
}

bool all_zero(const std::vector<double>& beta) {
    return std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0.0; });
}

}  // namespace

std::unique_ptr<Regressor> train_linear_at_lambda(const Dataset& train, double lambda,
                                                  const HingeLossSpec& loss) {
    FeatureStats stats = compute_feature_stats(train);
    auto X = standardized_matrix(train, stats);
    LinearModel model = fit_linear_at_lambda(X, train.n_rows(), train.n_cols(),
                                             train.targets(), lambda, loss);
    return std::make_unique<LinearRegressor>(std::move(model), std::move(stats));
}

std::unique_ptr<Regressor> fit_linear_path_cv(const Dataset& train, std::uint64_t seed,
                                              const HingeLossSpec& loss) {
    const std::size_t n = train.n_rows(), m = train.n_cols();
    if (n < 5) throw std::invalid_argument("fit_linear_path_cv: need at least 5 rows");

    FeatureStats stats = compute_feature_stats(train);
    auto X = standardized_matrix(train, stats);

    // full-train path defines the lambda grid: grow until beta == 0
    constexpr double kLambdaStart = 0.001;
    constexpr double kLambdaFactor = 1.2;
    constexpr int kMaxPathLength = 256;
    std::vector<double> lambdas;
    std::vector<LinearModel> path;
    {
        LinearModel warm;
        double lambda = kLambdaStart;
        for (int j = 0; j < kMaxPathLength; ++j) {
            warm = fit_linear_at_lambda(X, n, m, train.targets(), lambda, loss,
                                        path.empty() ? nullptr : &warm);
            lambdas.push_back(lambda);
            path.push_back(warm);
            if (all_zero(warm.beta)) break;
            lambda *= kLambdaFactor;
        }
    }

    // 5-fold CV across the same grid, warm-started along each fold's path
    FoldAssignment folds = make_folds(n, 5, mix_seed(seed, 0x6c696e));
    std::vector<double> cv_err(lambdas.size(), 0.0);
    for (int f = 0; f < folds.k; ++f) {
        auto tr_idx = folds.complement_indices(f);
        auto te_idx = folds.fold_indices(f);
        Dataset tr = train.subset_rows(tr_idx);
        Dataset te = train.subset_rows(te_idx);
        auto Xtr = standardized_matrix(tr, stats);
        auto Xte = standardized_matrix(te, stats);
        LinearModel warm;
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            warm = fit_linear_at_lambda(Xtr, tr.n_rows(), m, tr.targets(), lambdas[li], loss,
                                        li == 0 ? nullptr : &warm);
            std::vector<double> preds(te.n_rows());
            for (std::size_t i = 0; i < te.n_rows(); ++i) {
                const double* x = Xte.data() + i * m;
                double pred = warm.beta0;
                for (std::size_t j = 0; j < m; ++j) pred += warm.beta[j] * x[j];
                preds[i] = pred;
            }
            cv_err[li] += mean_squared_hinge_error(preds, te.targets());
        }
    }

    // ties toward larger lambda (sparser model)
    std::size_t best = 0;
    for (std::size_t li = 1; li < lambdas.size(); ++li)
        if (cv_err[li] <= cv_err[best]) best = li;

    return std::make_unique<LinearRegressor>(path[best], std::move(stats));
}

}  // namespace intreg
