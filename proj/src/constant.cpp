#include "intreg/constant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "intreg/rng.hpp"

namespace intreg {

CandidateSet CandidateSet::from_targets(std::span<const IntervalTarget> targets) {
    CandidateSet cs;
    for (const auto& t : targets) {
        if (t.finite_lower() && t.finite_upper()) {
            cs.values.push_back(t.lower());
            cs.values.push_back(t.upper());
            cs.values.push_back((t.lower() + t.upper()) / 2.0);
        }
    }
    std::sort(cs.values.begin(), cs.values.end());
    cs.values.erase(std::unique(cs.values.begin(), cs.values.end()), cs.values.end());
    return cs;
}

ConstantFit ConstantSolver::fit(std::span<const IntervalTarget> targets,
                                const HingeLossSpec& spec) {
    if (targets.empty()) throw std::invalid_argument("best_constant: empty targets");
    scratch_.clear();
    for (const auto& t : targets) scratch_.push_back(&t);
    return solve(spec);
}

ConstantFit ConstantSolver::fit_subset(std::span<const IntervalTarget> all,
                                       std::span<const int> idx, const HingeLossSpec& spec) {
    if (idx.empty()) throw std::invalid_argument("best_constant: empty targets");
    scratch_.clear();
    for (int i : idx) scratch_.push_back(&all[i]);
    return solve(spec);
}

ConstantFit ConstantSolver::solve(const HingeLossSpec& spec) {
    lowers_.clear();
    uppers_.clear();
    for (const IntervalTarget* t : scratch_) {
        // margin-shifted bounds: a lower is violated when c < it, an upper when c > it
        if (t->finite_lower()) lowers_.push_back(t->lower() + spec.epsilon);
        if (t->finite_upper()) uppers_.push_back(t->upper() - spec.epsilon);
    }

    // zero-loss region [max shifted lower, min shifted upper]; when it is
    // nonempty, its smallest sensible point wins (ties break low)
    const double inf = std::numeric_limits<double>::infinity();
    double zl = lowers_.empty() ? -inf : *std::max_element(lowers_.begin(), lowers_.end());
    double zu = uppers_.empty() ? inf : *std::min_element(uppers_.begin(), uppers_.end());
    if (zl <= zu) {
        double c = !lowers_.empty() ? zl : (!uppers_.empty() ? zu : 0.0);
        return {c, 0.0};
    }

    std::sort(lowers_.begin(), lowers_.end());
    std::sort(uppers_.begin(), uppers_.end());
    auto prefix = [](const std::vector<double>& v, std::vector<double>& sum,
                     std::vector<double>& sumsq) {
        sum.assign(v.size() + 1, 0.0);
        sumsq.assign(v.size() + 1, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            sum[i + 1] = sum[i] + v[i];
            sumsq[i + 1] = sumsq[i] + v[i] * v[i];
        }
    };
    prefix(lowers_, lo_sum_, lo_sumsq_);
    prefix(uppers_, up_sum_, up_sumsq_);

    // violated-set statistics for a probe value c
    struct Active {
        std::size_t lcnt, ucnt;
        double lsum, lsumsq, usum, usumsq;
    };
    auto active_at = [this](double c) {
        Active a{};
        auto lit = std::upper_bound(lowers_.begin(), lowers_.end(), c);
        std::size_t lk = static_cast<std::size_t>(lit - lowers_.begin());
        a.lcnt = lowers_.size() - lk;
        a.lsum = lo_sum_.back() - lo_sum_[lk];
        a.lsumsq = lo_sumsq_.back() - lo_sumsq_[lk];
        auto uit = std::lower_bound(uppers_.begin(), uppers_.end(), c);
        a.ucnt = static_cast<std::size_t>(uit - uppers_.begin());
        a.usum = up_sum_[a.ucnt];
        a.usumsq = up_sumsq_[a.ucnt];
        return a;
    };
    auto loss_at = [spec, &active_at](double c) {
        Active a = active_at(c);
        double loss = 0.0;
        if (spec.p == 1) {
            loss += a.lsum - static_cast<double>(a.lcnt) * c;
            loss += static_cast<double>(a.ucnt) * c - a.usum;
        } else {
            loss += a.lsumsq - 2.0 * c * a.lsum + static_cast<double>(a.lcnt) * c * c;
            loss += static_cast<double>(a.ucnt) * c * c - 2.0 * c * a.usum + a.usumsq;
        }
        return loss;
    };

    // the objective is convex piecewise linear (p=1) or quadratic (p=2) with
    // knots at the shifted bounds; scan knots ascending, and for p=2 also the
    // stationary point of every quadratic segment
    cands_.clear();
    cands_.reserve(lowers_.size() + uppers_.size());
    cands_.insert(cands_.end(), lowers_.begin(), lowers_.end());
    cands_.insert(cands_.end(), uppers_.begin(), uppers_.end());
    std::sort(cands_.begin(), cands_.end());
    cands_.erase(std::unique(cands_.begin(), cands_.end()), cands_.end());

    double best_c = cands_.front();
    double best_loss = std::numeric_limits<double>::infinity();
    auto consider = [&](double c) {
        double loss = loss_at(c);
        if (loss < best_loss || (loss == best_loss && c < best_c)) {
            best_loss = loss;
            best_c = c;
        }
    };
    for (double c : cands_) consider(c);
    if (spec.p == 2) {
        for (std::size_t i = 0; i <= cands_.size(); ++i) {
            double a = i == 0 ? -inf : cands_[i - 1];
            double b = i == cands_.size() ? inf : cands_[i];
            // violated sets are constant on the open segment (a, b)
            double probe = i == 0 ? b - 1.0
                         : i == cands_.size() ? a + 1.0
                                              : 0.5 * (a + b);
            Active act = active_at(probe);
            std::size_t cnt = act.lcnt + act.ucnt;
            if (cnt == 0) continue;
            double c = (act.lsum + act.usum) / static_cast<double>(cnt);
            if (c > a && c < b) consider(c);
        }
    }
    return {best_c, best_loss};
}

double best_constant(std::span<const IntervalTarget> targets, const HingeLossSpec& spec) {
    ConstantSolver solver;
    return solver.fit(targets, spec).value;
}

namespace {

class ConstantModel final : public Regressor {
public:
    explicit ConstantModel(double value) : value_(value) {}
    double predict(std::span<const double>) const override { return value_; }
    nlohmann::json hyperparams() const override { return {{"value", value_}}; }

private:
    double value_;
};

class KnnModel final : public Regressor {
public:
    KnnModel(const Dataset& train, std::size_t k, HingeLossSpec loss)
        : k_(k), loss_(loss), m_(train.n_cols()), targets_(train.targets()) {
        if (k < 1 || k > train.n_rows()) throw std::invalid_argument("knn: k out of range");
        stats_ = compute_feature_stats(train);
        const std::size_t n = train.n_rows();
        features_.resize(n * m_);
        for (std::size_t i = 0; i < n; ++i)
            stats_.apply(train.row(i), {features_.data() + i * m_, m_});
    }

    double predict(std::span<const double> x) const override {
        std::vector<double> xn(m_);
        stats_.apply(x, xn);
        const std::size_t n = targets_.size();
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = features_.data() + i * m_;
            double d = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                double diff = xn[j] - r[j];
                d += diff * diff;
            }
            dist[i] = {d, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
                          dist.end());  // pair ordering breaks ties by row index
        std::vector<IntervalTarget> neigh;
        neigh.reserve(k_);
        for (std::size_t i = 0; i < k_; ++i) neigh.push_back(targets_[dist[i].second]);
        ConstantSolver solver;
        return solver.fit(neigh, loss_).value;
    }

    nlohmann::json hyperparams() const override { return {{"k", k_}}; }

private:
    std::size_t k_;
    HingeLossSpec loss_;
    std::size_t m_;
    std::vector<IntervalTarget> targets_;
    std::vector<double> features_;  // normalized
    FeatureStats stats_;
};

}  // namespace

std::unique_ptr<Regressor> train_constant(const Dataset& train) {
    ConstantSolver solver;
    return std::make_unique<ConstantModel>(
        solver.fit(train.targets(), HingeLossSpec{2, 0.0}).value);
}

std::unique_ptr<Regressor> train_knn(const Dataset& train, std::size_t k,
                                     const HingeLossSpec& loss) {
    return std::make_unique<KnnModel>(train, k, loss);
}

std::unique_ptr<Regressor> knn_cv_select(const Dataset& train, std::uint64_t seed,
                                         const HingeLossSpec& loss) {
    const std::size_t n = train.n_rows();
    const std::size_t k_max =
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    FoldAssignment folds = make_folds(n, 5, mix_seed(seed, 0x6b6e6e));
    std::vector<double> cv_err(k_max + 1, 0.0);
    for (int f = 0; f < folds.k; ++f) {
        auto tr_idx = folds.complement_indices(f);
        auto te_idx = folds.fold_indices(f);
        Dataset tr = train.subset_rows(tr_idx);
        Dataset te = train.subset_rows(te_idx);
        std::size_t fold_k_max = std::min(k_max, tr.n_rows());
        for (std::size_t k = 1; k <= fold_k_max; ++k) {
            KnnModel model(tr, k, loss);
            auto preds = predict_all(model, te);
            cv_err[k] += mean_squared_hinge_error(preds, te.targets());
        }
        for (std::size_t k = fold_k_max + 1; k <= k_max; ++k)
            cv_err[k] = std::numeric_limits<double>::infinity();
    }
    std::size_t best_k = 1;
    for (std::size_t k = 2; k <= k_max; ++k)
        if (cv_err[k] < cv_err[best_k]) best_k = k;
    return train_knn(train, best_k, loss);
}

std::vector<double> predict_all(const Regressor& model, const Dataset& data) {
    std::vector<double> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) out[i] = model.predict(data.row(i));
    return out;
}

}  // namespace intreg
