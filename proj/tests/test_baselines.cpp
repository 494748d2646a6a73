#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "intreg/constant.hpp"
#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/rng.hpp"

using namespace intreg;

namespace {

double mean_hinge(double c, std::span<const IntervalTarget> targets,
                  const HingeLossSpec& spec) {
    double s = 0;
    for (const auto& t : targets) s += hinge_loss(c, t, spec);
    return s / static_cast<double>(targets.size());
}

// Brute-force grid search over the finite-bound hull, step 1e-4.
double grid_search_loss(std::span<const IntervalTarget> targets, const HingeLossSpec& spec) {
    double lo = IntervalTarget::inf(), hi = -IntervalTarget::inf();
    for (const auto& t : targets) {
        if (t.finite_lower()) lo = std::min(lo, t.lower()), hi = std::max(hi, t.lower());
        if (t.finite_upper()) lo = std::min(lo, t.upper()), hi = std::max(hi, t.upper());
    }
    if (lo > hi) return mean_hinge(0.0, targets, spec);
    double best = IntervalTarget::inf();
    for (double c = lo; c <= hi + 1e-9; c += 1e-4)
        best = std::min(best, mean_hinge(c, targets, spec));
    return best;
}

// Continuous minimum of the (convex for p=2) mean hinge via ternary search.
double ternary_search_loss(std::span<const IntervalTarget> targets,
                           const HingeLossSpec& spec) {
    double lo = -50, hi = 50;
    for (int it = 0; it < 300; ++it) {
        double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
        if (mean_hinge(a, targets, spec) < mean_hinge(b, targets, spec))
            hi = b;
        else
            lo = a;
    }
    return mean_hinge(0.5 * (lo + hi), targets, spec);
}

IntervalTarget random_interval(Rng& rng) {
    double a = rng.uniform(-5.0, 5.0), b = rng.uniform(-5.0, 5.0);
    if (a > b) std::swap(a, b);
    switch (rng.below(5)) {
        case 0: return {a, IntervalTarget::inf()};
        case 1: return {-IntervalTarget::inf(), b};
        case 2: return {a, a};
        default: return {a, b};
    }
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t m) {
    std::vector<double> feats(n * m);
    for (double& v : feats) v = rng.uniform(-5.0, 5.0);
    std::vector<IntervalTarget> targets;
    for (std::size_t i = 0; i < n; ++i) targets.push_back(random_interval(rng));
    std::vector<std::string> names(m);
    for (std::size_t j = 0; j < m; ++j) names[j] = "f" + std::to_string(j);
    return Dataset("rand", std::move(feats), n, m, std::move(names), std::move(targets));
}

}  // namespace

TEST_CASE("candidate set holds bounds and midpoints of finite intervals only") {
    const double inf = IntervalTarget::inf();
    std::vector<IntervalTarget> ts{{1, 3}, {2, inf}, {-inf, 4}, {5, 5}};
    auto cs = CandidateSet::from_targets(ts);
    CHECK(cs.values == std::vector<double>{1, 2, 3, 5});
    CHECK(std::is_sorted(cs.values.begin(), cs.values.end()));

    std::vector<IntervalTarget> open{{2, inf}, {-inf, 4}};
    CHECK(CandidateSet::from_targets(open).values.empty());
}

TEST_CASE("best_constant hand examples and tie-breaks") {
    HingeLossSpec p2{2, 0.0};
    CHECK(best_constant(std::vector<IntervalTarget>{{2, 5}}, p2) == 2.0);
    CHECK(best_constant(std::vector<IntervalTarget>{{1, 3}, {2, 4}}, p2) == 2.0);
    CHECK_THROWS_AS(best_constant(std::vector<IntervalTarget>{}, p2), std::invalid_argument);
}

TEST_CASE("best_constant empty-candidate fallbacks") {
    const double inf = IntervalTarget::inf();
    HingeLossSpec p2{2, 0.0};
    CHECK(best_constant(std::vector<IntervalTarget>{{1, inf}, {3, inf}}, p2) == 3.0);
    CHECK(best_constant(std::vector<IntervalTarget>{{-inf, 2}, {-inf, 7}}, p2) == 2.0);
    CHECK(best_constant(std::vector<IntervalTarget>{{-inf, inf}}, p2) == 0.0);
    // mixed one-sided: candidates still empty, max finite lower wins
    CHECK(best_constant(std::vector<IntervalTarget>{{1, inf}, {-inf, 5}}, p2) == 1.0);
}

TEST_CASE("best_constant handles a mixed-censoring hand example") {
    const double inf = IntervalTarget::inf();
    std::vector<IntervalTarget> ts{{1, 2}, {3, inf}, {-inf, 1.5}};
    HingeLossSpec p2{2, 0.0};
    ConstantSolver solver;
    auto fit = solver.fit(ts, p2);
    double grid = grid_search_loss(ts, p2);
    CHECK(fit.total_loss / 3.0 <= grid + 1e-3);
}

TEST_CASE("best_constant beats or ties every candidate") {
    Rng rng(42);
    HingeLossSpec specs[] = {{1, 0.0}, {2, 0.0}, {1, 0.5}, {2, 0.5}};
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<IntervalTarget> ts;
        std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i) ts.push_back(random_interval(rng));
        const auto& spec = specs[rng.below(4)];
        double c = best_constant(ts, spec);
        double at_c = mean_hinge(c, ts, spec);
        for (double cand : CandidateSet::from_targets(ts).values) {
            CHECK(at_c <= mean_hinge(cand, ts, spec) + 1e-12);
            // zero-loss ties must go to the smallest point of the region
            if (at_c == 0.0 && mean_hinge(cand, ts, spec) == 0.0) CHECK(c <= cand);
        }
    }
}

TEST_CASE("best_constant loss is within 1e-3 of brute-force grid search") {
    Rng rng(2024);
    ConstantSolver solver;
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<IntervalTarget> ts;
        std::size_t n = 1 + rng.below(10);
        for (std::size_t i = 0; i < n; ++i) ts.push_back(random_interval(rng));
        HingeLossSpec spec{rng.below(2) ? 1 : 2, rng.below(2) ? 0.0 : 0.2};
        auto fit = solver.fit(ts, spec);
        double grid = grid_search_loss(ts, spec);
        CHECK(fit.total_loss / static_cast<double>(ts.size()) <= grid + 1e-3);
    }
}

TEST_CASE("p=2 all-finite collections reach the ternary-search continuous optimum") {
    Rng rng(77);
    HingeLossSpec p2{2, 0.0};
    ConstantSolver solver;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<IntervalTarget> ts;
        std::size_t n = 2 + rng.below(10);
        for (std::size_t i = 0; i < n; ++i) {
            double a = rng.uniform(-5.0, 5.0), b = rng.uniform(-5.0, 5.0);
            if (a > b) std::swap(a, b);
            ts.emplace_back(a, b);
        }
        auto fit = solver.fit(ts, p2);
        double cont = ternary_search_loss(ts, p2);
        CHECK(fit.total_loss / static_cast<double>(ts.size()) <= cont + 1e-6);
        CHECK(fit.total_loss / static_cast<double>(ts.size()) >= cont - 1e-6);
    }
}

TEST_CASE("fit_subset agrees with fit on the picked rows") {
    Rng rng(5);
    std::vector<IntervalTarget> all;
    for (int i = 0; i < 20; ++i) all.push_back(random_interval(rng));
    std::vector<int> idx{0, 3, 7, 11, 19};
    std::vector<IntervalTarget> picked;
    for (int i : idx) picked.push_back(all[static_cast<std::size_t>(i)]);
    HingeLossSpec p2{2, 0.0};
    ConstantSolver solver;
    auto a = solver.fit_subset(all, idx, p2);
    auto b = solver.fit(picked, p2);
    CHECK(a.value == b.value);
    CHECK(a.total_loss == doctest::Approx(b.total_loss).epsilon(1e-12));
}

TEST_CASE("constant regressor predicts best_constant everywhere") {
    Rng rng(8);
    Dataset d = random_dataset(rng, 15, 3);
    auto model = train_constant(d);
    double expected = best_constant(d.targets(), {2, 0.0});
    std::vector<double> probe{0.0, 1.0, -2.0};
    CHECK(model->predict(probe) == expected);
    probe = {100.0, -100.0, 3.5};
    CHECK(model->predict(probe) == expected);
}

TEST_CASE("knn with k = n collapses to the constant model") {
    Rng rng(13);
    Dataset d = random_dataset(rng, 12, 4);
    auto knn = train_knn(d, d.n_rows());
    auto cst = train_constant(d);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.uniform(-5.0, 5.0);
        CHECK(knn->predict(x) == cst->predict(x));
    }
    CHECK_THROWS_AS(train_knn(d, 0), std::invalid_argument);
    CHECK_THROWS_AS(train_knn(d, d.n_rows() + 1), std::invalid_argument);
}

TEST_CASE("knn with k = 1 at a train row returns that row's best constant") {
    Dataset d("k1", {0.0, 5.0, 10.0}, 3, 1, {"x"}, {{2, 5}, {7, 9}, {-1, 0}});
    auto knn = train_knn(d, 1);
    std::vector<double> x{0.0};
    CHECK(knn->predict(x) == 2.0);
    x = {5.0};
    CHECK(knn->predict(x) == 7.0);
    x = {10.0};
    CHECK(knn->predict(x) == -1.0);
}

TEST_CASE("knn matches an exhaustive nearest-neighbor oracle on 30 instances") {
    Rng rng(30);
    Dataset d = random_dataset(rng, 30, 3);
    const std::size_t k = 3;
    auto knn = train_knn(d, k);
    FeatureStats st = compute_feature_stats(d);
    Dataset nd = normalize_with(d, st);

    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(3), nx(3);
        for (double& v : x) v = rng.uniform(-5.0, 5.0);
        st.apply(x, nx);
        // ties toward the lower row index: stable sort on distance
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t i = 0; i < nd.n_rows(); ++i) {
            double s = 0;
            for (std::size_t j = 0; j < 3; ++j) {
                double diff = nx[j] - nd.at(i, j);
                s += diff * diff;
            }
            dist.emplace_back(s, i);
        }
        std::sort(dist.begin(), dist.end());
        std::vector<IntervalTarget> nearest;
        for (std::size_t i = 0; i < k; ++i) nearest.push_back(d.target(dist[i].second));
        CHECK(knn->predict(x) == best_constant(nearest, {2, 0.0}));
    }
}

TEST_CASE("knn predictions are invariant under feature rescaling") {
    Rng rng(60);
    Dataset d = random_dataset(rng, 25, 3);
    std::vector<double> scaled(d.n_rows() * d.n_cols());
    const double scale[3] = {100.0, 0.01, 7.0};
    for (std::size_t i = 0; i < d.n_rows(); ++i)
        for (std::size_t j = 0; j < 3; ++j) scaled[i * 3 + j] = d.at(i, j) * scale[j];
    Dataset ds("scaled", std::move(scaled), d.n_rows(), 3, d.feature_names(), d.targets());

    auto a = train_knn(d, 4);
    auto b = train_knn(ds, 4);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(3), xs(3);
        for (std::size_t j = 0; j < 3; ++j) {
            x[j] = rng.uniform(-5.0, 5.0);
            xs[j] = x[j] * scale[j];
        }
        CHECK(a->predict(x) == doctest::Approx(b->predict(xs)).epsilon(1e-12));
    }
}

TEST_CASE("knn cv selection is deterministic and within the k grid") {
    Rng rng(90);
    Dataset d = random_dataset(rng, 40, 3);
    auto a = knn_cv_select(d, 11);
    auto b = knn_cv_select(d, 11);
    auto ja = a->hyperparams(), jb = b->hyperparams();
    CHECK(ja == jb);
    std::size_t k = ja.at("k");
    CHECK(k >= 1);
    CHECK(k <= static_cast<std::size_t>(std::ceil(std::sqrt(40.0))));
}
