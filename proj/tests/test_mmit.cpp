#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "intreg/constant.hpp"
#include "intreg/mmit.hpp"
#include "intreg/rng.hpp"

using namespace intreg;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t m) {
    std::vector<double> feats(n * m);
    for (double& v : feats) v = rng.uniform(-5.0, 5.0);
    std::vector<IntervalTarget> targets;
    for (std::size_t i = 0; i < n; ++i) {
        double a = rng.uniform(-4.0, 4.0), b = rng.uniform(-4.0, 4.0);
        if (a > b) std::swap(a, b);
        switch (rng.below(4)) {
            case 0: targets.emplace_back(a, IntervalTarget::inf()); break;
            case 1: targets.emplace_back(-IntervalTarget::inf(), b); break;
            default: targets.emplace_back(a, b == a ? b + 0.5 : b); break;
        }
    }
    std::vector<std::string> names(m);
    for (std::size_t j = 0; j < m; ++j) names[j] = "f" + std::to_string(j);
    return Dataset("rand", std::move(feats), n, m, std::move(names), std::move(targets));
}

double subset_cost(const Dataset& d, const std::vector<int>& idx, const HingeLossSpec& loss) {
    ConstantSolver solver;
    return solver.fit_subset(d.targets(), idx, loss).total_loss;
}

// Naive re-enumeration of every (feature, midpoint threshold) split.
std::optional<SplitResult> naive_split(const Dataset& d, const std::vector<int>& samples,
                                       const HingeLossSpec& loss, std::size_t min_child) {
    double parent = subset_cost(d, samples, loss);
    std::optional<SplitResult> best;
    for (std::size_t f = 0; f < d.n_cols(); ++f) {
        std::vector<double> vals;
        for (int i : samples) vals.push_back(d.at(static_cast<std::size_t>(i), f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            double thr = 0.5 * (vals[v] + vals[v + 1]);
            std::vector<int> left, right;
            for (int i : samples)
                (d.at(static_cast<std::size_t>(i), f) <= thr ? left : right).push_back(i);
            if (left.size() < min_child || right.size() < min_child) continue;
            double gain =
                parent - (subset_cost(d, left, loss) + subset_cost(d, right, loss));
            if (gain > kSplitGainFloor && (!best || gain > best->gain))
                best = SplitResult{static_cast<int>(f), thr, gain};
        }
    }
    return best;
}

}  // namespace

TEST_CASE("split search finds the separating feature with zero-cost children") {
    std::vector<double> feats;
    std::vector<IntervalTarget> targets;
    Rng rng(2);
    for (int i = 0; i < 12; ++i) {
        double x = i < 6 ? rng.uniform(-5.0, -1.0) : rng.uniform(1.0, 5.0);
        feats.push_back(rng.uniform(-5.0, 5.0));  // noise feature 0
        feats.push_back(x);                       // separating feature 1
        if (x < 0)
            targets.emplace_back(-2.0, -1.0);
        else
            targets.emplace_back(1.0, 2.0);
    }
    Dataset d("sep", std::move(feats), 12, 2, {"noise", "x"}, std::move(targets));
    std::vector<int> samples(12);
    for (int i = 0; i < 12; ++i) samples[static_cast<std::size_t>(i)] = i;
    auto split = split_search(d, samples, {2, 0.0});
    REQUIRE(split.has_value());
    CHECK(split->feature == 1);

    std::vector<int> left, right;
    for (int i : samples)
        (d.at(static_cast<std::size_t>(i), 1) <= split->threshold ? left : right).push_back(i);
    CHECK(subset_cost(d, left, {2, 0.0}) == 0.0);
    CHECK(subset_cost(d, right, {2, 0.0}) == 0.0);
}

TEST_CASE("identical targets produce no split") {
    Rng rng(3);
    std::vector<double> feats;
    std::vector<IntervalTarget> targets;
    for (int i = 0; i < 10; ++i) {
        feats.push_back(rng.uniform(-5.0, 5.0));
        targets.emplace_back(1.0, 2.0);
    }
    Dataset d("same", std::move(feats), 10, 1, {"x"}, std::move(targets));
    std::vector<int> samples(10);
    for (int i = 0; i < 10; ++i) samples[static_cast<std::size_t>(i)] = i;
    CHECK(!split_search(d, samples, {2, 0.0}).has_value());
}

TEST_CASE("split search matches naive exhaustive enumeration on 100 random sets") {
    Rng rng(4);
    HingeLossSpec p2{2, 0.0};
    for (int rep = 0; rep < 100; ++rep) {
        Dataset d = random_dataset(rng, 20, 3);
        std::vector<int> samples(20);
        for (int i = 0; i < 20; ++i) samples[static_cast<std::size_t>(i)] = i;
        auto got = split_search(d, samples, p2);
        auto want = naive_split(d, samples, p2, 1);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        CHECK(got->feature == want->feature);
        CHECK(got->threshold == want->threshold);
        CHECK(got->gain == want->gain);
    }
}

TEST_CASE("depth zero grows a single-leaf constant tree") {
    Rng rng(5);
    Dataset d = random_dataset(rng, 25, 3);
    MmitConfig cfg;
    cfg.max_depth = 0;
    auto root = grow_mmit(d, cfg);
    REQUIRE(root->is_leaf());
    CHECK(root->value == best_constant(d.targets(), cfg.loss));
    CHECK(root->n_samples == 25);
}

TEST_CASE("every leaf value is the best constant of the rows routed to it") {
    Rng rng(6);
    Dataset d = random_dataset(rng, 60, 4);
    MmitConfig cfg;
    cfg.max_depth = 4;
    auto root = grow_mmit(d, cfg);

    std::map<const TreeNode*, std::vector<IntervalTarget>> at_leaf;
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        const TreeNode* node = root.get();
        while (!node->is_leaf())
            node = d.at(i, static_cast<std::size_t>(node->feature)) <= node->threshold
                       ? node->left.get()
                       : node->right.get();
        at_leaf[node].push_back(d.target(i));
    }
    REQUIRE(!at_leaf.empty());
    for (const auto& [leaf, targets] : at_leaf) {
        CHECK(leaf->n_samples == targets.size());
        CHECK(leaf->value == best_constant(targets, cfg.loss));
        double mean = 0;
        for (const auto& t : targets) mean += hinge_loss(leaf->value, t, cfg.loss);
        mean /= static_cast<double>(targets.size());
        CHECK(leaf->achieved_loss == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("max depth bounds the tree and min_sample blocks small splits") {
    Rng rng(7);
    Dataset d = random_dataset(rng, 50, 3);
    MmitConfig cfg;
    cfg.max_depth = 2;
    auto root = grow_mmit(d, cfg);
    std::function<int(const TreeNode*)> depth = [&](const TreeNode* n) {
        if (n->is_leaf()) return 0;
        return 1 + std::max(depth(n->left.get()), depth(n->right.get()));
    };
    CHECK(depth(root.get()) <= 2);

    cfg.max_depth = -1;
    cfg.min_sample = 51;  // larger than the dataset: no split may be attempted
    auto stub = grow_mmit(d, cfg);
    CHECK(stub->is_leaf());
}

TEST_CASE("tree predictions are piecewise constant leaf values") {
    Rng rng(8);
    Dataset d = random_dataset(rng, 40, 2);
    auto reg = train_mmit(d, {});
    const auto& model = dynamic_cast<const MmitModel&>(*reg);
    std::vector<double> leaf_values;
    std::function<void(const TreeNode*)> collect = [&](const TreeNode* n) {
        if (n->is_leaf())
            leaf_values.push_back(n->value);
        else
            collect(n->left.get()), collect(n->right.get());
    };
    collect(&model.root());
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
        double p = reg->predict(x);
        CHECK(std::count(leaf_values.begin(), leaf_values.end(), p) > 0);
    }
}

TEST_CASE("json round trip preserves the tree exactly") {
    Rng rng(9);
    Dataset d = random_dataset(rng, 35, 3);
    MmitConfig cfg;
    cfg.max_depth = 3;
    auto root = grow_mmit(d, cfg);
    auto back = TreeNode::from_json(root->to_json());
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0),
                              rng.uniform(-6.0, 6.0)};
        CHECK(back->predict(x) == root->predict(x));
    }
    CHECK(back->to_json() == root->to_json());
}

TEST_CASE("cv selection is deterministic and stays inside the grid") {
    Rng rng(10);
    Dataset d = random_dataset(rng, 40, 2);
    MmitGrid grid = MmitGrid::fast();
    auto a = mmit_cv_select(d, 21, grid);
    auto b = mmit_cv_select(d, 21, grid);
    CHECK(a->hyperparams() == b->hyperparams());
    int depth = a->hyperparams().at("max_depth");
    CHECK(std::count(grid.max_depths.begin(), grid.max_depths.end(), depth) > 0);
}
