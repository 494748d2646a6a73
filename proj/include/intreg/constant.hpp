#pragma once

#include <optional>
#include <span>
#include <vector>

#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/regressor.hpp"

namespace intreg {

// Finite bounds and midpoints {y_l, y_u, (y_l+y_u)/2} of every fully finite
// interval in a target collection; deduplicated and sorted ascending.
struct CandidateSet {
    std::vector<double> values;

    static CandidateSet from_targets(std::span<const IntervalTarget> targets);
};

struct ConstantFit {
    double value = 0.0;
    double total_loss = 0.0;  // sum (not mean) of hinge losses at value
};

// Reusable solver; minimizes the total hinge cost exactly. The objective is
// convex and piecewise linear (p=1) or quadratic (p=2) with knots at the
// margin-shifted bounds, so scanning knots plus per-segment stationary points
// via sorted prefix sums finds the optimum in O(s log s). Ties go to the
// smallest minimizer; with no finite bound at all the value falls back to 0.
class ConstantSolver {
public:
    ConstantFit fit(std::span<const IntervalTarget> targets, const HingeLossSpec& spec);

    // Same, over the subset all[idx[i]].
    ConstantFit fit_subset(std::span<const IntervalTarget> all, std::span<const int> idx,
                           const HingeLossSpec& spec);

private:
    std::vector<double> lowers_, uppers_, cands_;
    std::vector<double> lo_sum_, lo_sumsq_, up_sum_, up_sumsq_;
    std::vector<const IntervalTarget*> scratch_;

    ConstantFit solve(const HingeLossSpec& spec);
};

double best_constant(std::span<const IntervalTarget> targets, const HingeLossSpec& spec);

std::unique_ptr<Regressor> train_constant(const Dataset& train);

// Interval KNN: Euclidean distance on normalized features, prediction is the
// best constant over the k nearest targets. Distance ties break toward the
// lower row index.
std::unique_ptr<Regressor> train_knn(const Dataset& train, std::size_t k,
                                     const HingeLossSpec& loss = {2, 0.0});

// 5-fold CV over k in 1..ceil(sqrt(n)), then refit on the full train set.
std::unique_ptr<Regressor> knn_cv_select(const Dataset& train, std::uint64_t seed,
                                         const HingeLossSpec& loss = {2, 0.0});

}  // namespace intreg
