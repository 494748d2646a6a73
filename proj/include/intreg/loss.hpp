#pragma once

#include <span>
#include <utility>

#include "intreg/interval.hpp"

namespace intreg {

// Hinge interval loss: (ReLU(y_l - yhat + eps))^p + (ReLU(yhat - y_u + eps))^p.
// A term against an infinite bound is exactly 0 (an infinite bound cannot be
// violated); implemented by branching on bound finiteness, never inf - inf.
struct HingeLossSpec {
    int p = 2;           // exponent, 1 or 2
    double epsilon = 0;  // nonnegative margin

    HingeLossSpec(int p_ = 2, double epsilon_ = 0.0) : p(p_), epsilon(epsilon_) {
        if (p != 1 && p != 2) throw std::invalid_argument("HingeLossSpec: p must be 1 or 2");
        if (!(epsilon >= 0)) throw std::invalid_argument("HingeLossSpec: epsilon must be >= 0");
    }
};

double hinge_loss(double y_hat, const IntervalTarget& target, const HingeLossSpec& spec);

// d/dyhat of hinge_loss; 0 at the p=1 kinks (subgradient choice that keeps
// predictions inside the zero-loss region).
double hinge_subgrad(double y_hat, const IntervalTarget& target, const HingeLossSpec& spec);

// Evaluation metric: mean hinge loss with p=2, epsilon=0. Throws on empty or
// mismatched inputs.
double mean_squared_hinge_error(std::span<const double> predictions,
                                std::span<const IntervalTarget> targets);

// ---------------------------------------------------------------------------
// Accelerated failure time negative log-likelihood.
// Operates on positive-bound intervals (log y is taken inside); predictions
// are in log space. A lower bound of exactly 0 behaves as -inf in log space.

enum class AftDistribution { normal, logistic, extreme };

inline const char* to_string(AftDistribution d) {
    switch (d) {
        case AftDistribution::normal: return "normal";
        case AftDistribution::logistic: return "logistic";
        case AftDistribution::extreme: return "extreme";
    }
    return "?";
}

struct AftLossSpec {
    AftDistribution distribution = AftDistribution::normal;
    double sigma = 1.0;  // positive scale

    AftLossSpec(AftDistribution d = AftDistribution::normal, double sigma_ = 1.0)
        : distribution(d), sigma(sigma_) {
        if (!(sigma > 0)) throw std::invalid_argument("AftLossSpec: sigma must be > 0");
    }
};

// Likelihood floor applied before the log; left-censored targets with far-off
// predictions otherwise produce -log 0.
inline constexpr double kAftLikelihoodFloor = 1e-15;
// Hessian floor; logistic/extreme Hessians vanish in the tails.
inline constexpr double kAftHessianFloor = 1e-6;

double aft_loss(double y_hat, const IntervalTarget& target, const AftLossSpec& spec);

// (dl/dyhat, d2l/dyhat2), analytic per distribution; Hessian clamped below at
// kAftHessianFloor.
std::pair<double, double> aft_grad_hess(double y_hat, const IntervalTarget& target,
                                        const AftLossSpec& spec);

}  // namespace intreg
