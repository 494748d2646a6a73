#include "intreg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace intreg {

namespace {

inline double powp(double v, int p) { return p == 1 ? v : v * v; }

struct DistEval {
    double pdf;        // f_Z(z)
    double dlogf;      // d/dz log f_Z(z)
    double d2logf;     // d2/dz2 log f_Z(z)
    double dpdf;       // f_Z'(z)
};

DistEval eval_dist(AftDistribution d, double z) {
    DistEval e{};
    switch (d) {
        case AftDistribution::normal: {
            e.pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
            e.dlogf = -z;
            e.d2logf = -1.0;
            e.dpdf = -z * e.pdf;
            if (!std::isfinite(e.dpdf)) e.dpdf = 0.0;  // z = +-inf, pdf = 0
            break;
        }
        case AftDistribution::logistic: {
            double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            e.pdf = s * (1.0 - s);
            e.dlogf = 1.0 - 2.0 * s;
            e.d2logf = -2.0 * s * (1.0 - s);
            e.dpdf = e.pdf * (1.0 - 2.0 * s);
            break;
        }
        case AftDistribution::extreme: {
            double w = std::exp(z);
            e.pdf = std::exp(z - w);  // z - w -> -inf in both tails
            e.dlogf = 1.0 - w;
            e.d2logf = -w;
            e.dpdf = std::isfinite(w) ? e.pdf * (1.0 - w) : 0.0;
            if (!std::isfinite(e.dpdf)) e.dpdf = 0.0;
            break;
        }
    }
    return e;
}

// lower-tail-accurate F_Z(z)
inline double cdf_at(AftDistribution d, double z) {
    if (z == -std::numeric_limits<double>::infinity()) return 0.0;
    if (z == std::numeric_limits<double>::infinity()) return 1.0;
    switch (d) {
        case AftDistribution::normal: return 0.5 * std::erfc(-z / std::numbers::sqrt2);
        case AftDistribution::logistic:
            return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        case AftDistribution::extreme: return -std::expm1(-std::exp(z));
    }
    return 0.0;
}

// upper-tail-accurate survival 1 - F_Z(z)
inline double surv_at(AftDistribution d, double z) {
    if (z == -std::numeric_limits<double>::infinity()) return 1.0;
    if (z == std::numeric_limits<double>::infinity()) return 0.0;
    switch (d) {
        case AftDistribution::normal: return 0.5 * std::erfc(z / std::numbers::sqrt2);
        case AftDistribution::logistic:
            return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
        case AftDistribution::extreme: return std::exp(-std::exp(z));
    }
    return 0.0;
}

// F_Z(z_u) - F_Z(z_l), differenced from the nearer tail to avoid cancellation
inline double interval_prob(AftDistribution d, double zl, double zu) {
    if (zl >= 0) return surv_at(d, zl) - surv_at(d, zu);
    return cdf_at(d, zu) - cdf_at(d, zl);
}

inline double pdf_at(AftDistribution d, double z) {
    if (std::isinf(z)) return 0.0;
    return eval_dist(d, z).pdf;
}

inline double dpdf_at(AftDistribution d, double z) {
    if (std::isinf(z)) return 0.0;
    return eval_dist(d, z).dpdf;
}

void check_aft_target(const IntervalTarget& t) {
    if (t.finite_upper() && t.upper() <= 0)
        throw std::invalid_argument("aft loss: finite nonpositive upper bound");
    if (t.finite_lower() && t.lower() < 0)
        throw std::invalid_argument("aft loss: finite negative lower bound");
}

// log of a bound, with 0 and -inf both mapping to -inf (left-censored)
inline double log_bound(double b) {
    if (b <= 0) return -std::numeric_limits<double>::infinity();
    if (std::isinf(b)) return std::numeric_limits<double>::infinity();
    return std::log(b);
}

}  // namespace

double hinge_loss(double y_hat, const IntervalTarget& target, const HingeLossSpec& spec) {
    double loss = 0.0;
    if (target.finite_lower()) {
        double v = target.lower() - y_hat + spec.epsilon;
        if (v > 0) loss += powp(v, spec.p);
    }
    if (target.finite_upper()) {
        double v = y_hat - target.upper() + spec.epsilon;
        if (v > 0) loss += powp(v, spec.p);
    }
    return loss;
}

double hinge_subgrad(double y_hat, const IntervalTarget& target, const HingeLossSpec& spec) {
    double g = 0.0;
    if (target.finite_lower()) {
        double v = target.lower() - y_hat + spec.epsilon;
        if (v > 0) g -= spec.p == 1 ? 1.0 : 2.0 * v;
    }
    if (target.finite_upper()) {
        double v = y_hat - target.upper() + spec.epsilon;
        if (v > 0) g += spec.p == 1 ? 1.0 : 2.0 * v;
    }
    return g;
}

double mean_squared_hinge_error(std::span<const double> predictions,
                                std::span<const IntervalTarget> targets) {
    if (predictions.empty()) throw std::invalid_argument("mean_squared_hinge_error: empty input");
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mean_squared_hinge_error: length mismatch");
    const HingeLossSpec spec{2, 0.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        sum += hinge_loss(predictions[i], targets[i], spec);
    return sum / static_cast<double>(predictions.size());
}

double aft_loss(double y_hat, const IntervalTarget& target, const AftLossSpec& spec) {
    check_aft_target(target);
    const double s = spec.sigma;
    if (target.finite_lower() && target.lower() == target.upper() && target.lower() > 0) {
        // uncensored: -log( f_Z((log y_u - yhat)/sigma) / (sigma * y_u) )
        double z = (std::log(target.upper()) - y_hat) / s;
        double lik = pdf_at(spec.distribution, z) / (s * target.upper());
        return -std::log(std::max(lik, kAftLikelihoodFloor));
    }
    double zu = (log_bound(target.upper()) - y_hat) / s;
    double zl = (log_bound(target.lower()) - y_hat) / s;
    if (std::isnan(zu)) zu = std::numeric_limits<double>::infinity();   // upper = +inf
    if (std::isnan(zl)) zl = -std::numeric_limits<double>::infinity();  // lower = 0 or -inf
    double lik = interval_prob(spec.distribution, zl, zu);
    return -std::log(std::max(lik, kAftLikelihoodFloor));
}

std::pair<double, double> aft_grad_hess(double y_hat, const IntervalTarget& target,
                                        const AftLossSpec& spec) {
    check_aft_target(target);
    const double s = spec.sigma;
    double grad, hess;
    if (target.finite_lower() && target.lower() == target.upper() && target.lower() > 0) {
        double z = (std::log(target.upper()) - y_hat) / s;
        DistEval e = eval_dist(spec.distribution, z);
        // l = -log f(z) + const, dz/dyhat = -1/sigma
        grad = e.dlogf / s;
        hess = -e.d2logf / (s * s);
    } else {
        double zu = (log_bound(target.upper()) - y_hat) / s;
        double zl = (log_bound(target.lower()) - y_hat) / s;
        if (std::isnan(zu)) zu = std::numeric_limits<double>::infinity();
        if (std::isnan(zl)) zl = -std::numeric_limits<double>::infinity();
        double denom = std::max(interval_prob(spec.distribution, zl, zu), kAftLikelihoodFloor);
        double num = pdf_at(spec.distribution, zu) - pdf_at(spec.distribution, zl);
        double dnum = dpdf_at(spec.distribution, zu) - dpdf_at(spec.distribution, zl);
        grad = num / (s * denom);
        hess = (num * num - dnum * denom) / (s * s * denom * denom);
    }
    if (!std::isfinite(grad)) grad = 0.0;
    hess = std::max(hess, kAftHessianFloor);
    return {grad, hess};
}

}  // namespace intreg
