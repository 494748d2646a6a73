#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace intreg {

enum class Censoring { uncensored, right_censored, left_censored, interval_censored };

inline const char* to_string(Censoring c) {
    switch (c) {
        case Censoring::uncensored: return "uncensored";
        case Censoring::right_censored: return "right_censored";
        case Censoring::left_censored: return "left_censored";
        case Censoring::interval_censored: return "interval_censored";
    }
    return "?";
}

// Target interval (y_l, y_u), y_l <= y_u, either bound possibly infinite.
// The censoring kind is derived from the bounds, never stored.
class IntervalTarget {
public:
    IntervalTarget(double lower, double upper) : lower_(lower), upper_(upper) {
        if (std::isnan(lower) || std::isnan(upper))
            throw std::invalid_argument("IntervalTarget: NaN bound");
        if (lower > upper)
            throw std::invalid_argument("IntervalTarget: lower > upper");
        if (lower == upper && std::isinf(lower))
            throw std::invalid_argument("IntervalTarget: both bounds infinite and equal");
    }

    double lower() const { return lower_; }
    double upper() const { return upper_; }

    bool finite_lower() const { return std::isfinite(lower_); }
    bool finite_upper() const { return std::isfinite(upper_); }

    Censoring kind() const {
        if (finite_lower() && finite_upper())
            return lower_ == upper_ ? Censoring::uncensored : Censoring::interval_censored;
        if (finite_lower()) return Censoring::right_censored;
        if (finite_upper()) return Censoring::left_censored;
        // (-inf, +inf): degenerate doubly-open interval, no bound can be violated
        return Censoring::interval_censored;
    }

    bool operator==(const IntervalTarget&) const = default;

    static double inf() { return std::numeric_limits<double>::infinity(); }

private:
    double lower_;
    double upper_;
};

}  // namespace intreg
