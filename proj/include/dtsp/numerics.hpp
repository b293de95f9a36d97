#pragma once

// Special functions and hardened summation used by every risk formula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "dtsp/errors.hpp"

namespace dtsp {

/// Cancellation ratio above which a computed risk carries a precision warning.
inline constexpr double kCancellationWarning = 1e8;

/// Neumaier-compensated running sum that also remembers the largest addend,
/// so callers can report how much cancellation the result went through.
template <class Real = double>
class CompensatedSum {
public:
    void add(Real x) {
        const Real t = sum_ + x;
        if (abs_(sum_) >= abs_(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        max_abs_ = std::max(max_abs_, abs_(x));
        ++count_;
    }

    CompensatedSum& operator+=(Real x) {
        add(x);
        return *this;
    }

    Real value() const { return sum_ + comp_; }
    Real max_abs_addend() const { return max_abs_; }
    std::size_t count() const { return count_; }

    /// max |addend| / |result|; 1 for an empty or all-zero sum, +inf when the
    /// addends cancel to exactly zero.
    double cancellation_ratio() const {
        const Real v = abs_(value());
        if (max_abs_ == Real(0)) return 1.0;
        if (v == Real(0)) return std::numeric_limits<double>::infinity();
        return static_cast<double>(max_abs_ / v);
    }

private:
    static Real abs_(Real x) { return x < Real(0) ? -x : x; }

    Real sum_{0};
    Real comp_{0};
    Real max_abs_{0};
    std::size_t count_{0};
};

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// ln B(α, β).
double log_beta(double alpha, double beta);

/// ln C(n, k) for 0 <= k <= n.
double log_binomial(int n, int k);

/// C(n, k) exponentiated from log_binomial.
double binomial(int n, int k);

/// Regularized incomplete beta I_x(α, β) via Lentz's continued fraction,
/// switching to 1 - I_{1-x}(β, α) when x > (α + 1) / (α + β + 2).
double reg_inc_beta(double x, double alpha, double beta);

/// Non-regularized incomplete beta B_x(α, β).
double inc_beta(double x, double alpha, double beta);

/// Regularized incomplete beta with an integer first argument, by the finite
/// expansion I_x(m, β) = 1 - (1-x)^β Σ_{i<m} (β)_i x^i / i!.
double reg_inc_beta_int(double x, int m, double beta);

/// P(G <= x) for G ~ Gamma(shape, rate); 0 for x <= 0.
double gamma_cdf(double x, double shape, double rate);

/// Outcome of a bracketed search on a decreasing function.
struct RootResult {
    enum class Status {
        found,
        above_target,  ///< f(hi) > target: f never comes down to the target
        below_target,  ///< f(lo) < target: f is already below the target
    };
    Status status;
    double x;  ///< root when found, otherwise the offending bracket end
};

/// Bisection for f(x) = target with f decreasing on [lo, hi]. Stops once the
/// bracket is narrower than tol.
template <class F>
RootResult find_monotone_root(F&& f, double target, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw DomainError("find_monotone_root: tol must be positive");
    if (!(lo <= hi)) throw DomainError("find_monotone_root: lo > hi");
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo < target) return {RootResult::Status::below_target, lo};
    if (fhi > target) return {RootResult::Status::above_target, hi};
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {RootResult::Status::found, lo + 0.5 * (hi - lo)};
}

}  // namespace dtsp
