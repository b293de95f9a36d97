#pragma once

// Overload set that lets the risk kernels run in double or in quad precision.

#include <cmath>
#include <quadmath.h>

namespace dtsp::detail {

using quad = __float128;

inline double r_log(double x) { return std::log(x); }
inline double r_log1p(double x) { return std::log1p(x); }
inline double r_exp(double x) { return std::exp(x); }
inline double r_expm1(double x) { return std::expm1(x); }
inline double r_pow(double x, double y) { return std::pow(x, y); }
inline double r_abs(double x) { return std::fabs(x); }
inline double r_lgamma(double x) { return std::lgamma(x); }

inline quad r_log(quad x) { return logq(x); }
inline quad r_log1p(quad x) { return log1pq(x); }
inline quad r_exp(quad x) { return expq(x); }
inline quad r_expm1(quad x) { return expm1q(x); }
inline quad r_pow(quad x, quad y) { return powq(x, y); }
inline quad r_abs(quad x) { return fabsq(x); }
inline quad r_lgamma(quad x) { return lgammaq(x); }

}  // namespace dtsp::detail
