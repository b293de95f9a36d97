#include "dtsp/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dtsp {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 20000;

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;
}

// Lower regularized gamma P(a, x) by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Upper regularized gamma Q(a, x) by continued fraction; valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
    }
    return std::lgamma(x);
}

double log_beta(double alpha, double beta) {
    return log_gamma(alpha) + log_gamma(beta) - log_gamma(alpha + beta);
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) throw DomainError("log_binomial: k outside [0, n]");
    if (k == 0 || k == n) return 0.0;
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

double binomial(int n, int k) {
    return std::exp(log_binomial(n, k));
}

double reg_inc_beta(double x, double alpha, double beta) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x outside [0, 1]");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("reg_inc_beta: shape parameters must be positive");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        alpha * std::log(x) + beta * std::log1p(-x) - log_beta(alpha, beta);
    if (x < (alpha + 1.0) / (alpha + beta + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(x, alpha, beta) / alpha;
    }
    const double upper = std::exp(log_front) * beta_continued_fraction(1.0 - x, beta, alpha) / beta;
    return std::clamp(1.0 - upper, 0.0, 1.0);
}

double inc_beta(double x, double alpha, double beta) {
    return reg_inc_beta(x, alpha, beta) * std::exp(log_beta(alpha, beta));
}

double reg_inc_beta_int(double x, int m, double beta) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta_int: x outside [0, 1]");
    if (m < 1 || !(beta > 0.0)) throw DomainError("reg_inc_beta_int: shape parameters must be positive");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double term = 1.0;
    double poly = 1.0;
    for (int i = 1; i < m; ++i) {
        term *= (beta + i - 1.0) / i * x;
        poly += term;
    }
    return std::clamp(1.0 - std::exp(beta * std::log1p(-x)) * poly, 0.0, 1.0);
}

double gamma_cdf(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma_cdf: shape and rate must be positive");
    if (std::isnan(x)) throw DomainError("gamma_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double z = rate * x;
    if (z < shape + 1.0) return std::clamp(gamma_p_series(shape, z), 0.0, 1.0);
    return std::clamp(1.0 - gamma_q_continued_fraction(shape, z), 0.0, 1.0);
}

}  // namespace dtsp
