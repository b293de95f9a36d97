#pragma once

// Shared evaluator for the prior-averaged rejection term of every closed-form
// risk in the library.
//
// The law of the estimate, conditional on at least one failure, is an
// alternating mixture of shifted gamma laws. After averaging over the gamma
// prior each component contributes
//
//     coef * C_l * b^a/Γ(a) * Γ(a+p_l) / K^{a+p_l} * I_S(shape, a+p_l)
//
// with K = b + kτ, shift kτ/rate, rate = shape (+ c when shrunk) and
// S = C*/(1+C*), C* = (rate*ξ - kτ)/K. The atom at nτ/c (no failures) adds
// C_l b^a/Γ(a) Γ(a+p_l)/(b+nτ)^{a+p_l} when it falls below ξ.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "dtsp/detail/real_math.hpp"
#include "dtsp/model.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp::detail {

/// |coefficient| = C(n1, k1) C(n2, k2) numerator / denominator, kept in
/// integers so the quad kernel can form it without double rounding.
struct MixtureComponent {
    int n1 = 0, k1 = 0;
    int n2 = 0, k2 = 0;
    int numerator = 1;
    int denominator = 1;
    int sign = 1;
    int k = 0;       ///< shift multiplier: shift = kτ / rate
    int shape = 1;   ///< gamma shape m
    bool shrink = true;  ///< rate uses m + c rather than m
};

enum class AtomRule {
    shrinkage,  ///< estimate nτ/c at M = 0; rejected when nτ/c < ξ
    mle,        ///< estimate nτ at M = 0; rejected when nτ < ξ
};

/// Components of the Type-I law: m = 1..n, j = 0..m, weight (-1)^j C(n,m) C(m,j).
inline std::vector<MixtureComponent> type1_components(int n, int max_m, bool shrink) {
    std::vector<MixtureComponent> out;
    for (int m = 1; m <= max_m; ++m) {
        for (int j = 0; j <= m; ++j) {
            out.push_back({n, m, m, j, 1, 1, (j % 2 == 0) ? 1 : -1, n - m + j, m, shrink});
        }
    }
    return out;
}

// C(n, k) by the multiplicative recurrence; every partial product is an
// integer, so the result is exact while it fits the mantissa.
template <class Real>
Real exact_binomial(int n, int k) {
    k = std::min(k, n - k);
    Real v = 1;
    for (int i = 1; i <= k; ++i) v = v * Real(n - k + i) / Real(i);
    return v;
}

template <class Real>
Real log_abs_coefficient(const MixtureComponent& c) {
    return r_log(exact_binomial<Real>(c.n1, c.k1) * exact_binomial<Real>(c.n2, c.k2) * Real(c.numerator) /
                 Real(c.denominator));
}

template <class Real>
class RiskKernel {
public:
    struct Value {
        Real correction;
        double cancellation_ratio;
    };

    RiskKernel(int n, double tau, const GammaPrior& prior, const AcceptanceLoss& loss,
               double rejection_cost, std::vector<MixtureComponent> components, AtomRule atom)
        : n_(n), tau_(tau), atom_rule_(atom), components_(std::move(components)) {
        const auto& terms = loss.terms();
        const std::size_t L = terms.size();
        const Real a = prior.a();
        const Real b = prior.b();
        const Real log_b = r_log(b);
        const Real lg_a = r_lgamma(a);

        betas_.resize(L);
        std::vector<Real> weight(L);  // C_l
        std::vector<Real> log_norm(L);
        for (std::size_t l = 0; l < L; ++l) {
            const Real p = terms[l].exponent;
            betas_[l] = a + p;
            weight[l] = (l == 0) ? Real(rejection_cost) - Real(terms[0].coefficient) : -Real(terms[l].coefficient);
            log_norm[l] = a * log_b - lg_a + r_lgamma(a + p);
        }

        const Real atom_scale = b + Real(n) * Real(tau);
        for (std::size_t l = 0; l < L; ++l) {
            atom_addends_.push_back(weight[l] * r_exp(log_norm[l] - betas_[l] * r_log(atom_scale)));
        }

        int max_shape = 0;
        factors_.resize(components_.size() * L);
        scales_.resize(components_.size());
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const auto& comp = components_[i];
            max_shape = std::max(max_shape, comp.shape);
            const Real scale = b + Real(comp.k) * Real(tau);
            scales_[i] = scale;
            const Real log_scale = r_log(scale);
            const Real log_coef = log_abs_coefficient<Real>(comp);
            for (std::size_t l = 0; l < L; ++l) {
                const Real mag = r_exp(log_coef + log_norm[l] - betas_[l] * log_scale);
                factors_[i * L + l] = Real(comp.sign) * weight[l] * mag;
            }
        }

        // (β)_i / i! for i < shape, per loss term.
        poly_.assign(L, std::vector<Real>(static_cast<std::size_t>(std::max(max_shape, 1))));
        for (std::size_t l = 0; l < L; ++l) {
            Real t = 1;
            poly_[l][0] = 1;
            for (int i = 1; i < max_shape; ++i) {
                t *= (betas_[l] + Real(i - 1)) / Real(i);
                poly_[l][static_cast<std::size_t>(i)] = t;
            }
        }
    }

    Value evaluate(double xi, double c) const {
        CompensatedSum<Real> sum;
        // 1 - tail carries an absolute error of order ε, so the rounding error
        // of each addend scales with |f| rather than with the addend itself.
        Real error_scale = 0;
        const std::size_t L = betas_.size();
        if (atom_rejected(xi, c)) {
            for (const Real& v : atom_addends_) sum.add(v);
        }
        const bool infinite = std::isinf(xi);
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const auto& comp = components_[i];
            const Real* f = &factors_[i * L];
            if (infinite) {
                for (std::size_t l = 0; l < L; ++l) sum.add(f[l]);
                continue;
            }
            const Real rate = Real(comp.shape) + (comp.shrink ? Real(c) : Real(0));
            const Real numer = rate * Real(xi) - Real(comp.k) * Real(tau_);
            if (!(numer > Real(0))) continue;
            const Real cstar = numer / scales_[i];
            const Real s = cstar / (Real(1) + cstar);
            const Real log_one_minus_s = -r_log1p(cstar);
            for (std::size_t l = 0; l < L; ++l) {
                const auto& coef = poly_[l];
                Real acc = coef[static_cast<std::size_t>(comp.shape - 1)];
                for (int q = comp.shape - 2; q >= 0; --q) acc = acc * s + coef[static_cast<std::size_t>(q)];
                const Real tail = r_exp(betas_[l] * log_one_minus_s) * acc;
                sum.add(f[l] * (Real(1) - tail));
                error_scale = std::max(error_scale, f[l] < Real(0) ? -f[l] : f[l]);
            }
        }
        double ratio = sum.cancellation_ratio();
        const Real v = sum.value() < Real(0) ? -sum.value() : sum.value();
        if (error_scale > Real(0)) {
            ratio = std::max(ratio, v == Real(0) ? kInfinity : static_cast<double>(error_scale / v));
        }
        return {sum.value(), ratio};
    }

    bool atom_rejected(double xi, double c) const {
        if (n_ == 0) return false;
        const double atom = atom_rule_ == AtomRule::mle ? n_ * tau_ : (c > 0.0 ? n_ * tau_ / c : kInfinity);
        return atom < xi;
    }

private:
    int n_;
    double tau_;
    AtomRule atom_rule_;
    std::vector<MixtureComponent> components_;
    std::vector<Real> betas_;
    std::vector<Real> atom_addends_;
    std::vector<Real> factors_;
    std::vector<Real> scales_;
    std::vector<std::vector<Real>> poly_;
};

/// Double kernel with a quad-precision fallback, built on first use, for
/// points where the rounding estimate of the double sum exceeds `tolerance`.
class GuardedKernel {
public:
    static constexpr double kTolerance = 1e-9;
    static constexpr double kQuadEpsilon = 1.925929944387236e-34;  // 2^-112

    GuardedKernel(int n, double tau, const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost,
                  std::vector<MixtureComponent> components, AtomRule atom)
        : n_(n), tau_(tau), prior_(prior), loss_(loss), rejection_cost_(rejection_cost), atom_(atom),
          components_(components), fast_(n, tau, prior, loss, rejection_cost, std::move(components), atom) {}

    struct Value {
        double correction;
        double cancellation_ratio;
        bool extended;
    };

    Value evaluate(double xi, double c) const {
        const auto v = fast_.evaluate(xi, c);
        const double error = 16.0 * std::numeric_limits<double>::epsilon() * v.cancellation_ratio *
                             std::abs(v.correction);
        if (!(error > kTolerance)) return {v.correction, v.cancellation_ratio, false};
        std::call_once(*once_, [&] {
            precise_ = std::make_unique<RiskKernel<quad>>(n_, tau_, prior_, loss_, rejection_cost_, components_, atom_);
        });
        const auto q = precise_->evaluate(xi, c);
        const double qc = static_cast<double>(q.correction);
        // Beyond binary128 as well: no trustworthy value.
        if (16.0 * kQuadEpsilon * q.cancellation_ratio * std::abs(qc) > kTolerance)
            return {std::numeric_limits<double>::quiet_NaN(), q.cancellation_ratio, true};
        return {qc, q.cancellation_ratio, true};
    }

private:
    int n_;
    double tau_;
    GammaPrior prior_;
    AcceptanceLoss loss_;
    double rejection_cost_;
    AtomRule atom_;
    std::vector<MixtureComponent> components_;
    RiskKernel<double> fast_;
    std::unique_ptr<std::once_flag> once_ = std::make_unique<std::once_flag>();
    mutable std::unique_ptr<RiskKernel<quad>> precise_;
};

}  // namespace dtsp::detail
