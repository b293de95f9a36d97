#include "dtsp/hybrid_risk.hpp"

#include <cmath>
#include <limits>

#include "dtsp/detail/risk_kernel.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp {

namespace {

using detail::AtomRule;
using detail::MixtureComponent;
using detail::RiskKernel;

void check_design(int n, int r, double tau) {
    if (n < 1 || r < 1 || r > n) throw DomainError("hybrid censoring requires 1 <= r <= n");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("hybrid censoring requires finite tau > 0");
}

using detail::quad;
using detail::r_expm1;
using detail::r_log1p;

// E_λ[e^{-λ k τ}] = (b / (b + kτ))^a.
template <class Real>
Real laplace(const GammaPrior& prior, double k, double tau) {
    return detail::r_exp(-Real(prior.a()) * r_log1p(Real(k) * Real(tau) / Real(prior.b())));
}

// ∫_0^τ (b / (b + k t))^a dt, continuous through a = 1.
template <class Real>
Real survival_integral(const GammaPrior& prior, double k, double tau) {
    const Real a = prior.a();
    const Real b = prior.b();
    const Real log_ratio = r_log1p(Real(k) * Real(tau) / b);
    const Real d = a - Real(1);
    const Real dl = d * log_ratio;
    if ((dl < Real(0) ? -dl : dl) < Real(1e-8) * Real(1e-8)) return b / Real(k) * log_ratio * (Real(1) - dl / Real(2));
    return -b / Real(k) * r_expm1(-dl) / d;
}

// Σ over a triangle of alternating binomial terms. The double sum is kept
// when its rounding estimate is below kSumTolerance; otherwise the sum is
// redone in binary128 with exact binomial coefficients.
constexpr double kSumTolerance = 1e-11;

template <class Term>
double alternating_sum(int n, int m_first, int m_last, const Term& term) {
    auto run = [&](auto zero) {
        using Real = decltype(zero);
        CompensatedSum<Real> s;
        for (int m = m_first; m <= m_last; ++m) {
            const Real cm = detail::exact_binomial<Real>(n, m);
            for (int j = 0; j <= m; ++j) {
                const Real w = cm * detail::exact_binomial<Real>(m, j) * term.template operator()<Real>(m, j);
                s.add(j % 2 == 0 ? w : -w);
            }
        }
        return s;
    };
    const auto fast = run(0.0);
    const double error = 16.0 * std::numeric_limits<double>::epsilon() * fast.max_abs_addend() * (m_last + 1);
    if (!(error > kSumTolerance)) return fast.value();
    const auto precise = run(quad(0));
    if (16.0 * 1.925929944387236e-34 * static_cast<double>(precise.max_abs_addend()) * (m_last + 1) > kSumTolerance)
        return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(precise.value());
}

struct CountTerm {
    int n;
    double tau;
    const GammaPrior& prior;
    template <class Real>
    Real operator()(int m, int j) const {
        return laplace<Real>(prior, n - m + j, tau);
    }
};

struct DurationTerm {
    int n;
    double tau;
    const GammaPrior& prior;
    template <class Real>
    Real operator()(int m, int j) const {
        return survival_integral<Real>(prior, n - m + j, tau);
    }
};

// Prior-averaged P(M = m) for Type-I censoring at τ.
double failure_count_probability(int n, int m, double tau, const GammaPrior& prior) {
    return alternating_sum(n, m, m, CountTerm{n, tau, prior});
}

// r C(n,r) Σ_j C(r-1,j) (-1)^{r-1-j} E_λ[X_(r) 1{X_(r) <= τ}] terms, as printed.
double printed_partial_order_statistic_mean(int n, int r, double tau, const GammaPrior& prior) {
    const double a = prior.a();
    const double b = prior.b();
    if (a == 1.0) throw UnsupportedError("as-printed E(tau*) divides by a - 1; a = 1 is not covered");
    CompensatedSum<double> s;
    for (int j = 0; j <= r - 1; ++j) {
        const double k = n - j;
        const double big = k * tau + b;
        const double body = b / (k * k * (a - 1.0)) - tau * std::pow(b, a) / (k * std::pow(big, a)) -
                            std::pow(b, a) / (k * k * (a - 1.0) * std::pow(big, a - 1.0));
        const double w = std::exp(log_binomial(r - 1, j));
        s.add(((r - 1 - j) % 2 == 0 ? w : -w) * body);
    }
    return r * binomial(n, r) * s.value();
}

std::vector<MixtureComponent> hybrid_components(int n, int r, HybridFormula formula) {
    const bool printed = formula == HybridFormula::as_printed;
    auto out = detail::type1_components(n, printed ? n : r - 1, true);
    // Uncensored time on test at the r-th failure: Gamma(r) with no shift.
    out.push_back({0, 0, 0, 0, 1, 1, 1, 0, r, !printed});
    // Minus the part of that law where X_(r) > τ.
    for (int j = 1; j <= r; ++j) {
        out.push_back({n, r, r - 1, j - 1, r, n - r + j, (j % 2 == 0) ? 1 : -1, n - r + j, r, true});
    }
    return out;
}

double hybrid_base(int n, double tau, const HybridRiskTerms& terms, const GammaPrior& prior, const CostModel& costs,
                   const AcceptanceLoss& loss) {
    (void)tau;
    return n * (costs.sampling - costs.salvage) + terms.expected_failures * costs.salvage +
           terms.expected_duration * costs.time + expected_acceptance_loss(prior, loss);
}

}  // namespace

double expected_failures(int n, int r, double tau, const GammaPrior& prior) {
    check_design(n, r, tau);
    CompensatedSum<double> s;
    for (int m = 1; m <= r - 1; ++m) s.add(m * failure_count_probability(n, m, tau, prior));
    for (int k = r; k <= n; ++k) s.add(r * failure_count_probability(n, k, tau, prior));
    return s.value();
}

double expected_duration(int n, int r, double tau, const GammaPrior& prior, HybridFormula formula) {
    check_design(n, r, tau);
    if (formula == HybridFormula::as_printed) {
        double tail = 0.0;
        for (int k = r; k <= n; ++k) tail += failure_count_probability(n, k, tau, prior);
        return printed_partial_order_statistic_mean(n, r, tau, prior) + tau * tail;
    }
    // E min(X_(r), τ) = ∫_0^τ P(M(t) < r) dt.
    return alternating_sum(n, 0, r - 1, DurationTerm{n, tau, prior});
}

HybridRiskTerms hybrid_risk_terms(int n, int r, double tau, const GammaPrior& prior, HybridFormula formula) {
    return {expected_failures(n, r, tau, prior), expected_duration(n, r, tau, prior, formula)};
}

double hybrid_component_integral(const HybridSamplingPlan& plan, const GammaPrior& prior, double exponent, int j,
                                 int m) {
    plan.validate();
    const auto& p = plan.base;
    const double k = p.n - m + j;
    if (m < 1 || k < 0) throw DomainError("hybrid_component_integral: invalid (j, m)");
    const double beta = prior.a() + exponent;
    const double scale = prior.b() + k * p.tau;
    const double shift = k * p.tau / (m + p.c);
    double s = 0.0;
    if (std::isinf(p.xi)) {
        s = 1.0;
    } else if (p.xi > shift) {
        const double cstar = (m + p.c) * (p.xi - shift) / scale;
        s = cstar / (1.0 + cstar);
    }
    return std::exp(log_gamma(beta) - beta * std::log(scale)) * reg_inc_beta(s, m, beta);
}

RiskReport dsp_risk_hybrid(const HybridSamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                           const AcceptanceLoss& loss, HybridFormula formula, Precision precision) {
    plan.validate();
    costs.validate();
    const auto& p = plan.base;
    const auto terms = hybrid_risk_terms(p.n, plan.r, p.tau, prior, formula);
    const double base = hybrid_base(p.n, p.tau, terms, prior, costs, loss);
    auto components = hybrid_components(p.n, plan.r, formula);

    double correction = 0.0;
    double ratio = 1.0;
    if (precision == Precision::extended) {
        RiskKernel<detail::quad> kernel(p.n, p.tau, prior, loss, costs.rejection, std::move(components),
                                        AtomRule::shrinkage);
        const auto v = kernel.evaluate(p.xi, p.c);
        correction = static_cast<double>(v.correction);
        ratio = v.cancellation_ratio;
    } else {
        const detail::GuardedKernel kernel(p.n, p.tau, prior, loss, costs.rejection, std::move(components),
                                           AtomRule::shrinkage);
        const auto v = kernel.evaluate(p.xi, p.c);
        correction = v.correction;
        ratio = v.cancellation_ratio;
    }
    RiskReport report;
    report.plan = p;
    report.failure_threshold = plan.r;
    report.risk = base + correction;
    report.cancellation_ratio = ratio;
    report.precision_warning = ratio > kCancellationWarning;
    return report;
}

struct HybridRiskEvaluator::Impl {
    HybridRiskTerms terms;
    double base;
    detail::GuardedKernel kernel;
};

HybridRiskEvaluator::HybridRiskEvaluator(int n, int r, double tau, const GammaPrior& prior, const CostModel& costs,
                                         const AcceptanceLoss& loss, HybridFormula formula) {
    const auto terms = hybrid_risk_terms(n, r, tau, prior, formula);
    impl_ = std::make_unique<Impl>(Impl{
        terms, hybrid_base(n, tau, terms, prior, costs, loss),
        detail::GuardedKernel(n, tau, prior, loss, costs.rejection, hybrid_components(n, r, formula),
                              AtomRule::shrinkage)});
}

HybridRiskEvaluator::~HybridRiskEvaluator() = default;
HybridRiskEvaluator::HybridRiskEvaluator(HybridRiskEvaluator&&) noexcept = default;
HybridRiskEvaluator& HybridRiskEvaluator::operator=(HybridRiskEvaluator&&) noexcept = default;

double HybridRiskEvaluator::operator()(double xi, double c) const {
    return impl_->base + impl_->kernel.evaluate(xi, c).correction;
}

const HybridRiskTerms& HybridRiskEvaluator::terms() const { return impl_->terms; }

}  // namespace dtsp
