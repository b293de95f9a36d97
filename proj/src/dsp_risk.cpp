#include "dtsp/dsp_risk.hpp"

#include <algorithm>
#include <cmath>

#include "dtsp/detail/risk_kernel.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp {

namespace {

using detail::AtomRule;
using detail::RiskKernel;

double no_inspection_risk(const SamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss) {
    return plan.xi == 0.0 ? expected_acceptance_loss(prior, loss) : costs.rejection;
}

RiskReport finish(const SamplingPlan& plan, double base, double correction, double ratio) {
    RiskReport report;
    report.plan = plan;
    report.risk = base + correction;
    report.cancellation_ratio = ratio;
    report.precision_warning = ratio > kCancellationWarning;
    return report;
}

RiskReport type1_risk(const SamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                      const AcceptanceLoss& loss, Precision precision, bool shrink) {
    const double base = plan.n * costs.sampling + plan.tau * costs.time + expected_acceptance_loss(prior, loss);
    auto components = detail::type1_components(plan.n, plan.n, shrink);
    const AtomRule atom = shrink ? AtomRule::shrinkage : AtomRule::mle;
    if (precision == Precision::extended) {
        RiskKernel<detail::quad> kernel(plan.n, plan.tau, prior, loss, costs.rejection, std::move(components), atom);
        const auto v = kernel.evaluate(plan.xi, plan.c);
        return finish(plan, base, static_cast<double>(v.correction), v.cancellation_ratio);
    }
    const detail::GuardedKernel kernel(plan.n, plan.tau, prior, loss, costs.rejection, std::move(components), atom);
    const auto v = kernel.evaluate(plan.xi, plan.c);
    return finish(plan, base, v.correction, v.cancellation_ratio);
}

}  // namespace

std::vector<MixtureTerm> mixture_terms(const SamplingPlan& plan, const GammaPrior& prior) {
    plan.validate();
    std::vector<MixtureTerm> out;
    for (int m = 1; m <= plan.n; ++m) {
        for (int j = 0; j <= m; ++j) {
            MixtureTerm t;
            t.m = m;
            t.j = j;
            const double k = plan.n - m + j;
            t.shift = k * plan.tau / (m + plan.c);
            t.scale = prior.b() + k * plan.tau;
            if (plan.xi > t.shift) {
                if (std::isinf(plan.xi)) {
                    t.beta_argument = 1.0;
                } else {
                    const double cstar = (m + plan.c) * (plan.xi - t.shift) / t.scale;
                    t.beta_argument = cstar / (1.0 + cstar);
                }
            }
            out.push_back(t);
        }
    }
    return out;
}

RiskReport dsp_risk_type1(const SamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss, Precision precision) {
    plan.validate();
    costs.validate();
    if (plan.n == 0) return finish(plan, no_inspection_risk(plan, prior, costs, loss), 0.0, 1.0);
    return type1_risk(plan, prior, costs, loss, precision, true);
}

RiskReport lam_risk_type1(int n, double tau, double xi, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss, Precision precision) {
    costs.validate();
    if (n < 1 || !(tau > 0.0) || !std::isfinite(tau)) throw DomainError("lam_risk_type1: requires n >= 1 and tau > 0");
    if (!(xi >= 0.0)) throw DomainError("lam_risk_type1: xi must be nonnegative");
    const SamplingPlan plan{n, tau, xi, 0.0};
    return type1_risk(plan, prior, costs, loss, precision, false);
}

double acceptance_probability(const SamplingPlan& plan, double lambda) {
    plan.validate();
    if (plan.n < 1) throw DomainError("acceptance_probability: plan must inspect at least one item");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("acceptance_probability: lambda must be positive");
    if (plan.xi == 0.0) return 1.0;
    const int n = plan.n;
    if (plan.xi > n * plan.tau / plan.c) return 0.0;

    // The atom nτ/c sits at or above ξ here, so only M >= 1 outcomes reject.
    CompensatedSum<double> reject;
    for (int m = 1; m <= n; ++m) {
        const double rate = (m + plan.c) * lambda;
        for (int j = 0; j <= m; ++j) {
            const double k = n - m + j;
            const double shift = k * plan.tau / (m + plan.c);
            if (plan.xi <= shift) continue;
            const double g = gamma_cdf(plan.xi - shift, m, rate);
            const double w = std::exp(log_binomial(n, m) + log_binomial(m, j) - lambda * plan.tau * k);
            reject.add((j % 2 == 0 ? w : -w) * g);
        }
    }
    return std::clamp(1.0 - reject.value(), 0.0, 1.0);
}

struct Type1RiskEvaluator::Impl {
    double base;
    detail::GuardedKernel kernel;
};

Type1RiskEvaluator::Type1RiskEvaluator(int n, double tau, const GammaPrior& prior, const CostModel& costs,
                                       const AcceptanceLoss& loss, Estimator estimator) {
    if (n < 1 || !(tau > 0.0)) throw DomainError("Type1RiskEvaluator: requires n >= 1 and tau > 0");
    const bool shrink = estimator == Estimator::shrinkage;
    impl_ = std::make_unique<Impl>(Impl{
        n * costs.sampling + tau * costs.time + expected_acceptance_loss(prior, loss),
        detail::GuardedKernel(n, tau, prior, loss, costs.rejection, detail::type1_components(n, n, shrink),
                              shrink ? AtomRule::shrinkage : AtomRule::mle)});
}

Type1RiskEvaluator::~Type1RiskEvaluator() = default;
Type1RiskEvaluator::Type1RiskEvaluator(Type1RiskEvaluator&&) noexcept = default;
Type1RiskEvaluator& Type1RiskEvaluator::operator=(Type1RiskEvaluator&&) noexcept = default;

double Type1RiskEvaluator::operator()(double xi, double c) const {
    return impl_->base + impl_->kernel.evaluate(xi, c).correction;
}

std::pair<double, double> Type1RiskEvaluator::evaluate(double xi, double c) const {
    const auto v = impl_->kernel.evaluate(xi, c);
    return {impl_->base + v.correction, v.cancellation_ratio};
}

}  // namespace dtsp
