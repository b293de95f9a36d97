#pragma once

// Exact Bayes risk under hybrid Type-I censoring: the test ends at
// τ* = min(X_(r), τ) with M* failures observed.

#include <memory>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/model.hpp"

namespace dtsp {

/// Which closed form to evaluate.
///
/// `corrected` is the form that agrees with simulation: the Type-I block of
/// the estimate's law runs over m = 1..r-1, the full-sample gamma term uses
/// rate (r + c)λ, and E(τ*) integrates P(X_(r) > t) over [0, τ].
/// `as_printed` keeps the published typesetting (m = 1..n, rate rλ, and the
/// τ P(M >= r) tail in E(τ*)) for side-by-side comparison only.
enum class HybridFormula { corrected, as_printed };

struct HybridRiskTerms {
    double expected_failures = 0.0;  ///< E(M*)
    double expected_duration = 0.0;  ///< E(τ*)
};

/// E(M*) = Σ_{m<r} m P(M = m) + r P(M >= r), prior-averaged.
double expected_failures(int n, int r, double tau, const GammaPrior& prior);

/// E(τ*) = E min(X_(r), τ), prior-averaged. Defined for every a > 0; the
/// as-printed variant divides by a - 1 and rejects a = 1.
double expected_duration(int n, int r, double tau, const GammaPrior& prior,
                         HybridFormula formula = HybridFormula::corrected);

HybridRiskTerms hybrid_risk_terms(int n, int r, double tau, const GammaPrior& prior,
                                  HybridFormula formula = HybridFormula::corrected);

/// R_{l,j,m} = Γ(a+p) / C_{j,m}^{a+p} · I_{S*_{j,m,c}}(m, a+p) for exponent p.
/// j may be negative (j = r - n gives shift 0 and C = b).
double hybrid_component_integral(const HybridSamplingPlan& plan, const GammaPrior& prior, double exponent,
                                 int j, int m);

RiskReport dsp_risk_hybrid(const HybridSamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                           const AcceptanceLoss& loss, HybridFormula formula = HybridFormula::corrected,
                           Precision precision = Precision::standard);

/// Repeated evaluation at fixed (n, r, τ) for the grid search.
class HybridRiskEvaluator {
public:
    HybridRiskEvaluator(int n, int r, double tau, const GammaPrior& prior, const CostModel& costs,
                        const AcceptanceLoss& loss, HybridFormula formula = HybridFormula::corrected);
    ~HybridRiskEvaluator();
    HybridRiskEvaluator(HybridRiskEvaluator&&) noexcept;
    HybridRiskEvaluator& operator=(HybridRiskEvaluator&&) noexcept;

    double operator()(double xi, double c) const;
    const HybridRiskTerms& terms() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dtsp
