#pragma once

// Exact Bayes risk of the shrinkage-estimate plan under Type-I censoring, the
// MLE (Lam) variant, and the per-λ acceptance probability.

#include <memory>
#include <vector>

#include "dtsp/model.hpp"

namespace dtsp {

/// Working precision of the alternating sums. `standard` uses doubles and
/// switches to binary128 when the rounding estimate exceeds 1e-9; `extended`
/// always uses binary128.
enum class Precision { standard, extended };

/// One shifted-gamma component of the estimate's law given M = m >= 1.
struct MixtureTerm {
    int m = 0;
    int j = 0;
    double shift = 0.0;          ///< τ_{j;m,c} = (n - m + j) τ / (m + c)
    double scale = 0.0;          ///< C_{j,m} = b + (n - m + j) τ
    double beta_argument = 0.0;  ///< S*_{j,m,c}, 0 when ξ <= shift
};

std::vector<MixtureTerm> mixture_terms(const SamplingPlan& plan, const GammaPrior& prior);

RiskReport dsp_risk_type1(const SamplingPlan& plan, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss, Precision precision = Precision::standard);

/// Risk of the plan that thresholds the MLE (nτ when no failure is seen).
RiskReport lam_risk_type1(int n, double tau, double xi, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss, Precision precision = Precision::standard);

/// P(estimate >= ξ | λ) for an inspecting plan.
double acceptance_probability(const SamplingPlan& plan, double lambda);

/// Repeated evaluation at fixed (n, τ) over many (ξ, c), as used by the grid
/// search. Returns the full risk including sampling and time costs.
class Type1RiskEvaluator {
public:
    enum class Estimator { shrinkage, mle };

    Type1RiskEvaluator(int n, double tau, const GammaPrior& prior, const CostModel& costs,
                       const AcceptanceLoss& loss, Estimator estimator = Estimator::shrinkage);
    ~Type1RiskEvaluator();
    Type1RiskEvaluator(Type1RiskEvaluator&&) noexcept;
    Type1RiskEvaluator& operator=(Type1RiskEvaluator&&) noexcept;

    double operator()(double xi, double c) const;
    /// Risk plus the cancellation ratio of the alternating sum.
    std::pair<double, double> evaluate(double xi, double c) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dtsp
