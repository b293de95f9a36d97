#pragma once

// The Bayes sampling plan: accept when the posterior expected acceptance loss
// does not exceed the rejection cost.

#include <vector>

#include "dtsp/model.hpp"

namespace dtsp {

/// φ_π(m, y) = Σ a_l Γ(m+a+p_l) / (Γ(m+a) (y+b)^{p_l}).
double posterior_expected_loss(int m, double y, const GammaPrior& prior, const AcceptanceLoss& loss);

/// Threshold D(m) on y + b for one failure count.
struct LspThreshold {
    enum class Kind { finite, always_accept, always_reject };
    Kind kind = Kind::finite;
    double value = 0.0;  ///< D(m) when finite

    static LspThreshold accept() { return {Kind::always_accept, 0.0}; }
    static LspThreshold reject() { return {Kind::always_reject, kInfinity}; }
};

/// Solves φ_π(m, x - b) = C_r for x. Requires every coefficient past the
/// constant to be nonnegative, so that φ_π is decreasing in y.
LspThreshold lsp_threshold(int m, const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost);

/// D(m) for m = 0..n.
class LspThresholds {
public:
    LspThresholds(int n, const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost);

    int n() const { return static_cast<int>(table_.size()) - 1; }
    const LspThreshold& operator[](int m) const { return table_.at(static_cast<std::size_t>(m)); }
    double prior_b() const { return b_; }

private:
    std::vector<LspThreshold> table_;
    double b_;
};

enum class Decision { accept, reject };

/// Accept iff y >= D(m) - b.
Decision lsp_decision(int m, double y, const LspThresholds& thresholds);

/// Closed-form risk of the Bayes rule at fixed (n, τ). The loss must have
/// integer exponents.
RiskReport lsp_risk_type1(int n, double tau, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss);

/// Same, reusing thresholds built for at least n failures with the same
/// prior, loss and rejection cost.
RiskReport lsp_risk_type1(int n, double tau, const LspThresholds& thresholds, const GammaPrior& prior,
                          const CostModel& costs, const AcceptanceLoss& loss);

}  // namespace dtsp
