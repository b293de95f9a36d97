#pragma once

// Bounded grid search for the optimal DSP (Type-I and hybrid), the optimal
// Bayes plan and Lam's plan.

#include <optional>

#include "dtsp/hybrid_risk.hpp"
#include "dtsp/model.hpp"

namespace dtsp {

struct SearchConfig {
    double xi_max = 2.0;
    double c_max = 1.0;
    double xi_step = 0.0125;
    double c_step = 0.0025;
    double tau_step = 0.0125;
    std::optional<double> tau_max;  ///< replaces the τ_α rule when set
    double alpha = 0.01;
    int refine_factor = 10;  ///< coarse step = refine_factor × fine step, for c
    int xi_refine_factor = 4;  ///< same for ξ
    int tau_refine_factor = 4;  ///< same for τ
    int refine_candidates = 6;  ///< coarse cells refined per sample size
    bool exhaustive = false;
    int threads = 1;

    /// Throws DomainError on nonpositive steps, nonfinite limits or α outside (0, 1).
    void validate() const;

    friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

enum class Censoring { type1, hybrid };

struct TauRange {
    double lower = 0.0;
    double upper = 0.0;
};

/// τ_α = b(α^{-1/a} - 1), the 1 - α quantile of the prior-predictive lifetime.
double tau_alpha(const GammaPrior& prior, double alpha);

/// floor(min(C_r, Σ a_l μ_l, best) / per-item cost); the per-item cost is
/// C_s for Type-I and C_s - r_s for hybrid plans.
int bound_n(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss, double best_risk,
            Censoring censoring = Censoring::type1);

/// Search interval for τ. Type-I: upper = min(min(C_r, Σ a_l μ_l, best)/C_τ,
/// τ_α or τ_max). Hybrid: τ_α or τ_max. C_τ = 0 without τ_max is unbounded.
TauRange tau_range(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                   const SearchConfig& config, double best_risk, Censoring censoring = Censoring::type1);

/// E min(g(λ), C_r) under the prior: no decision rule does better, so every
/// plan's risk is at least its fixed costs plus this value. Returns 0 when g
/// is not monotone.
double acceptance_loss_floor(const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost);

/// E min(φ_π(K, s), C_r) with K | λ ~ Poisson(λ s): the Bayes decision loss
/// when every failed item is replaced, so that exposure is exactly s = nτ.
/// Type-I and hybrid records are functions of that process, so this bounds
/// the decision loss of any rule on them from below.
double replacement_decision_bound(const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost,
                                  double exposure);

struct OptimizationResult {
    RiskReport report;
    long long evaluations = 0;
    double wall_seconds = 0.0;
};

OptimizationResult optimize_dsp_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config);

OptimizationResult optimize_dsp_hybrid(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                       const SearchConfig& config,
                                       HybridFormula formula = HybridFormula::corrected);

/// Minimizes the closed-form Bayes-rule risk over n and the fine τ grid.
OptimizationResult optimize_lsp_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config);

/// Lam's plan over (n, τ, ξ) on the fine grid; τ_max defaults to 2.
OptimizationResult optimize_lam_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config);

}  // namespace dtsp
