#pragma once

// Value types shared by the risk, optimizer, simulation and CLI layers.

#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dtsp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Conjugate Gamma(a, b) prior on the failure rate λ, density
/// b^a λ^(a-1) e^(-bλ) / Γ(a).
class GammaPrior {
public:
    GammaPrior(double a, double b);

    double a() const { return a_; }
    double b() const { return b_; }

    double density(double lambda) const;

    /// P(X <= t) for the prior-predictive lifetime: 1 - (b / (b + t))^a.
    double marginal_lifetime_cdf(double t) const;

    friend bool operator==(const GammaPrior&, const GammaPrior&) = default;

private:
    double a_;
    double b_;
};

struct CostModel {
    double sampling = 0.0;   ///< C_s, per inspected item
    double time = 0.0;       ///< C_τ, per unit of test time
    double rejection = 0.0;  ///< C_r
    double salvage = 0.0;    ///< r_s, per unfailed item at the end of a hybrid test

    /// Throws DomainError on negative entries.
    void validate() const;

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// Acceptance loss g(λ) = Σ a_l λ^{p_l}.
class AcceptanceLoss {
public:
    struct Term {
        double exponent;
        double coefficient;
        friend bool operator==(const Term&, const Term&) = default;
    };

    /// Exponents must start at 0 and increase strictly. g must be nonnegative
    /// on λ in [1e-6, 1e6] (1000 log-spaced points).
    explicit AcceptanceLoss(std::vector<Term> terms);

    /// Integer-degree polynomial a_0 + a_1 λ + ... + a_k λ^k.
    static AcceptanceLoss polynomial(std::span<const double> coefficients);
    static AcceptanceLoss polynomial(std::initializer_list<double> coefficients);

    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    double constant() const { return terms_.front().coefficient; }

    double operator()(double lambda) const;

    /// True when every exponent is an integer.
    bool is_polynomial() const;
    /// Largest exponent as an integer; requires is_polynomial().
    int degree() const;
    /// True when every coefficient beyond the constant is nonnegative.
    bool is_nondecreasing() const;

    friend bool operator==(const AcceptanceLoss&, const AcceptanceLoss&) = default;

private:
    std::vector<Term> terms_;
};

/// Type-I plan (n, τ, ξ, c). n = 0 is the no-inspection plan, with ξ = 0
/// meaning accept and ξ = +inf meaning reject.
struct SamplingPlan {
    int n = 0;
    double tau = 0.0;
    double xi = 0.0;
    double c = 0.0;

    void validate() const;
    bool inspects() const { return n > 0; }

    static SamplingPlan accept_without_inspection() { return {0, 0.0, 0.0, 0.0}; }
    static SamplingPlan reject_without_inspection() { return {0, 0.0, kInfinity, 0.0}; }

    friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

/// Hybrid Type-I plan: the test stops at min(X_(r), τ).
struct HybridSamplingPlan {
    SamplingPlan base;
    int r = 1;

    void validate() const;

    friend bool operator==(const HybridSamplingPlan&, const HybridSamplingPlan&) = default;
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    long long replications = 0;
};

struct RiskReport {
    SamplingPlan plan;
    std::optional<int> failure_threshold;  ///< r, present for hybrid plans
    double risk = 0.0;
    std::optional<MonteCarloEstimate> monte_carlo;
    double cancellation_ratio = 1.0;
    bool precision_warning = false;

    /// |exact - MC| / SE, when an MC estimate is attached.
    std::optional<double> mc_z_score() const;
    /// True when an MC estimate exists and differs by more than 4 SE.
    bool mc_flagged() const;
};

/// E(λ^p) = Γ(a + p) / (Γ(a) b^p).
double prior_moment(const GammaPrior& prior, double p);

/// Σ a_l E(λ^{p_l}): the risk of accepting without inspection.
double expected_acceptance_loss(const GammaPrior& prior, const AcceptanceLoss& loss);

/// Shrinkage estimate (Σ x_i + (n - M) τ) / (M + c).
double estimator_value(std::span<const double> failure_times, int n, double tau, double c);

/// Total time on test Σ x_i + (n - M) τ.
double total_time_on_test(std::span<const double> failure_times, int n, double tau);

}  // namespace dtsp
