#pragma once

// Seeded Monte Carlo engine: the reference against which every closed form is
// checked, and the proportion-of-acceptance experiments.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dtsp/lsp.hpp"
#include "dtsp/model.hpp"

namespace dtsp {

/// xoshiro256** seeded through splitmix64. Replication i of a run with seed s
/// uses RandomStream(s, i), so results do not depend on scheduling.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double standard_normal();
    double exponential(double rate);
    /// Gamma with the given shape and rate (Marsaglia–Tsang).
    double gamma(double shape, double rate);

private:
    std::array<std::uint64_t, 4> s_{};
};

enum class Rule { dsp, lsp, lam };

/// Plan coordinates shared by all three rules. LSP ignores ξ and c; Lam ignores c.
struct Design {
    SamplingPlan plan;
    std::optional<int> failure_threshold;  ///< r, set for hybrid censoring

    bool hybrid() const { return failure_threshold.has_value(); }
    void validate() const;
};

struct ExperimentRecord {
    double lambda = 0.0;
    bool hybrid = false;
    int failures = 0;           ///< M, or M* under hybrid censoring
    double total_time = 0.0;    ///< y: observed failure times plus survivors × duration
    double duration = 0.0;      ///< τ*, equal to τ under Type-I censoring
    double estimate = 0.0;      ///< shrinkage estimate y / (M + c)
    Decision dsp = Decision::accept;
    Decision lsp = Decision::accept;  ///< meaningful only when lsp_available
    bool lsp_available = false;
    Decision lam = Decision::accept;
    double loss_dsp = 0.0;
    double loss_lsp = 0.0;
    double loss_lam = 0.0;

    /// Throws UnsupportedError for the Bayes rule when it was not evaluated.
    Decision decision(Rule rule) const;
    double loss(Rule rule) const;
};

/// Everything except λ and the stream that an experiment needs.
struct ExperimentContext {
    Design design;
    GammaPrior prior;
    CostModel costs;
    AcceptanceLoss loss;
    std::optional<LspThresholds> thresholds;  ///< absent when g is not monotone

    ExperimentContext(Design design, const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss);
};

/// Draws n lifetimes at rate λ, censors them and applies all three rules.
ExperimentRecord simulate_experiment(RandomStream& stream, const ExperimentContext& context, double lambda);

struct SimulationOptions {
    long long replications = 1'000'000;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Mean realized loss with λ redrawn from the prior every replication.
MonteCarloEstimate mc_bayes_risk(Rule rule, const Design& design, const GammaPrior& prior, const CostModel& costs,
                                 const AcceptanceLoss& loss, const SimulationOptions& options);

/// Fraction of replications (λ from the prior) that accept.
MonteCarloEstimate proportion_of_acceptance(Rule rule, const Design& design, const GammaPrior& prior,
                                            const CostModel& costs, const AcceptanceLoss& loss,
                                            const SimulationOptions& options = {10'000, 1, 1});

/// Acceptance frequency of the DSP at a fixed λ.
MonteCarloEstimate mc_acceptance_frequency(const SamplingPlan& plan, double lambda, const SimulationOptions& options);

struct CensoringMoments {
    MonteCarloEstimate failures;  ///< E(M*)
    MonteCarloEstimate duration;  ///< E(τ*)
};

/// Prior-averaged failure count and duration of a hybrid test.
CensoringMoments mc_censoring_moments(int n, int r, double tau, const GammaPrior& prior,
                                      const SimulationOptions& options);

/// Shrinkage estimates from independent Type-I experiments at a fixed λ.
std::vector<double> sample_estimates(const SamplingPlan& plan, double lambda, const SimulationOptions& options);

}  // namespace dtsp
