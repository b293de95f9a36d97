#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/simulate.hpp"

using namespace dtsp;

namespace {

const GammaPrior kPrior(2.5, 0.8);
const CostModel kCosts{0.5, 0.5, 30.0, 0.0};
const AcceptanceLoss kQuadratic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0});
const AcceptanceLoss kCubic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0, 2.0});

}  // namespace

TEST(DspRiskType1, PublishedPlans) {
    EXPECT_NEAR(dsp_risk_type1({3, 0.7250, 0.3000, 0.3550}, kPrior, kCosts, kQuadratic).risk, 25.2777, 5e-4);
    EXPECT_NEAR(dsp_risk_type1({2, 0.8875, 0.3500, 1.4875}, GammaPrior(0.1, 0.2), kCosts, kCubic).risk, 7.4606,
                5e-4);
    const AcceptanceLoss np({{0.0, 2.0}, {1.0, 2.0}, {2.5, 2.0}});
    EXPECT_NEAR(dsp_risk_type1({2, 0.6125, 0.2250, 1.6750}, GammaPrior(0.1, 0.2), kCosts, np).risk, 6.6966, 5e-4);
}

TEST(DspRiskType1, NoInspectionPlans) {
    for (const auto& prior : {GammaPrior(2.5, 0.8), GammaPrior(0.3, 2.0)}) {
        EXPECT_DOUBLE_EQ(dsp_risk_type1(SamplingPlan::accept_without_inspection(), prior, kCosts, kQuadratic).risk,
                         expected_acceptance_loss(prior, kQuadratic));
        EXPECT_DOUBLE_EQ(dsp_risk_type1(SamplingPlan::reject_without_inspection(), prior, kCosts, kQuadratic).risk,
                         30.0);
    }
}

TEST(DspRiskType1, RejectsInvalidPlan) {
    EXPECT_THROW(dsp_risk_type1({2, 0.5, 0.3, 0.0}, kPrior, kCosts, kQuadratic), DomainError);
    EXPECT_THROW(dsp_risk_type1({-1, 0.0, 0.0, 0.0}, kPrior, kCosts, kQuadratic), DomainError);
}

TEST(DspRiskType1, ThresholdLimits) {
    const SamplingPlan lo{4, 0.6, 1e-12, 0.3};
    const double fixed = 4 * 0.5 + 0.6 * 0.5;
    EXPECT_NEAR(dsp_risk_type1(lo, kPrior, kCosts, kQuadratic).risk,
                fixed + expected_acceptance_loss(kPrior, kQuadratic), 1e-9);
    const SamplingPlan hi{4, 0.6, 1e6, 0.3};
    EXPECT_NEAR(dsp_risk_type1(hi, kPrior, kCosts, kQuadratic).risk, fixed + 30.0, 1e-9);
}

TEST(DspRiskType1, ContinuousInXiAwayFromTheAtom) {
    const int n = 3;
    const double tau = 0.5, c = 0.8, atom = n * tau / c;
    for (double xi = 0.02; xi < 2.5; xi += 0.01) {
        if (std::abs(xi - atom) < 1e-6) continue;
        const double v = dsp_risk_type1({n, tau, xi, c}, kPrior, kCosts, kQuadratic).risk;
        const double w = dsp_risk_type1({n, tau, xi + 1e-7, c}, kPrior, kCosts, kQuadratic).risk;
        EXPECT_LT(std::abs(v - w), 1e-4) << "xi=" << xi;
    }
    const double below = dsp_risk_type1({n, tau, atom - 1e-9, c}, kPrior, kCosts, kQuadratic).risk;
    const double above = dsp_risk_type1({n, tau, atom + 1e-9, c}, kPrior, kCosts, kQuadratic).risk;
    EXPECT_GT(std::abs(above - below), 1e-3);  // the M = 0 mass switches to rejection
}

TEST(DspRiskType1, ExponentListMatchesPolynomialForm) {
    const AcceptanceLoss listed({{0.0, 2.0}, {1.0, 2.0}, {2.0, 2.0}});
    const SamplingPlan plan{5, 0.45, 0.27, 0.9};
    EXPECT_NEAR(dsp_risk_type1(plan, kPrior, kCosts, listed).risk,
                dsp_risk_type1(plan, kPrior, kCosts, kQuadratic).risk, 1e-12);
}

TEST(DspRiskType1, EvaluatorMatchesDirectEvaluation) {
    const Type1RiskEvaluator eval(4, 0.6, kPrior, kCosts, kQuadratic);
    for (double xi : {0.05, 0.3, 0.77, 2.0}) {
        for (double c : {0.01, 0.4, 1.9}) {
            EXPECT_NEAR(eval(xi, c), dsp_risk_type1({4, 0.6, xi, c}, kPrior, kCosts, kQuadratic).risk, 1e-11);
        }
    }
}

TEST(DspRiskType1, MonteCarloOracle) {
    const SamplingPlan plan{3, 0.5, 0.25, 0.5};
    const double exact = dsp_risk_type1(plan, kPrior, kCosts, kQuadratic).risk;
    const auto mc = mc_bayes_risk(Rule::dsp, Design{plan, std::nullopt}, kPrior, kCosts, kQuadratic,
                                  {1'000'000, 2024, 1});
    EXPECT_LE(std::abs(exact - mc.mean), 3.0 * mc.standard_error) << exact << " vs " << mc.mean;
}

TEST(DspRiskType1, RandomPlansAgreeWithMonteCarlo) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> un(1, 6);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    std::uniform_real_distribution<double> ux(0.02, 0.6);
    for (int i = 0; i < 4; ++i) {
        const int n = un(rng);
        const double tau = u(rng);
        const SamplingPlan plan{n, tau, ux(rng), u(rng)};
        const double exact = dsp_risk_type1(plan, kPrior, kCosts, kQuadratic).risk;
        const auto mc = mc_bayes_risk(Rule::dsp, Design{plan, std::nullopt}, kPrior, kCosts, kQuadratic,
                                      {1'000'000, 100u + i, 1});
        EXPECT_LE(std::abs(exact - mc.mean), 4.0 * mc.standard_error)
            << "plan " << plan.n << " " << plan.tau << " " << plan.xi << " " << plan.c;
    }
}

TEST(MixtureTerms, ShiftAndScale) {
    const SamplingPlan plan{4, 0.6, 0.5, 0.3};
    const auto terms = mixture_terms(plan, kPrior);
    ASSERT_FALSE(terms.empty());
    for (const auto& t : terms) {
        const double k = plan.n - t.m + t.j;
        EXPECT_NEAR(t.shift, k * plan.tau / (t.m + plan.c), 1e-15);
        EXPECT_NEAR(t.scale, kPrior.b() + k * plan.tau, 1e-15);
        EXPECT_NEAR(t.scale, kPrior.b() + (t.m + plan.c) * t.shift, 1e-14);
        if (plan.xi <= t.shift) {
            EXPECT_EQ(t.beta_argument, 0.0);
        } else {
            const double cs = (t.m + plan.c) * (plan.xi - t.shift) / t.scale;
            EXPECT_NEAR(t.beta_argument, cs / (1 + cs), 1e-15);
        }
    }
}

TEST(LamRisk, PublishedPlans) {
    const CostModel costs{0.5, 0.0, 30.0, 0.0};
    EXPECT_NEAR(lam_risk_type1(4, 0.0270, 0.1080, GammaPrior(0.2, 0.2), costs, kQuadratic).risk, 12.1499, 1e-3);
    EXPECT_NEAR(lam_risk_type1(1, 0.7978, 0.7978, GammaPrior(2.5, 0.4), costs, kQuadratic).risk, 29.7506, 5e-4);
}

TEST(LamRisk, AcceptAlways) {
    EXPECT_NEAR(lam_risk_type1(3, 0.4, 0.0, kPrior, kCosts, kQuadratic).risk,
                3 * 0.5 + 0.4 * 0.5 + expected_acceptance_loss(kPrior, kQuadratic), 1e-10);
}

TEST(LamRisk, MonteCarloOracle) {
    const CostModel costs{0.5, 0.0, 30.0, 0.0};
    const SamplingPlan plan{3, 0.7, 0.35, 1.0};
    const double exact = lam_risk_type1(plan.n, plan.tau, plan.xi, kPrior, costs, kQuadratic).risk;
    const auto mc = mc_bayes_risk(Rule::lam, Design{plan, std::nullopt}, kPrior, costs, kQuadratic,
                                  {1'000'000, 77, 1});
    EXPECT_LE(std::abs(exact - mc.mean), 4.0 * mc.standard_error);
}

TEST(AcceptanceProbability, Boundaries) {
    EXPECT_DOUBLE_EQ(acceptance_probability({3, 0.7, 0.0, 0.4}, 2.0), 1.0);
    EXPECT_NEAR(acceptance_probability({3, 0.7, 3 * 0.7 / 0.4 + 1e-6, 0.4}, 2.0), 0.0, 1e-15);
    EXPECT_THROW(acceptance_probability({3, 0.7, 0.2, 0.4}, 0.0), DomainError);
}

TEST(AcceptanceProbability, NonincreasingInXi) {
    for (double lambda : {0.2, 1.0, 5.0}) {
        double prev = 1.0;
        for (double xi = 0.0; xi < 6.0; xi += 0.02) {
            const double p = acceptance_probability({4, 0.6, xi, 0.45}, lambda);
            EXPECT_LE(p, prev + 1e-12);
            EXPECT_GE(p, -1e-12);
            prev = p;
        }
    }
}

TEST(AcceptanceProbability, MatchesSimulatedFrequency) {
    const SamplingPlan plan{3, 0.7250, 0.3000, 0.3550};
    const double p = acceptance_probability(plan, 1.0);
    const auto mc = mc_acceptance_frequency(plan, 1.0, {1'000'000, 3, 1});
    const double se = std::sqrt(p * (1 - p) / mc.replications);
    EXPECT_LE(std::abs(p - mc.mean), 3.0 * se) << p << " vs " << mc.mean;
}
