#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/lsp.hpp"
#include "dtsp/simulate.hpp"
#include "support/oracles.hpp"

using namespace dtsp;

namespace {

const GammaPrior kPrior(2.5, 0.8);
const CostModel kCosts{0.5, 0.5, 30.0, 0.0};
const AcceptanceLoss kQuadratic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0});
const AcceptanceLoss kCubic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0, 2.0});

std::vector<oracle::Term> terms_of(const AcceptanceLoss& loss) {
    std::vector<oracle::Term> out;
    for (const auto& t : loss.terms()) out.push_back({t.exponent, t.coefficient});
    return out;
}

}  // namespace

TEST(PosteriorExpectedLoss, PriorMomentsAtZero) {
    EXPECT_NEAR(posterior_expected_loss(0, 0.0, kPrior, kQuadratic), 35.59375, 1e-12);
}

TEST(PosteriorExpectedLoss, LargeTotalTimeLeavesConstant) {
    EXPECT_NEAR(posterior_expected_loss(2, 1e12, kPrior, kQuadratic), 2.0, 1e-9);
}

TEST(PosteriorExpectedLoss, MatchesQuadrature) {
    const GammaPrior prior(1.0, 0.8);
    EXPECT_NEAR(posterior_expected_loss(3, 1.5, prior, kCubic), oracle::posterior_loss(3, 1.5, 1.0, 0.8, terms_of(kCubic)),
                1e-8);
    const AcceptanceLoss np({{0.0, 2.0}, {1.0, 2.0}, {2.5, 2.0}});
    EXPECT_NEAR(posterior_expected_loss(1, 0.4, kPrior, np), oracle::posterior_loss(1, 0.4, 2.5, 0.8, terms_of(np)),
                1e-8);
}

TEST(LspThreshold, QuadraticRootOracle) {
    for (int m = 0; m <= 8; ++m) {
        const auto t = lsp_threshold(m, kPrior, kQuadratic, 30.0);
        const double s = m + kPrior.a();
        if (posterior_expected_loss(m, 0.0, kPrior, kQuadratic) <= 30.0) {
            EXPECT_EQ(t.kind, LspThreshold::Kind::always_accept);
            continue;
        }
        ASSERT_EQ(t.kind, LspThreshold::Kind::finite);
        EXPECT_NEAR(t.value, oracle::quadratic_max_root(28.0, -2.0 * s, -2.0 * s * (s + 1)), 1e-9) << "m=" << m;
        EXPECT_NEAR(posterior_expected_loss(m, t.value - kPrior.b(), kPrior, kQuadratic), 30.0, 1e-10);
    }
}

TEST(LspThreshold, CubicRootOracle) {
    const GammaPrior prior(0.1, 0.2);
    for (int m = 0; m <= 8; ++m) {
        const auto t = lsp_threshold(m, prior, kCubic, 30.0);
        if (t.kind != LspThreshold::Kind::finite) continue;
        const double s = m + prior.a();
        EXPECT_NEAR(t.value, oracle::cubic_max_root(28.0, -2.0 * s, -2.0 * s * (s + 1), -2.0 * s * (s + 1) * (s + 2)),
                    1e-9)
            << "m=" << m;
    }
}

TEST(LspThreshold, Sentinels) {
    const auto flat = AcceptanceLoss::polynomial({30.0, 0.0, 0.0});
    EXPECT_EQ(lsp_threshold(2, kPrior, flat, 30.0).kind, LspThreshold::Kind::always_accept);
    const auto high = AcceptanceLoss::polynomial({31.0, 1.0});
    EXPECT_EQ(lsp_threshold(2, kPrior, high, 30.0).kind, LspThreshold::Kind::always_reject);
    const AcceptanceLoss decreasing({{0.0, 5.0}, {1.0, -1.0}, {2.0, 1.0}});
    EXPECT_THROW(lsp_threshold(1, kPrior, decreasing, 30.0), DomainError);
}

TEST(LspDecision, BoundaryAndSentinels) {
    const LspThresholds th(4, kPrior, kQuadratic, 30.0);
    for (int m = 0; m <= 4; ++m) {
        const auto& t = th[m];
        if (t.kind == LspThreshold::Kind::always_accept) {
            EXPECT_EQ(lsp_decision(m, 0.0, th), Decision::accept);
        } else if (t.kind == LspThreshold::Kind::finite) {
            EXPECT_EQ(lsp_decision(m, t.value - kPrior.b(), th), Decision::accept);
            EXPECT_EQ(lsp_decision(m, std::nextafter(t.value - kPrior.b(), 0.0), th), Decision::reject);
        }
    }
    const LspThresholds never(2, kPrior, AcceptanceLoss::polynomial({31.0, 1.0}), 30.0);
    EXPECT_EQ(lsp_decision(0, 1e9, never), Decision::reject);
}

TEST(LspDecision, AcceptRegionIsUpperIntervalInY) {
    const LspThresholds th(5, kPrior, kCubic, 30.0);
    for (int m = 0; m <= 5; ++m) {
        bool accepted = false;
        for (double y = 0.0; y < 20.0; y += 0.01) {
            const bool a = lsp_decision(m, y, th) == Decision::accept;
            if (accepted) EXPECT_TRUE(a);
            accepted = accepted || a;
        }
    }
}

TEST(PosteriorExpectedLoss, IncreasingInEachCoefficient) {
    for (int l = 0; l < 3; ++l) {
        double coef[3] = {2.0, 2.0, 2.0};
        const double base = posterior_expected_loss(2, 0.7, kPrior, AcceptanceLoss::polynomial(coef));
        coef[l] += 0.5;
        EXPECT_GT(posterior_expected_loss(2, 0.7, kPrior, AcceptanceLoss::polynomial(coef)), base);
    }
}

TEST(LspRisk, PublishedOptimumEqualsShrinkagePlan) {
    EXPECT_NEAR(lsp_risk_type1(3, 0.7250, kPrior, kCosts, kQuadratic).risk, 25.2777, 5e-4);
    EXPECT_NEAR(lsp_risk_type1(2, 0.8875, GammaPrior(0.1, 0.2), kCosts, kCubic).risk, 7.4606, 5e-4);
    EXPECT_NEAR(lsp_risk_type1(0, 0.0, GammaPrior(1.5, 2.0), kCosts, kQuadratic).risk, 5.3750, 1e-12);
}

TEST(LspRisk, RejectsNonIntegerExponents) {
    const AcceptanceLoss np({{0.0, 2.0}, {1.0, 2.0}, {2.5, 2.0}});
    EXPECT_THROW(lsp_risk_type1(2, 0.5, kPrior, kCosts, np), UnsupportedError);
}

TEST(LspRisk, RandomDesignsMatchMonteCarlo) {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> un(1, 5);
    std::uniform_real_distribution<double> ut(0.05, 1.0);
    for (int i = 0; i < 4; ++i) {
        const int n = un(rng);
        const double tau = ut(rng);
        const auto& loss = i % 2 ? kCubic : kQuadratic;
        const double exact = lsp_risk_type1(n, tau, kPrior, kCosts, loss).risk;
        const auto mc = mc_bayes_risk(Rule::lsp, Design{{n, tau, 0.0, 0.0}, std::nullopt}, kPrior, kCosts, loss,
                                      {1'000'000, 900u + i, 1});
        // A rule that never accepts has a constant risk and zero standard error.
        EXPECT_LE(std::abs(exact - mc.mean), 4.0 * mc.standard_error + 1e-12 * exact) << "n=" << n << " tau=" << tau;
    }
}

TEST(LspRisk, BayesRuleDominatesShrinkagePlans) {
    for (int n = 1; n <= 4; ++n) {
        for (double tau : {0.3, 0.7, 1.2}) {
            const double bayes = lsp_risk_type1(n, tau, kPrior, kCosts, kQuadratic).risk;
            const Type1RiskEvaluator eval(n, tau, kPrior, kCosts, kQuadratic);
            for (double xi = 0.05; xi <= 2.0; xi += 0.05) {
                for (double c = 0.025; c <= 1.0; c += 0.025) EXPECT_LE(bayes, eval(xi, c) + 1e-9);
            }
        }
    }
}

TEST(LspThresholds, ReusedTableMatchesFreshEvaluation) {
    const LspThresholds th(6, kPrior, kCubic, 30.0);
    for (int n = 1; n <= 6; ++n) {
        EXPECT_NEAR(lsp_risk_type1(n, 0.6, th, kPrior, kCosts, kCubic).risk,
                    lsp_risk_type1(n, 0.6, kPrior, kCosts, kCubic).risk, 1e-12);
    }
}
