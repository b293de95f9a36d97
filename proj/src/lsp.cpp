#include "dtsp/lsp.hpp"

#include <cmath>

#include "dtsp/errors.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp {

namespace {

// a_l Γ(m+a+p_l) / Γ(m+a), per loss term.
std::vector<double> posterior_weights(int m, const GammaPrior& prior, const AcceptanceLoss& loss) {
    std::vector<double> w;
    const double shape = m + prior.a();
    for (const auto& t : loss.terms()) {
        w.push_back(t.exponent == 0.0 ? t.coefficient
                                      : t.coefficient * std::exp(log_gamma(shape + t.exponent) - log_gamma(shape)));
    }
    return w;
}

double phi(const std::vector<double>& w, const AcceptanceLoss& loss, double x) {
    double s = 0.0;
    const auto& terms = loss.terms();
    for (std::size_t l = 0; l < w.size(); ++l) s += w[l] * std::pow(x, -terms[l].exponent);
    return s;
}

}  // namespace

double posterior_expected_loss(int m, double y, const GammaPrior& prior, const AcceptanceLoss& loss) {
    if (m < 0) throw DomainError("posterior_expected_loss: m must be nonnegative");
    if (!(y >= 0.0)) throw DomainError("posterior_expected_loss: y must be nonnegative");
    if (std::isinf(y)) return loss.constant();
    return phi(posterior_weights(m, prior, loss), loss, y + prior.b());
}

LspThreshold lsp_threshold(int m, const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost) {
    if (m < 0) throw DomainError("lsp_threshold: m must be nonnegative");
    if (!loss.is_nondecreasing()) throw DomainError("lsp_threshold: coefficients past a_0 must be nonnegative");
    const auto w = posterior_weights(m, prior, loss);
    const double b = prior.b();
    auto f = [&](double x) { return phi(w, loss, x); };
    if (f(b) <= rejection_cost) return LspThreshold::accept();
    if (loss.constant() >= rejection_cost) return LspThreshold::reject();

    double hi = 2.0 * b;
    while (f(hi) > rejection_cost) hi *= 2.0;
    const auto root = find_monotone_root(f, rejection_cost, b, hi, 1e-15 * hi);
    return {LspThreshold::Kind::finite, root.x};
}

LspThresholds::LspThresholds(int n, const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost)
    : b_(prior.b()) {
    if (n < 0) throw DomainError("LspThresholds: n must be nonnegative");
    for (int m = 0; m <= n; ++m) table_.push_back(lsp_threshold(m, prior, loss, rejection_cost));
}

Decision lsp_decision(int m, double y, const LspThresholds& thresholds) {
    if (m < 0 || m > thresholds.n()) throw DomainError("lsp_decision: m outside 0..n");
    const auto& t = thresholds[m];
    switch (t.kind) {
        case LspThreshold::Kind::always_accept:
            return Decision::accept;
        case LspThreshold::Kind::always_reject:
            return Decision::reject;
        case LspThreshold::Kind::finite:
            break;
    }
    return y >= t.value - thresholds.prior_b() ? Decision::accept : Decision::reject;
}

RiskReport lsp_risk_type1(int n, double tau, const GammaPrior& prior, const CostModel& costs,
                          const AcceptanceLoss& loss) {
    costs.validate();
    if (!loss.is_polynomial()) throw UnsupportedError("lsp_risk_type1: closed form needs integer exponents");
    if (n < 0) throw DomainError("lsp_risk_type1: n must be nonnegative");
    if (n == 0 && tau != 0.0) throw DomainError("lsp_risk_type1: n = 0 requires tau = 0");
    if (n > 0 && (!(tau > 0.0) || !std::isfinite(tau))) throw DomainError("lsp_risk_type1: tau must be positive");

    return lsp_risk_type1(n, tau, LspThresholds(n, prior, loss, costs.rejection), prior, costs, loss);
}

RiskReport lsp_risk_type1(int n, double tau, const LspThresholds& thresholds, const GammaPrior& prior,
                          const CostModel& costs, const AcceptanceLoss& loss) {
    if (thresholds.n() < n) throw DomainError("lsp_risk_type1: threshold table too short");
    if (!loss.is_polynomial()) throw UnsupportedError("lsp_risk_type1: closed form needs integer exponents");
    const double prior_loss = expected_acceptance_loss(prior, loss);
    RiskReport report;
    report.plan = {n, tau, 0.0, 0.0};
    if (n == 0) {
        const bool accept = lsp_decision(0, 0.0, thresholds) == Decision::accept;
        report.plan = accept ? SamplingPlan::accept_without_inspection() : SamplingPlan::reject_without_inspection();
        report.risk = accept ? prior_loss : costs.rejection;
        return report;
    }

    const double a = prior.a();
    const double b = prior.b();
    const auto& terms = loss.terms();
    const std::size_t L = terms.size();
    std::vector<double> weight(L);  // C_l
    std::vector<double> log_norm(L);  // ln(b^a Γ(a+l) / Γ(a))
    for (std::size_t l = 0; l < L; ++l) {
        weight[l] = l == 0 ? costs.rejection - terms[0].coefficient : -terms[l].coefficient;
        log_norm[l] = a * std::log(b) - log_gamma(a) + log_gamma(a + terms[l].exponent);
    }

    CompensatedSum<double> sum;
    // r2: no failures, y = nτ.
    if (lsp_decision(0, n * tau, thresholds) == Decision::reject) {
        const double log_k = std::log(n * tau + b);
        for (std::size_t l = 0; l < L; ++l)
            sum.add(weight[l] * std::exp(log_norm[l] - (a + terms[l].exponent) * log_k));
    }

    for (int m = 1; m <= n; ++m) {
        const auto& t = thresholds[m];
        if (t.kind == LspThreshold::Kind::always_accept) continue;
        const double d = t.kind == LspThreshold::Kind::always_reject ? kInfinity : t.value - b - (n - m) * tau;
        if (!(d > 0.0)) continue;
        const double log_nm = log_binomial(n, m);
        if (d > m * tau) {
            // r4: every outcome with M = m rejects.
            for (int j = 0; j <= m; ++j) {
                const double log_k = std::log((n - m + j) * tau + b);
                const double log_c = log_nm + log_binomial(m, j);
                const double sign = j % 2 == 0 ? 1.0 : -1.0;
                for (std::size_t l = 0; l < L; ++l)
                    sum.add(sign * weight[l] * std::exp(log_c + log_norm[l] - (a + terms[l].exponent) * log_k));
            }
            continue;
        }
        // r3: reject when the failure times sum to less than d.
        const double q = d / tau;
        const int l_star = std::min(m, static_cast<int>(std::floor(std::nextafter(q, kInfinity))));
        const double D = t.value;
        for (int j = 0; j <= l_star; ++j) {
            const double rest = d - j * tau;
            if (!(rest > 0.0)) continue;
            const double y = rest / D;
            const double log_k = std::log((n - m + j) * tau + b);
            const double log_c = log_nm + log_binomial(m, j) + a * std::log(b) - log_gamma(a) - log_gamma(m);
            const double sign = j % 2 == 0 ? 1.0 : -1.0;
            for (std::size_t l = 0; l < L; ++l) {
                const double beta = a + terms[l].exponent;
                const double ib = reg_inc_beta(y, m, beta);
                if (ib == 0.0) continue;
                // Γ(m+a+l) B_y(m, a+l) K^{-(a+l)}, with B_y = I_y · B(m, a+l).
                const double log_term =
                    log_c + log_gamma(m + beta) + log_beta(m, beta) + std::log(ib) - beta * log_k;
                sum.add(sign * weight[l] * std::exp(log_term));
            }
        }
    }

    report.risk = n * costs.sampling + tau * costs.time + prior_loss + sum.value();
    report.cancellation_ratio = sum.cancellation_ratio();
    report.precision_warning = report.cancellation_ratio > kCancellationWarning;
    return report;
}

}  // namespace dtsp
