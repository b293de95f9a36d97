#include "dtsp/model.hpp"

#include <cmath>
#include <string>

#include "dtsp/errors.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp {

GammaPrior::GammaPrior(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !std::isfinite(a) || !(b > 0.0) || !std::isfinite(b)) {
        throw DomainError("GammaPrior: a and b must be positive and finite");
    }
}

double GammaPrior::density(double lambda) const {
    if (lambda <= 0.0) return 0.0;
    return std::exp(a_ * std::log(b_) + (a_ - 1.0) * std::log(lambda) - b_ * lambda - log_gamma(a_));
}

double GammaPrior::marginal_lifetime_cdf(double t) const {
    if (t <= 0.0) return 0.0;
    return -std::expm1(-a_ * std::log1p(t / b_));
}

void CostModel::validate() const {
    for (double v : {sampling, time, rejection, salvage}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("CostModel: costs must be finite and nonnegative");
    }
}

AcceptanceLoss::AcceptanceLoss(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DomainError("AcceptanceLoss: at least the constant term is required");
    if (terms_.front().exponent != 0.0) throw DomainError("AcceptanceLoss: first exponent must be 0");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (!std::isfinite(t.exponent) || !std::isfinite(t.coefficient)) {
            throw DomainError("AcceptanceLoss: exponents and coefficients must be finite");
        }
        if (i > 0 && !(t.exponent > terms_[i - 1].exponent)) {
            throw DomainError("AcceptanceLoss: exponents must increase strictly");
        }
    }
    constexpr int kGrid = 1000;
    for (int i = 0; i < kGrid; ++i) {
        const double lambda = std::pow(10.0, -6.0 + 12.0 * i / (kGrid - 1));
        if ((*this)(lambda) < 0.0) {
            throw DomainError("AcceptanceLoss: g(lambda) < 0 at lambda = " + std::to_string(lambda));
        }
    }
}

AcceptanceLoss AcceptanceLoss::polynomial(std::span<const double> coefficients) {
    std::vector<Term> terms;
    terms.reserve(coefficients.size());
    for (std::size_t l = 0; l < coefficients.size(); ++l) {
        terms.push_back({static_cast<double>(l), coefficients[l]});
    }
    return AcceptanceLoss(std::move(terms));
}

AcceptanceLoss AcceptanceLoss::polynomial(std::initializer_list<double> coefficients) {
    return polynomial(std::span<const double>(coefficients.begin(), coefficients.size()));
}

double AcceptanceLoss::operator()(double lambda) const {
    double g = 0.0;
    for (const auto& t : terms_) {
        g += t.exponent == 0.0 ? t.coefficient : t.coefficient * std::pow(lambda, t.exponent);
    }
    return g;
}

bool AcceptanceLoss::is_polynomial() const {
    for (const auto& t : terms_) {
        if (t.exponent != std::floor(t.exponent)) return false;
    }
    return true;
}

int AcceptanceLoss::degree() const {
    if (!is_polynomial()) throw UnsupportedError("AcceptanceLoss::degree: non-integer exponent");
    return static_cast<int>(terms_.back().exponent);
}

bool AcceptanceLoss::is_nondecreasing() const {
    for (std::size_t i = 1; i < terms_.size(); ++i) {
        if (terms_[i].coefficient < 0.0) return false;
    }
    return true;
}

void SamplingPlan::validate() const {
    if (n < 0) throw DomainError("SamplingPlan: n must be nonnegative");
    if (std::isnan(tau) || std::isnan(xi) || std::isnan(c)) throw DomainError("SamplingPlan: NaN coordinate");
    if (!(xi >= 0.0)) throw DomainError("SamplingPlan: xi must be nonnegative");
    if (n == 0) {
        if (tau != 0.0) throw DomainError("SamplingPlan: n = 0 requires tau = 0");
        if (xi != 0.0 && !std::isinf(xi)) {
            throw DomainError("SamplingPlan: n = 0 requires xi = 0 (accept) or xi = inf (reject)");
        }
        return;
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("SamplingPlan: n >= 1 requires finite tau > 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("SamplingPlan: n >= 1 requires finite c > 0");
}

void HybridSamplingPlan::validate() const {
    if (base.n < 1) throw DomainError("HybridSamplingPlan: n must be at least 1");
    base.validate();
    if (r < 1 || r > base.n) throw DomainError("HybridSamplingPlan: r must lie in [1, n]");
}

std::optional<double> RiskReport::mc_z_score() const {
    if (!monte_carlo) return std::nullopt;
    const double diff = std::fabs(risk - monte_carlo->mean);
    if (monte_carlo->standard_error == 0.0) return diff == 0.0 ? 0.0 : kInfinity;
    return diff / monte_carlo->standard_error;
}

bool RiskReport::mc_flagged() const {
    const auto z = mc_z_score();
    return z && *z > 4.0;
}

double prior_moment(const GammaPrior& prior, double p) {
    if (!(p >= 0.0)) throw DomainError("prior_moment: exponent must be nonnegative");
    if (p == 0.0) return 1.0;
    return std::exp(log_gamma(prior.a() + p) - log_gamma(prior.a()) - p * std::log(prior.b()));
}

double expected_acceptance_loss(const GammaPrior& prior, const AcceptanceLoss& loss) {
    double total = 0.0;
    for (const auto& t : loss.terms()) total += t.coefficient * prior_moment(prior, t.exponent);
    return total;
}

double total_time_on_test(std::span<const double> failure_times, int n, double tau) {
    const auto m = static_cast<int>(failure_times.size());
    if (m > n) throw DomainError("total_time_on_test: more failures than items");
    double sum = 0.0;
    for (double x : failure_times) {
        if (!(x > 0.0) || x > tau) throw DomainError("total_time_on_test: failure time outside (0, tau]");
        sum += x;
    }
    return sum + (n - m) * tau;
}

double estimator_value(std::span<const double> failure_times, int n, double tau, double c) {
    if (!(c > 0.0)) throw DomainError("estimator_value: c must be positive");
    const auto m = static_cast<double>(failure_times.size());
    return total_time_on_test(failure_times, n, tau) / (m + c);
}

}  // namespace dtsp
