#include "dtsp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "dtsp/errors.hpp"

namespace dtsp {

namespace {

constexpr long long kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Running mean and centred second moment; blocks merge in a fixed order.
struct Moments {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(count + o.count);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.count) / total;
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / total;
        count += o.count;
    }

    MonteCarloEstimate estimate() const {
        MonteCarloEstimate e;
        e.mean = mean;
        e.replications = count;
        e.standard_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
        return e;
    }
};

// Runs `sample(stream)` once per replication, producing K outputs each.
template <std::size_t K, class Sample>
std::array<MonteCarloEstimate, K> run(const SimulationOptions& options, Sample&& sample) {
    if (options.replications < 1) throw DomainError("simulation: replications must be positive");
    if (options.threads < 1) throw DomainError("simulation: threads must be positive");
    const long long blocks = (options.replications + kBlock - 1) / kBlock;
    std::vector<std::array<Moments, K>> partial(static_cast<std::size_t>(blocks));

    auto do_block = [&](long long blk) {
        auto& acc = partial[static_cast<std::size_t>(blk)];
        const long long end = std::min(options.replications, (blk + 1) * kBlock);
        for (long long i = blk * kBlock; i < end; ++i) {
            RandomStream stream(options.seed, static_cast<std::uint64_t>(i));
            const std::array<double, K> v = sample(stream);
            for (std::size_t k = 0; k < K; ++k) acc[k].add(v[k]);
        }
    };

    const int workers = static_cast<int>(std::min<long long>(options.threads, blocks));
    if (workers <= 1) {
        for (long long b = 0; b < blocks; ++b) do_block(b);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (long long b = w; b < blocks; b += workers) do_block(b);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::array<Moments, K> total{};
    for (const auto& p : partial)
        for (std::size_t k = 0; k < K; ++k) total[k].merge(p[k]);
    std::array<MonteCarloEstimate, K> out{};
    for (std::size_t k = 0; k < K; ++k) out[k] = total[k].estimate();
    return out;
}

struct Observation {
    int failures = 0;
    double total_time = 0.0;
    double duration = 0.0;
};

// Type-I when r is empty, hybrid otherwise. `scratch` holds the n lifetimes.
Observation observe(RandomStream& stream, int n, double tau, std::optional<int> r, double lambda,
                    std::vector<double>& scratch) {
    Observation o;
    if (n == 0) return o;
    scratch.resize(static_cast<std::size_t>(n));
    for (auto& x : scratch) x = stream.exponential(lambda);
    if (r) {
        auto kth = scratch.begin() + (*r - 1);
        std::nth_element(scratch.begin(), kth, scratch.end());
        if (*kth <= tau) {
            const double xr = *kth;
            double sum = 0.0;
            for (auto it = scratch.begin(); it <= kth; ++it) sum += *it;
            o.failures = *r;
            o.duration = xr;
            o.total_time = sum + (n - *r) * xr;
            return o;
        }
    }
    double sum = 0.0;
    for (double x : scratch) {
        if (x <= tau) {
            sum += x;
            ++o.failures;
        }
    }
    o.duration = tau;
    o.total_time = sum + (n - o.failures) * tau;
    return o;
}

Decision dsp_rule(const SamplingPlan& plan, double estimate) {
    if (plan.n == 0) return plan.xi == 0.0 ? Decision::accept : Decision::reject;
    return estimate >= plan.xi ? Decision::accept : Decision::reject;
}

Decision lam_rule(const SamplingPlan& plan, const Observation& o) {
    if (plan.n == 0) return plan.xi == 0.0 ? Decision::accept : Decision::reject;
    const double mle = o.failures == 0 ? plan.n * plan.tau : o.total_time / o.failures;
    return mle >= plan.xi ? Decision::accept : Decision::reject;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t mix = index;
    std::uint64_t state = seed ^ splitmix64(mix);
    for (auto& w : s_) w = splitmix64(state);
}

std::uint64_t RandomStream::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double RandomStream::standard_normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::exponential(double rate) { return -std::log(uniform()) / rate; }

double RandomStream::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("RandomStream::gamma: shape and rate must be positive");
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0, rate);
        return g * std::exp(std::log(uniform()) / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = standard_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
}

void Design::validate() const {
    // c = 0 is allowed because only the DSP decision reads it.
    SamplingPlan p = plan;
    if (p.n > 0 && p.c == 0.0) p.c = 1.0;
    p.validate();
    if (failure_threshold) HybridSamplingPlan{p, *failure_threshold}.validate();
}

Decision ExperimentRecord::decision(Rule rule) const {
    switch (rule) {
        case Rule::dsp:
            return dsp;
        case Rule::lsp:
            if (!lsp_available) throw UnsupportedError("Bayes rule needs a nondecreasing acceptance loss");
            return lsp;
        case Rule::lam:
            return lam;
    }
    return dsp;
}

double ExperimentRecord::loss(Rule rule) const {
    switch (rule) {
        case Rule::dsp:
            return loss_dsp;
        case Rule::lsp:
            if (!lsp_available) throw UnsupportedError("Bayes rule needs a nondecreasing acceptance loss");
            return loss_lsp;
        case Rule::lam:
            return loss_lam;
    }
    return loss_dsp;
}

ExperimentContext::ExperimentContext(Design d, const GammaPrior& p, const CostModel& c, const AcceptanceLoss& l)
    : design(d), prior(p), costs(c), loss(l) {
    design.validate();
    costs.validate();
    if (loss.is_nondecreasing()) thresholds.emplace(design.plan.n, prior, loss, costs.rejection);
}

ExperimentRecord simulate_experiment(RandomStream& stream, const ExperimentContext& ctx, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("simulate_experiment: lambda must be positive");
    const auto& plan = ctx.design.plan;
    thread_local std::vector<double> scratch;
    const Observation o = observe(stream, plan.n, plan.tau, ctx.design.failure_threshold, lambda, scratch);

    ExperimentRecord rec;
    rec.lambda = lambda;
    rec.hybrid = ctx.design.hybrid();
    rec.failures = o.failures;
    rec.total_time = o.total_time;
    rec.duration = o.duration;
    rec.estimate = plan.n == 0 ? 0.0 : o.total_time / (o.failures + plan.c);
    rec.dsp = dsp_rule(plan, rec.estimate);
    rec.lam = lam_rule(plan, o);
    if (ctx.thresholds) {
        rec.lsp = lsp_decision(o.failures, o.total_time, *ctx.thresholds);
        rec.lsp_available = true;
    }

    double fixed = plan.n * ctx.costs.sampling + o.duration * ctx.costs.time;
    if (rec.hybrid) fixed -= (plan.n - o.failures) * ctx.costs.salvage;
    const double accept_loss = ctx.loss(lambda);
    auto realized = [&](Decision d) { return fixed + (d == Decision::accept ? accept_loss : ctx.costs.rejection); };
    rec.loss_dsp = realized(rec.dsp);
    rec.loss_lsp = realized(rec.lsp);
    rec.loss_lam = realized(rec.lam);
    return rec;
}

MonteCarloEstimate mc_bayes_risk(Rule rule, const Design& design, const GammaPrior& prior, const CostModel& costs,
                                 const AcceptanceLoss& loss, const SimulationOptions& options) {
    const ExperimentContext ctx(design, prior, costs, loss);
    return run<1>(options, [&](RandomStream& s) {
        const double lambda = s.gamma(prior.a(), prior.b());
        return std::array<double, 1>{simulate_experiment(s, ctx, lambda).loss(rule)};
    })[0];
}

MonteCarloEstimate proportion_of_acceptance(Rule rule, const Design& design, const GammaPrior& prior,
                                            const CostModel& costs, const AcceptanceLoss& loss,
                                            const SimulationOptions& options) {
    const ExperimentContext ctx(design, prior, costs, loss);
    return run<1>(options, [&](RandomStream& s) {
        const double lambda = s.gamma(prior.a(), prior.b());
        const auto d = simulate_experiment(s, ctx, lambda).decision(rule);
        return std::array<double, 1>{d == Decision::accept ? 1.0 : 0.0};
    })[0];
}

MonteCarloEstimate mc_acceptance_frequency(const SamplingPlan& plan, double lambda, const SimulationOptions& options) {
    plan.validate();
    if (!(lambda > 0.0)) throw DomainError("mc_acceptance_frequency: lambda must be positive");
    return run<1>(options, [&](RandomStream& s) {
        thread_local std::vector<double> scratch;
        const Observation o = observe(s, plan.n, plan.tau, std::nullopt, lambda, scratch);
        const double estimate = plan.n == 0 ? 0.0 : o.total_time / (o.failures + plan.c);
        return std::array<double, 1>{dsp_rule(plan, estimate) == Decision::accept ? 1.0 : 0.0};
    })[0];
}

CensoringMoments mc_censoring_moments(int n, int r, double tau, const GammaPrior& prior,
                                      const SimulationOptions& options) {
    if (n < 1 || r < 1 || r > n || !(tau > 0.0)) throw DomainError("mc_censoring_moments: need 1 <= r <= n, tau > 0");
    const auto out = run<2>(options, [&](RandomStream& s) {
        thread_local std::vector<double> scratch;
        const double lambda = s.gamma(prior.a(), prior.b());
        const Observation o = observe(s, n, tau, r, lambda, scratch);
        return std::array<double, 2>{static_cast<double>(o.failures), o.duration};
    });
    return {out[0], out[1]};
}

std::vector<double> sample_estimates(const SamplingPlan& plan, double lambda, const SimulationOptions& options) {
    plan.validate();
    if (plan.n < 1) throw DomainError("sample_estimates: plan must inspect at least one item");
    if (!(lambda > 0.0)) throw DomainError("sample_estimates: lambda must be positive");
    std::vector<double> out(static_cast<std::size_t>(options.replications));
    std::vector<double> scratch;
    for (long long i = 0; i < options.replications; ++i) {
        RandomStream s(options.seed, static_cast<std::uint64_t>(i));
        const Observation o = observe(s, plan.n, plan.tau, std::nullopt, lambda, scratch);
        out[static_cast<std::size_t>(i)] = o.total_time / (o.failures + plan.c);
    }
    return out;
}

}  // namespace dtsp
