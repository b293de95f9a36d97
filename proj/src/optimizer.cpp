#include "dtsp/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>
#include <tuple>
#include <vector>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/lsp.hpp"
#include "dtsp/numerics.hpp"

namespace dtsp {

namespace {

// Slack on pruning comparisons so that rounding never discards the optimum.
constexpr double kPruneSlack = 1e-9;

struct Candidate {
    double risk = kInfinity;
    int n = 0;
    int r = 0;
    int tau_index = 0;
    int xi_index = 0;
    int c_index = 0;
};

bool better(const Candidate& x, const Candidate& y) {
    // NaN marks a risk that could not be computed to working accuracy.
    if (std::isnan(x.risk)) return false;
    if (std::isnan(y.risk)) return true;
    return std::tie(x.risk, x.n, x.r, x.tau_index, x.xi_index, x.c_index) <
           std::tie(y.risk, y.n, y.r, y.tau_index, y.xi_index, y.c_index);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

int grid_count(double max, double step) { return static_cast<int>(std::floor(max / step + 1e-9)); }

// Coarse indices on a fine grid 1..count: factor, 2·factor, ..., plus count.
std::vector<int> coarse_axis(int count, int factor) {
    std::vector<int> out;
    for (int i = factor; i <= count; i += factor) out.push_back(i);
    if (out.empty() || out.back() != count) out.push_back(count);
    return out;
}

std::vector<int> full_axis(int count) {
    std::vector<int> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = i + 1;
    return out;
}

std::vector<int> window_axis(int center, int radius, int count) {
    std::vector<int> out;
    for (int i = std::max(1, center - radius); i <= std::min(count, center + radius); ++i) out.push_back(i);
    return out;
}

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

Candidate no_inspection_best(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss) {
    Candidate accept{expected_acceptance_loss(prior, loss), 0, 0, 0, 0, 0};
    // Reject-all is ordered after accept-all at equal risk via an index past any grid.
    Candidate reject{costs.rejection, 0, 0, 0, 1 << 30, 0};
    return better(accept, reject) ? accept : reject;
}

SamplingPlan no_inspection_plan(const Candidate& c) {
    return c.xi_index == 0 ? SamplingPlan::accept_without_inspection() : SamplingPlan::reject_without_inspection();
}

// Risk over (ξ, c) at a fixed slice (n, r, τ).
using SliceEvaluator = std::function<double(double xi, double c)>;

struct Grids {
    double xi_step, c_step, tau_step;
    int xi_count, c_count;
    int factor;      ///< coarse multiple for c
    int xi_factor;   ///< coarse multiple for ξ
    int tau_factor;  ///< coarse multiple for τ
};

// Two best cells of one τ slice.
struct SliceBest {
    Candidate first;
    Candidate second;
    long long evaluations = 0;

    void offer(const Candidate& c) {
        if (better(c, first)) {
            second = first;
            first = c;
        } else if (better(c, second)) {
            second = c;
        }
    }
};

SliceBest scan_slice(const SliceEvaluator& eval, const Grids& g, int n, int r, int tau_index,
                     const std::vector<int>& xi_axis, const std::vector<int>& c_axis) {
    SliceBest best;
    for (int ci : c_axis) {
        const double c = ci * g.c_step;
        for (int xi : xi_axis) {
            const double v = eval(xi * g.xi_step, c);
            ++best.evaluations;
            best.offer({v, n, r, tau_index, xi, ci});
        }
    }
    return best;
}

// One sample size (and every r for hybrid plans): builds the evaluator for a
// (r, τ) slice and returns its lower bound alongside.
struct SliceFactory {
    std::function<std::pair<SliceEvaluator, double>(int r, double tau)> make;
    std::vector<int> r_values;
};

// Coarse scan, then fine windows of ±1 coarse cell in τ and ξ (the whole c
// axis) around the best coarse candidates. With `exhaustive` the fine grid is
// scanned directly.
Candidate search_sample_size(const SliceFactory& factory, const Grids& g, int n, int tau_count,
                             const SearchConfig& config, const Candidate& incumbent, long long& evaluations) {
    struct Job {
        int r;
        int tau_index;
        std::vector<int> xi_axis;
        std::vector<int> c_axis;
    };

    auto run = [&](const std::vector<Job>& jobs, std::vector<SliceBest>& out) {
        out.assign(jobs.size(), SliceBest{});
        parallel_for(static_cast<int>(jobs.size()), config.threads, [&](int i) {
            const auto& job = jobs[static_cast<std::size_t>(i)];
            auto [eval, lower] = factory.make(job.r, job.tau_index * g.tau_step);
            if (lower > incumbent.risk + kPruneSlack) return;
            out[static_cast<std::size_t>(i)] = scan_slice(eval, g, n, job.r, job.tau_index, job.xi_axis, job.c_axis);
        });
        for (const auto& s : out) evaluations += s.evaluations;
    };

    Candidate best = incumbent;
    if (config.exhaustive) {
        const auto xi_axis = full_axis(g.xi_count);
        const auto c_axis = full_axis(g.c_count);
        std::vector<Job> jobs;
        for (int r : factory.r_values)
            for (int t = 1; t <= tau_count; ++t) jobs.push_back({r, t, xi_axis, c_axis});
        std::vector<SliceBest> out;
        run(jobs, out);
        for (const auto& s : out)
            if (better(s.first, best)) best = s.first;
        return best;
    }

    const int ft = g.tau_factor;
    const int fx = g.xi_factor;
    const auto xi_coarse = coarse_axis(g.xi_count, fx);
    const auto c_coarse = coarse_axis(g.c_count, g.factor);
    std::vector<Job> jobs;
    for (int r : factory.r_values)
        for (int t : coarse_axis(tau_count, ft)) jobs.push_back({r, t, xi_coarse, c_coarse});
    std::vector<SliceBest> coarse;
    run(jobs, coarse);

    std::vector<Candidate> seeds;
    for (const auto& s : coarse) {
        if (std::isfinite(s.first.risk)) seeds.push_back(s.first);
        if (std::isfinite(s.second.risk)) seeds.push_back(s.second);
    }
    std::sort(seeds.begin(), seeds.end(), better);
    if (seeds.size() > static_cast<std::size_t>(config.refine_candidates))
        seeds.resize(static_cast<std::size_t>(config.refine_candidates));

    for (const auto& s : seeds) {
        if (better(s, best)) best = s;
    }
    // Fine windows of ±1 coarse cell in τ and ξ. A window whose best cell sits on its
    // edge is moved there and rescanned, so narrow valleys that leave the
    // first window are followed.
    constexpr int kMaxMoves = 200;
    for (const auto& seed : seeds) {
        Candidate center = seed;
        for (int move = 0; move < kMaxMoves; ++move) {
            const auto xi_axis = window_axis(center.xi_index, fx, g.xi_count);
            // The optimum over c at fixed (τ, ξ) moves fast along a ridge, so
            // refinement scans the whole fine c axis.
            const auto c_axis = full_axis(g.c_count);
            std::vector<Job> fine;
            for (int t : window_axis(center.tau_index, ft, tau_count)) fine.push_back({center.r, t, xi_axis, c_axis});
            std::vector<SliceBest> refined;
            run(fine, refined);
            Candidate local = center;
            for (const auto& s : refined)
                if (better(s.first, local)) local = s.first;
            if (better(local, best)) best = local;
            const bool on_edge = std::abs(local.tau_index - center.tau_index) == ft ||
                                 std::abs(local.xi_index - center.xi_index) == fx;
            if (!on_edge || !better(local, center)) break;
            center = local;
        }
    }
    return best;
}

RiskReport report_for(const Candidate& best, const Grids& g) {
    RiskReport report;
    if (best.n == 0) {
        report.plan = no_inspection_plan(best);
    } else {
        report.plan = {best.n, best.tau_index * g.tau_step, best.xi_index * g.xi_step, best.c_index * g.c_step};
        if (best.r > 0) report.failure_threshold = best.r;
    }
    report.risk = best.risk;
    return report;
}

Grids make_grids(const SearchConfig& config) {
    return {config.xi_step,
            config.c_step,
            config.tau_step,
            grid_count(config.xi_max, config.xi_step),
            grid_count(config.c_max, config.c_step),
            config.refine_factor,
            config.xi_refine_factor,
            config.tau_refine_factor};
}

}  // namespace

void SearchConfig::validate() const {
    for (double v : {xi_max, c_max, xi_step, c_step, tau_step}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("SearchConfig: steps and limits must be positive and finite");
    }
    if (tau_max && (!(*tau_max > 0.0) || !std::isfinite(*tau_max)))
        throw DomainError("SearchConfig: tau_max must be positive and finite");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("SearchConfig: alpha must lie in (0, 1)");
    if (refine_factor < 1 || xi_refine_factor < 1 || tau_refine_factor < 1)
        throw DomainError("SearchConfig: refine factors must be at least 1");
    if (refine_candidates < 1) throw DomainError("SearchConfig: refine_candidates must be at least 1");
    if (threads < 1) throw DomainError("SearchConfig: threads must be at least 1");
}

double tau_alpha(const GammaPrior& prior, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("tau_alpha: alpha must lie in (0, 1)");
    return prior.b() * std::expm1(-std::log(alpha) / prior.a());
}

int bound_n(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss, double best_risk,
            Censoring censoring) {
    const double per_item = censoring == Censoring::hybrid ? costs.sampling - costs.salvage : costs.sampling;
    if (!(per_item > 0.0)) throw UnboundedSearchError("bound_n: per-item cost must be positive");
    const double cap = std::min({costs.rejection, expected_acceptance_loss(prior, loss), best_risk});
    return static_cast<int>(std::floor(cap / per_item + 1e-12));
}

TauRange tau_range(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                   const SearchConfig& config, double best_risk, Censoring censoring) {
    config.validate();
    const double limit = config.tau_max ? *config.tau_max : tau_alpha(prior, config.alpha);
    if (censoring == Censoring::hybrid) return {0.0, limit};
    if (costs.time > 0.0) {
        const double cap = std::min({costs.rejection, expected_acceptance_loss(prior, loss), best_risk});
        return {0.0, std::min(cap / costs.time, limit)};
    }
    if (!config.tau_max) throw UnboundedSearchError("tau_range: C_tau = 0 needs an explicit tau_max");
    return {0.0, limit};
}

double replacement_decision_bound(const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost,
                                  double exposure) {
    const double a = prior.a();
    const double q = exposure / (prior.b() + exposure);
    const double log_p0 = a * std::log1p(-q);
    double mass = 0.0;
    double total = 0.0;
    for (int k = 0; k < 100000 && (1.0 - mass) * rejection_cost > 1e-12; ++k) {
        const double log_qk = k == 0 ? 0.0 : k * std::log(q);
        const double p = std::exp(log_p0 + log_gamma(a + k) - log_gamma(a) - log_gamma(k + 1.0) + log_qk);
        mass += p;
        total += p * std::min(posterior_expected_loss(k, exposure, prior, loss), rejection_cost);
    }
    return total;
}

double acceptance_loss_floor(const GammaPrior& prior, const AcceptanceLoss& loss, double rejection_cost) {
    if (!loss.is_nondecreasing()) return 0.0;
    if (loss.constant() >= rejection_cost) return rejection_cost;
    if (loss.size() == 1) return loss.constant();
    // g crosses C_r once at λ*.
    double hi = 1.0;
    while (loss(hi) < rejection_cost) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (loss(mid) < rejection_cost ? lo : hi) = mid;
    }
    const double star = 0.5 * (lo + hi);
    double k = rejection_cost * (1.0 - gamma_cdf(star, prior.a(), prior.b()));
    for (const auto& t : loss.terms())
        k += t.coefficient * prior_moment(prior, t.exponent) * gamma_cdf(star, prior.a() + t.exponent, prior.b());
    return k;
}

OptimizationResult optimize_dsp_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config) {
    config.validate();
    costs.validate();
    const Clock clock;
    const Grids g = make_grids(config);
    const double floor_k = acceptance_loss_floor(prior, loss, costs.rejection);
    Candidate best = no_inspection_best(prior, costs, loss);
    long long evaluations = 2;

    for (int n = 1; n <= bound_n(prior, costs, loss, best.risk); ++n) {
        if (n * costs.sampling + floor_k > best.risk + kPruneSlack) break;
        const auto range = tau_range(prior, costs, loss, config, best.risk);
        const int tau_count = grid_count(range.upper, g.tau_step);
        if (tau_count < 1) continue;
        SliceFactory factory;
        factory.r_values = {0};
        factory.make = [&](int, double tau) {
            auto ev = std::make_shared<Type1RiskEvaluator>(n, tau, prior, costs, loss);
            const double lower = n * costs.sampling + tau * costs.time +
                                 std::max(floor_k, replacement_decision_bound(prior, loss, costs.rejection, n * tau));
            return std::pair<SliceEvaluator, double>([ev](double xi, double c) { return (*ev)(xi, c); }, lower);
        };
        best = search_sample_size(factory, g, n, tau_count, config, best, evaluations);
    }

    OptimizationResult result;
    result.report = report_for(best, g);
    if (best.n > 0) result.report = dsp_risk_type1(result.report.plan, prior, costs, loss);
    result.evaluations = evaluations;
    result.wall_seconds = clock.seconds();
    return result;
}

OptimizationResult optimize_dsp_hybrid(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                       const SearchConfig& config, HybridFormula formula) {
    config.validate();
    costs.validate();
    const Clock clock;
    const Grids g = make_grids(config);
    const double floor_k = acceptance_loss_floor(prior, loss, costs.rejection);
    const double per_item = costs.sampling - costs.salvage;
    Candidate best = no_inspection_best(prior, costs, loss);
    long long evaluations = 2;
    const auto range = tau_range(prior, costs, loss, config, best.risk, Censoring::hybrid);
    const int tau_count = grid_count(range.upper, g.tau_step);

    for (int n = 1; n <= bound_n(prior, costs, loss, best.risk, Censoring::hybrid); ++n) {
        if (n * per_item + floor_k > best.risk + kPruneSlack) break;
        SliceFactory factory;
        for (int r = 1; r <= n; ++r) factory.r_values.push_back(r);
        factory.make = [&](int r, double tau) {
            auto ev = std::make_shared<HybridRiskEvaluator>(n, r, tau, prior, costs, loss, formula);
            const auto& t = ev->terms();
            const double lower = n * per_item + t.expected_failures * costs.salvage + t.expected_duration * costs.time +
                                 std::max(floor_k, replacement_decision_bound(prior, loss, costs.rejection, n * tau));
            return std::pair<SliceEvaluator, double>([ev](double xi, double c) { return (*ev)(xi, c); }, lower);
        };
        best = search_sample_size(factory, g, n, tau_count, config, best, evaluations);
    }

    OptimizationResult result;
    result.report = report_for(best, g);
    if (best.n > 0) {
        result.report = dsp_risk_hybrid({result.report.plan, best.r}, prior, costs, loss, formula);
    }
    result.evaluations = evaluations;
    result.wall_seconds = clock.seconds();
    return result;
}

OptimizationResult optimize_lsp_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config) {
    config.validate();
    costs.validate();
    if (!loss.is_polynomial()) throw UnsupportedError("optimize_lsp_type1: closed form needs integer exponents");
    const Clock clock;
    const Grids g = make_grids(config);
    const double floor_k = acceptance_loss_floor(prior, loss, costs.rejection);
    const int n_cap = bound_n(prior, costs, loss, kInfinity);
    const LspThresholds thresholds(n_cap, prior, loss, costs.rejection);

    Candidate best;
    best.risk = lsp_risk_type1(0, 0.0, thresholds, prior, costs, loss).risk;
    long long evaluations = 1;

    for (int n = 1; n <= bound_n(prior, costs, loss, best.risk); ++n) {
        if (n * costs.sampling + floor_k > best.risk + kPruneSlack) break;
        const auto range = tau_range(prior, costs, loss, config, best.risk);
        const int tau_count = grid_count(range.upper, g.tau_step);
        std::vector<Candidate> out(static_cast<std::size_t>(std::max(tau_count, 0)));
        const Candidate incumbent = best;
        parallel_for(tau_count, config.threads, [&](int i) {
            const int t = i + 1;
            const double tau = t * g.tau_step;
            if (n * costs.sampling + tau * costs.time + floor_k > incumbent.risk + kPruneSlack) return;
            out[static_cast<std::size_t>(i)] = {lsp_risk_type1(n, tau, thresholds, prior, costs, loss).risk, n, 0, t,
                                                0, 0};
        });
        for (const auto& c : out) {
            if (std::isfinite(c.risk)) ++evaluations;
            if (better(c, best)) best = c;
        }
    }

    OptimizationResult result;
    result.report = lsp_risk_type1(best.n, best.tau_index * g.tau_step, thresholds, prior, costs, loss);
    result.evaluations = evaluations;
    result.wall_seconds = clock.seconds();
    return result;
}

OptimizationResult optimize_lam_type1(const GammaPrior& prior, const CostModel& costs, const AcceptanceLoss& loss,
                                      const SearchConfig& config) {
    SearchConfig cfg = config;
    if (!cfg.tau_max) cfg.tau_max = 2.0;
    cfg.validate();
    costs.validate();
    const Clock clock;
    const Grids g = make_grids(cfg);
    const double floor_k = acceptance_loss_floor(prior, loss, costs.rejection);
    Candidate best = no_inspection_best(prior, costs, loss);
    long long evaluations = 2;

    for (int n = 1; n <= bound_n(prior, costs, loss, best.risk); ++n) {
        if (n * costs.sampling + floor_k > best.risk + kPruneSlack) break;
        const auto range = tau_range(prior, costs, loss, cfg, best.risk);
        const int tau_count = grid_count(range.upper, g.tau_step);
        std::vector<Candidate> out(static_cast<std::size_t>(std::max(tau_count, 0)));
        const Candidate incumbent = best;
        parallel_for(tau_count, cfg.threads, [&](int i) {
            const int t = i + 1;
            const double tau = t * g.tau_step;
            if (n * costs.sampling + tau * costs.time + floor_k > incumbent.risk + kPruneSlack) return;
            const Type1RiskEvaluator ev(n, tau, prior, costs, loss, Type1RiskEvaluator::Estimator::mle);
            Candidate local;
            for (int x = 1; x <= g.xi_count; ++x) {
                const Candidate c{ev(x * g.xi_step, 0.0), n, 0, t, x, 0};
                if (better(c, local)) local = c;
            }
            out[static_cast<std::size_t>(i)] = local;
        });
        for (const auto& c : out) {
            if (std::isfinite(c.risk)) evaluations += g.xi_count;
            if (better(c, best)) best = c;
        }
    }

    OptimizationResult result;
    if (best.n == 0) {
        result.report.plan = no_inspection_plan(best);
        result.report.risk = best.risk;
    } else {
        result.report = lam_risk_type1(best.n, best.tau_index * g.tau_step, best.xi_index * g.xi_step, prior, costs,
                                       loss);
    }
    result.evaluations = evaluations;
    result.wall_seconds = clock.seconds();
    return result;
}

}  // namespace dtsp
