#pragma once

// Seeded Monte Carlo runners for the asymptotic claims: the variance table,
// the CLT for sqrt(n) theta_hat, the likelihood-equation root census, the
// moderate-deviation log-rates, and a law-of-the-iterated-logarithm trace.
//
// Reproducibility contract: every replicate draws from an RNG stream that is
// a pure function of (master seed, row, replicate index), per-replicate
// results land in a slot indexed by replicate, and reductions run over those
// slots in a fixed pairwise tree. Outputs are therefore identical for any
// worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pvii/distribution.hpp"
#include "pvii/likelihood.hpp"
#include "pvii/theory.hpp"

namespace pvii {

class simulation_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class insufficient_hits_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    double m = 1.0;
    std::vector<std::size_t> n_values;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0 = hardware concurrency
    double eps = 1.0;
    double lambda_exponent = 0.25;  // lambda_n = n^a, 0 < a < 1/2
    double true_location = 0.0;
};

struct VarianceRow {
    double m = 0.0;
    std::size_t n = 0;
    double estimate = 0.0;  // Monte Carlo mean of n * theta_hat^2
    double mc_se = 0.0;
    std::size_t reps_used = 0;
    std::size_t errors = 0;
    bool unstable = false;
};

struct CltSummary {
    std::size_t n = 0;
    std::size_t reps_used = 0;
    std::size_t errors = 0;
    double mean_scaled = 0.0;
    double empirical_var_of_scaled = 0.0;
    double ks_distance = 0.0;
};

struct RootCensus {
    std::map<std::size_t, std::uint64_t> counts;  // root count -> frequency
    std::size_t reps = 0;
    std::size_t errors = 0;
    double fitted_intensity = 0.0;  // Poisson MLE over counts = 2k + 1
};

struct DeviationPoint {
    std::size_t n = 0;
    double lambda = 0.0;
    double threshold = 0.0;  // eps / lambda_n
    std::uint64_t hits = 0;
    std::size_t reps_used = 0;
    std::size_t errors = 0;
    double empirical_rate = 0.0;
    double theory_rate = 0.0;
};

struct LilPoint {
    std::size_t n = 0;
    double statistic = 0.0;  // sqrt(n / log log n) * theta_hat_n
};

struct LilTrace {
    std::vector<LilPoint> points;
    double sup_statistic = 0.0;
};

namespace detail {

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Run fn(i) for i in [0, count). Work distribution is dynamic, but fn must
// write only to slot i, so scheduling cannot affect results.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        constexpr std::size_t block = 32;
        for (;;) {
            const std::size_t begin = cursor.fetch_add(block);
            if (begin >= count) return;
            const std::size_t end = std::min(begin + block, count);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline double pairwise_mean(std::span<const double> xs) {
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

inline double pairwise_variance(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    const double ss = pairwise_sum(xs, [mean](double x) {
        const double d = x - mean;
        return d * d;
    });
    return ss / static_cast<double>(xs.size() - 1);
}

// Linear-interpolated quantile of a sorted vector.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct ReplicateBatch {
    std::vector<double> estimates;   // theta_hat - true location, valid entries only
    std::vector<std::size_t> roots;  // root count per valid replicate
    std::size_t errors = 0;
};

// Shared replicate loop: sample, estimate, collect. Erroring replicates are
// counted and excluded; more than 0.01% of them fails the run.
inline ReplicateBatch run_replicates(const ExperimentConfig& cfg, std::size_t n,
                                     std::uint64_t row_key) {
    if (cfg.reps < 1) throw std::domain_error("experiments: reps must be >= 1");
    if (n < 1) throw std::domain_error("experiments: sample sizes must be >= 1");

    const Params params(cfg.m, cfg.true_location, 1.0);
    std::vector<double> est(cfg.reps, 0.0);
    std::vector<std::size_t> roots(cfg.reps, 0);
    std::vector<std::uint8_t> failed(cfg.reps, 0);

    parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.seed, row_key, i);
        const Sample s = sample(n, params, rng);
        try {
            const MleResult res = mle(s, MleMethod::global);
            est[i] = res.estimate - cfg.true_location;
            roots[i] = res.roots.roots.size();
        } catch (const root_resolution_error&) {
            failed[i] = 1;
        } catch (const convergence_error&) {
            failed[i] = 1;
        }
    });

    ReplicateBatch batch;
    batch.estimates.reserve(cfg.reps);
    batch.roots.reserve(cfg.reps);
    for (std::size_t i = 0; i < cfg.reps; ++i) {
        if (failed[i]) {
            ++batch.errors;
            continue;
        }
        batch.estimates.push_back(est[i]);
        batch.roots.push_back(roots[i]);
    }
    if (static_cast<double>(batch.errors) > 1e-4 * static_cast<double>(cfg.reps))
        throw simulation_error("experiments: more than 0.01% of replicates failed");
    return batch;
}

}  // namespace detail

// Heavy-tail guard: flag a row whose replicate distribution has mass far
// outside its own interquartile range. Finite moments of theta_hat are
// guaranteed only from some sample size onward (with no usable bound on
// that size), so small (m, n) cells are reported as unstable, not trusted.
inline constexpr double kUnstableTailFraction = 2e-3;

inline double replicate_tail_fraction(std::span<const double> estimates) {
    std::vector<double> sorted(estimates.begin(), estimates.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr =
        detail::sorted_quantile(sorted, 0.75) - detail::sorted_quantile(sorted, 0.25);
    if (!(iqr > 0.0)) return 0.0;
    std::size_t far = 0;
    for (double e : sorted)
        if (std::fabs(e) > 10.0 * iqr) ++far;
    return static_cast<double>(far) / static_cast<double>(sorted.size());
}

// Variance-table runner: Monte Carlo mean of n * theta_hat^2 for each n.
inline std::vector<VarianceRow> run_variance_table(const ExperimentConfig& cfg) {
    if (cfg.n_values.empty())
        throw std::domain_error("run_variance_table: at least one n required");
    std::vector<VarianceRow> rows;
    rows.reserve(cfg.n_values.size());
    for (std::size_t row = 0; row < cfg.n_values.size(); ++row) {
        const std::size_t n = cfg.n_values[row];
        const auto batch = detail::run_replicates(cfg, n, row);

        std::vector<double> scaled(batch.estimates.size());
        for (std::size_t i = 0; i < scaled.size(); ++i)
            scaled[i] = static_cast<double>(n) * batch.estimates[i] * batch.estimates[i];

        VarianceRow out;
        out.m = cfg.m;
        out.n = n;
        out.reps_used = scaled.size();
        out.errors = batch.errors;
        out.estimate = detail::pairwise_mean(scaled);
        out.mc_se = std::sqrt(detail::pairwise_variance(scaled, out.estimate) /
                              static_cast<double>(scaled.size()));
        out.unstable = replicate_tail_fraction(batch.estimates) > kUnstableTailFraction;
        rows.push_back(out);
    }
    return rows;
}

// Distribution of sqrt(n) * theta_hat against N(0, (m+1)/(m(2m-1))).
inline CltSummary run_clt(const ExperimentConfig& cfg) {
    if (cfg.n_values.size() != 1)
        throw std::domain_error("run_clt: exactly one n required");
    const std::size_t n = cfg.n_values.front();
    const auto batch = detail::run_replicates(cfg, n, 0);

    std::vector<double> scaled(batch.estimates.size());
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = sqrt_n * batch.estimates[i];

    CltSummary out;
    out.n = n;
    out.reps_used = scaled.size();
    out.errors = batch.errors;
    out.mean_scaled = detail::pairwise_mean(scaled);
    out.empirical_var_of_scaled = detail::pairwise_variance(scaled, out.mean_scaled);

    const double sigma = std::sqrt(constants(cfg.m).asym_var);
    std::vector<double> sorted = scaled;
    std::sort(sorted.begin(), sorted.end());
    const double k = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = detail::normal_cdf(sorted[i] / sigma);
        d = std::max(d, std::max(f - static_cast<double>(i) / k,
                                 static_cast<double>(i + 1) / k - f));
    }
    out.ks_distance = d;
    return out;
}

// Tally of likelihood-equation root counts, with the Poisson intensity
// fitted by maximum likelihood over counts = 2k + 1. The limiting intensity
// is conjectured to equal c_m; the census reports it, never asserts it.
inline RootCensus run_root_census(const ExperimentConfig& cfg) {
    if (cfg.n_values.size() != 1)
        throw std::domain_error("run_root_census: exactly one n required");
    const auto batch = detail::run_replicates(cfg, cfg.n_values.front(), 0);

    RootCensus out;
    out.reps = batch.roots.size();
    out.errors = batch.errors;
    double k_sum = 0.0;
    for (std::size_t count : batch.roots) {
        ++out.counts[count];
        k_sum += 0.5 * static_cast<double>(count - 1);
    }
    out.fitted_intensity = k_sum / static_cast<double>(batch.roots.size());
    return out;
}

// Moderate-deviation rates: empirical log P(|theta_hat| > eps / lambda_n)
// normalized by n / lambda_n^2, against -bahadur_slope * eps^2.
inline std::vector<DeviationPoint> run_deviation(const ExperimentConfig& cfg) {
    if (cfg.n_values.empty())
        throw std::domain_error("run_deviation: at least one n required");
    if (!(cfg.lambda_exponent > 0.0) || !(cfg.lambda_exponent < 0.5))
        throw std::domain_error("run_deviation: lambda exponent must lie in (0, 1/2)");
    if (!(cfg.eps > 0.0)) throw std::domain_error("run_deviation: eps must be positive");

    const double slope = constants(cfg.m).bahadur_slope;
    const double theory_rate = -slope * cfg.eps * cfg.eps;

    // Precondition: at the largest n the theory rate must predict at least
    // ~50 hits, otherwise the rate estimate would be meaningless noise.
    const std::size_t n_max = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    const double lam_max = std::pow(static_cast<double>(n_max), cfg.lambda_exponent);
    const double predicted =
        static_cast<double>(cfg.reps) *
        std::exp(theory_rate * static_cast<double>(n_max) / (lam_max * lam_max));
    if (predicted < 50.0)
        throw insufficient_hits_error(
            "run_deviation: configuration predicts fewer than 50 tail hits at the largest n");

    std::vector<DeviationPoint> out;
    out.reserve(cfg.n_values.size());
    for (std::size_t row = 0; row < cfg.n_values.size(); ++row) {
        const std::size_t n = cfg.n_values[row];
        const auto batch = detail::run_replicates(cfg, n, row);

        DeviationPoint pt;
        pt.n = n;
        pt.lambda = std::pow(static_cast<double>(n), cfg.lambda_exponent);
        pt.threshold = cfg.eps / pt.lambda;
        pt.reps_used = batch.estimates.size();
        pt.errors = batch.errors;
        for (double e : batch.estimates)
            if (std::fabs(e) > pt.threshold) ++pt.hits;
        if (pt.hits < 10)
            throw insufficient_hits_error("run_deviation: fewer than 10 tail hits observed");
        const double p_hat =
            static_cast<double>(pt.hits) / static_cast<double>(pt.reps_used);
        pt.empirical_rate =
            std::log(p_hat) / (static_cast<double>(n) / (pt.lambda * pt.lambda));
        pt.theory_rate = theory_rate;
        out.push_back(pt);
    }
    return out;
}

// One growing trajectory; records sqrt(n / log log n) * theta_hat_n at the
// geometric checkpoints n = ceil(100 * 1.5^j). A diagnostic, not a limit
// claim: log log n is still tiny at any desk-scale n.
inline LilTrace run_lil_trace(const ExperimentConfig& cfg) {
    if (cfg.n_values.size() != 1)
        throw std::domain_error("run_lil_trace: exactly one n (the trajectory length) required");
    const std::size_t n_final = cfg.n_values.front();
    if (n_final < 100)
        throw std::domain_error("run_lil_trace: trajectory must reach at least n = 100");

    std::vector<std::size_t> checkpoints;
    for (double c = 100.0; c <= static_cast<double>(n_final); c *= 1.5) {
        const auto n = static_cast<std::size_t>(std::ceil(c));
        if (checkpoints.empty() || n > checkpoints.back()) checkpoints.push_back(n);
    }

    const Params params(cfg.m, cfg.true_location, 1.0);
    Rng rng = Rng::stream(cfg.seed, 0, 0);
    std::vector<double> draws;
    draws.reserve(n_final);

    LilTrace trace;
    trace.sup_statistic = -std::numeric_limits<double>::infinity();
    for (std::size_t n : checkpoints) {
        while (draws.size() < n) draws.push_back(params.mu + standard_deviate(cfg.m, rng));
        const MleResult res = mle(Sample(draws), MleMethod::global);
        const double centered = res.estimate - cfg.true_location;
        const double norm =
            std::sqrt(static_cast<double>(n) / std::log(std::log(static_cast<double>(n))));
        const double stat = norm * centered;
        trace.points.push_back({n, stat});
        trace.sup_statistic = std::max(trace.sup_statistic, stat);
    }
    return trace;
}

}  // namespace pvii
