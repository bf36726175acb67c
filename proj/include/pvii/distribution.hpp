#pragma once

// Pearson Type VII distribution machinery: density, CDF, quantile and exact
// sampling for PVII_m(mu, sigma), the law with density
//
//     f(x) = c_m / sigma * (1 + ((x - mu)/sigma)^2)^(-m),   m > 1/2.
//
// m = 1 is the Cauchy distribution. The CDF, quantile and sampler all go
// through the Student-t reduction: with nu = 2m - 1, if T ~ t_nu then
// mu + sigma * T / sqrt(nu) ~ PVII_m(mu, sigma).

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pvii/rng.hpp"
#include "pvii/special_functions.hpp"

namespace pvii {

struct Params {
    double m;
    double mu;
    double sigma;

    explicit Params(double shape, double location = 0.0, double scale = 1.0)
        : m(shape), mu(location), sigma(scale) {
        if (!(m > 0.5) || !std::isfinite(m))
            throw std::domain_error("Params: shape m must be finite and > 1/2");
        if (!std::isfinite(mu))
            throw std::domain_error("Params: location must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::domain_error("Params: scale must be finite and > 0");
    }

    double dof() const { return 2.0 * m - 1.0; }
};

class Sample {
  public:
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty())
            throw std::domain_error("Sample: at least one observation required");
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::domain_error("Sample: observations must be finite");
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

  private:
    std::vector<double> values_;
};

// c_m = Gamma(m) / (sqrt(pi) Gamma(m - 1/2)), the reciprocal of
// integral (1 + x^2)^(-m) dx.
inline double normalizing_constant(double m) {
    if (!(m > 0.5) || !std::isfinite(m))
        throw std::domain_error("normalizing_constant: m must be > 1/2");
    return std::exp(log_gamma(m) - log_gamma(m - 0.5) - 0.5 * std::log(std::numbers::pi));
}

inline double log_density(double x, const Params& p) {
    const double z = (x - p.mu) / p.sigma;
    return std::log(normalizing_constant(p.m)) - std::log(p.sigma) - p.m * std::log1p(z * z);
}

inline double density(double x, const Params& p) { return std::exp(log_density(x, p)); }

namespace detail {

// P(T <= t) for T ~ Student-t with dof degrees of freedom. The two incomplete
// beta branches mirror the usual cancellation-avoiding split.
inline double student_t_cdf(double t, double dof) {
    if (t == 0.0) return 0.5;
    const double t2 = t * t;
    double tail;  // P(T > |t|)
    if (dof > 2.0 * t2) {
        const double z = t2 / (dof + t2);
        tail = 0.5 * (1.0 - reg_incomplete_beta(0.5, 0.5 * dof, z));
    } else {
        const double z = dof / (dof + t2);
        tail = 0.5 * reg_incomplete_beta(0.5 * dof, 0.5, z);
    }
    return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace detail

inline double cdf(double x, const Params& p) {
    const double nu = p.dof();
    const double t = std::sqrt(nu) * (x - p.mu) / p.sigma;
    return detail::student_t_cdf(t, nu);
}

// Inverse CDF by bisection. The initial bracket is the Cauchy quantile
// widened by sqrt(nu); it is expanded geometrically when the tails are
// heavier than Cauchy (m < 1).
inline double quantile(double q, const Params& p) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("quantile: q must lie in (0, 1)");
    if (q == 0.5) return p.mu;

    const double nu = p.dof();
    constexpr double pi = std::numbers::pi;
    const double cauchy = std::tan(pi * (q - 0.5));
    double width = std::fabs(cauchy) * std::max(1.0, std::sqrt(nu)) * p.sigma;
    if (width == 0.0 || !std::isfinite(width)) width = p.sigma;

    const bool upper = q > 0.5;
    double lo = p.mu, hi = p.mu;
    if (upper)
        hi = p.mu + width;
    else
        lo = p.mu - width;
    for (int i = 0; i < 200; ++i) {
        if (upper && cdf(hi, p) >= q) break;
        if (!upper && cdf(lo, p) <= q) break;
        width *= 2.0;
        if (upper)
            hi = p.mu + width;
        else
            lo = p.mu - width;
    }

    while (true) {
        const double span = hi - lo;
        const double ulp_floor =
            4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::fabs(lo), std::fabs(hi)});
        if (span <= std::max(1e-12, ulp_floor)) break;
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid, p) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// One standard PVII_m(0, 1) deviate: Z / sqrt(V) with Z standard normal and
// V ~ chi-square(2m - 1).
inline double standard_deviate(double m, Rng& rng) {
    const double nu = 2.0 * m - 1.0;
    for (;;) {
        const double z = rng.normal();
        const double v = rng.chi_square(nu);
        if (v > 0.0) {
            const double x = z / std::sqrt(v);
            if (std::isfinite(x)) return x;
        }
    }
}

// i.i.d. draws; standard deviates are transformed by x -> mu + sigma * x, so
// a fixed seed yields location-scale equivariant output by construction.
inline Sample sample(std::size_t count, const Params& p, Rng& rng) {
    if (count == 0) throw std::domain_error("sample: count must be positive");
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(p.mu + p.sigma * standard_deviate(p.m, rng));
    return Sample(std::move(out));
}

}  // namespace pvii
