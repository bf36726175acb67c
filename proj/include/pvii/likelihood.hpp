#pragma once

// Empirical loss, score and derivatives for the Pearson VII location
// likelihood, exhaustive enumeration of the likelihood-equation roots, and
// the global maximum likelihood estimate.
//
// The negative log-likelihood per observation (up to constants, and after
// dividing out m) is
//
//     L_n(t) = (1/n) sum_i log(1 + (x_i - t)^2),
//
// whose stationary points are the roots of the score
//
//     D_n(t) = (1/n) sum_i (x_i - t) / (1 + (x_i - t)^2).
//
// D_n may have any odd number of real roots, so the estimator enumerates
// them all and takes the loss argmin rather than trusting a single descent.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pvii/distribution.hpp"

namespace pvii {

class root_resolution_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class convergence_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Pointwise kernels. |score_kernel| <= 1/2 and |score_kernel_dt| <= 1.
inline double score_kernel(double x, double t) {
    const double d = x - t;
    return d / (1.0 + d * d);
}

inline double score_kernel_dt(double x, double t) {
    const double d = x - t;
    const double d2 = d * d;
    const double u = 1.0 + d2;
    return (d2 - 1.0) / (u * u);
}

inline double score_kernel_dtt(double x, double t) {
    const double d = x - t;
    const double u = 1.0 + d * d;
    return 2.0 * d * (d * d - 3.0) / (u * u * u);
}

// log(1 + (x-t)^2) without overflow for extreme separations.
inline double loss_kernel(double x, double t) {
    const double d = std::fabs(x - t);
    if (d > 1e150) return 2.0 * std::log(d);
    return std::log1p(d * d);
}

namespace detail {

// Fixed-shape pairwise reduction: the summation tree depends only on the
// length, never on scheduling, so results are reproducible bit for bit.
template <class F>
double pairwise_sum(std::span<const double> xs, F&& f) {
    if (xs.size() <= 64) {
        double acc = 0.0;
        for (double x : xs) acc += f(x);
        return acc;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half), f) + pairwise_sum(xs.subspan(half), f);
}

inline double pairwise_sum(std::span<const double> xs) {
    return pairwise_sum(xs, [](double x) { return x; });
}

}  // namespace detail

inline double loss(double t, const Sample& s) {
    return detail::pairwise_sum(s.values(), [t](double x) { return loss_kernel(x, t); }) /
           static_cast<double>(s.size());
}

inline double score(double t, const Sample& s) {
    return detail::pairwise_sum(s.values(), [t](double x) { return score_kernel(x, t); }) /
           static_cast<double>(s.size());
}

inline double score_slope(double t, const Sample& s) {
    return detail::pairwise_sum(s.values(), [t](double x) { return score_kernel_dt(x, t); }) /
           static_cast<double>(s.size());
}

inline double score_curvature(double t, const Sample& s) {
    return detail::pairwise_sum(s.values(), [t](double x) { return score_kernel_dtt(x, t); }) /
           static_cast<double>(s.size());
}

struct LikelihoodEval {
    double t = 0.0;
    double loss = 0.0;
    double score = 0.0;
    double score_slope = 0.0;
};

inline LikelihoodEval evaluate(double t, const Sample& s) {
    return {t, loss(t, s), score(t, s), score_slope(t, s)};
}

inline double median(const Sample& s) {
    std::vector<double> v = s.values();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RootSet {
    std::vector<double> roots;                     // ascending
    std::vector<std::array<double, 2>> brackets;   // sign-change interval per root
    bool parity_ok = false;
    double scan_step = 0.0;
};

namespace detail {

struct SortedView {
    const std::vector<double>& xs;  // ascending

    double dn(double t) const {
        return pairwise_sum(xs, [t](double x) { return score_kernel(x, t); }) /
               static_cast<double>(xs.size());
    }

    double dn_slope(double t) const {
        return pairwise_sum(xs, [t](double x) { return score_kernel_dt(x, t); }) /
               static_cast<double>(xs.size());
    }

    // Upper bound on |D_n'| over [a, b], from |d/dt D(x, t)| <= 1/(1 + d^2)
    // with d the distance from x to the interval.
    double slope_bound(double a, double b) const {
        return pairwise_sum(xs,
                            [a, b](double x) {
                                double d = 0.0;
                                if (x < a)
                                    d = a - x;
                                else if (x > b)
                                    d = x - b;
                                return 1.0 / (1.0 + d * d);
                            }) /
               static_cast<double>(xs.size());
    }
};

inline bool opposite_signs(double a, double b) {
    return (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0);
}

// Bisect a sign-change bracket down to width 1e-12 (or a few ulps for large
// abscissae), then polish with Newton steps kept inside the bracket.
inline double refine_root(const SortedView& view, double a, double b, double va, double vb) {
    if (va == 0.0) return a;
    if (vb == 0.0) return b;
    double lo = a, hi = b, vlo = va;
    while (true) {
        const double span = hi - lo;
        const double ulp_floor =
            4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::fabs(lo), std::fabs(hi)});
        if (span <= std::max(1e-12, ulp_floor)) break;
        const double mid = 0.5 * (lo + hi);
        const double vm = view.dn(mid);
        if (vm == 0.0) return mid;
        if (opposite_signs(vlo, vm)) {
            hi = mid;
        } else {
            lo = mid;
            vlo = vm;
        }
    }

    double root = 0.5 * (lo + hi);
    double best = std::fabs(view.dn(root));
    for (int i = 0; i < 3 && best > 0.0; ++i) {
        const double slope = view.dn_slope(root);
        if (slope == 0.0 || !std::isfinite(slope)) break;
        const double candidate = root - view.dn(root) / slope;
        if (!(candidate >= a && candidate <= b)) break;
        const double v = std::fabs(view.dn(candidate));
        if (v < best) {
            root = candidate;
            best = v;
        } else {
            break;
        }
    }
    return root;
}

struct ScanOutcome {
    std::vector<double> roots;
    std::vector<std::array<double, 2>> brackets;
    bool endpoints_ok = false;
};

// One scan pass at fine step h. Regions where |D_n| is provably bounded away
// from zero (via the interval slope bound) are skipped in large strides;
// everywhere else the scan advances by h and brackets every sign change.
// Fine panels whose endpoint values dip close to zero without crossing are
// sub-scanned to catch root pairs closer than h.
//
// Sign changes are detected against the last point with a nonzero value, so
// an evaluation that lands exactly on 0.0 brackets one crossing when its
// flanks disagree in sign and none when they agree (a tangency below
// resolution counts as an unresolved pair, keeping the parity consistent).
inline ScanOutcome scan_roots(const SortedView& view, double lo, double hi, double h,
                              std::size_t step_budget) {
    ScanOutcome out;
    double a = lo;
    double va = view.dn(a);
    const double vhi = view.dn(hi);
    out.endpoints_ok = va > 0.0 && vhi < 0.0;

    double mark = a, vmark = va;  // last evaluation with a definite sign
    auto feed = [&](double pt, double v) {
        if (v == 0.0) return;
        if (opposite_signs(vmark, v)) {
            out.roots.push_back(refine_root(view, mark, pt, vmark, v));
            out.brackets.push_back({mark, pt});
        }
        mark = pt;
        vmark = v;
    };

    std::size_t steps = 0;
    while (a < hi) {
        if (++steps > step_budget)
            throw root_resolution_error("find_roots: scan budget exhausted");

        // The working step can never drop below a few ulps of the current
        // abscissa, or the scan would stop advancing near huge outliers.
        const double fine_h =
            std::max(h, 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(a));

        // Try to certify a root-free stride: no zero of D_n can lie within
        // |D_n(a)| / sup|D_n'| of a. The comparison is scale-free, which
        // matters in far-outlier gaps where value and slope are both tiny.
        const double abs_va = std::fabs(va);
        if (va != 0.0) {
            double proposal = 0.9 * abs_va / view.slope_bound(a, a);
            if (!std::isfinite(proposal)) proposal = hi - a;
            double stride = std::min(hi - a, std::max(fine_h, proposal));
            bool skipped = false;
            while (stride > fine_h * 1.000001) {
                const double bound = view.slope_bound(a, a + stride);
                if (abs_va > stride * bound) {
                    a += stride;
                    va = view.dn(a);
                    feed(a, va);
                    skipped = true;
                    break;
                }
                stride = std::max(fine_h, 0.5 * stride);
            }
            if (skipped) continue;
        }

        const double b = std::min(a + fine_h, hi);
        const double vb = view.dn(b);
        const double step = b - a;
        const bool suspicious = std::min(std::fabs(va), std::fabs(vb)) <
                                0.5 * step * view.slope_bound(a, b);
        if (suspicious) {
            // The panel may hide more crossings than its endpoint signs
            // reveal; resolve it at step/64.
            const double sub = step / 64.0;
            for (int j = 1; j < 64; ++j) {
                const double d = a + j * sub;
                feed(d, view.dn(d));
            }
        }
        feed(b, vb);
        a = b;
        va = vb;
    }
    return out;
}

}  // namespace detail

// All real roots of D_n(t) = 0. Scans [min x - 1, max x + 1]; the scan step
// is halved (up to 8 times) whenever the root count comes back even or the
// endpoint signs are wrong.
inline RootSet find_roots(const Sample& s, double h0 = 0.05) {
    if (s.size() == 1) {
        const double x = s.values().front();
        RootSet rs;
        rs.roots = {x};
        rs.brackets = {{x, x}};
        rs.parity_ok = true;
        rs.scan_step = 0.0;
        return rs;
    }

    std::vector<double> sorted = s.values();
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        // All observations coincide; every kernel vanishes exactly there.
        const double x = sorted.front();
        RootSet rs;
        rs.roots = {x};
        rs.brackets = {{x, x}};
        rs.parity_ok = true;
        rs.scan_step = 0.0;
        return rs;
    }
    const detail::SortedView view{sorted};
    const double lo = sorted.front() - 1.0;
    const double hi = sorted.back() + 1.0;
    constexpr std::size_t step_budget = 2000000;

    double h = h0;
    for (int attempt = 0; attempt <= 8; ++attempt, h *= 0.5) {
        const auto outcome = detail::scan_roots(view, lo, hi, h, step_budget);
        if (!outcome.endpoints_ok || outcome.roots.size() % 2 == 0) continue;
        RootSet rs;
        rs.roots = outcome.roots;
        rs.brackets = outcome.brackets;
        rs.parity_ok = true;
        rs.scan_step = h;
        return rs;
    }
    throw root_resolution_error(
        "find_roots: root parity still wrong at the finest scan step (near-tangent roots?)");
}

enum class MleMethod { global, local_from_median };

struct MleResult {
    double estimate = 0.0;
    RootSet roots;
    std::vector<double> losses;  // loss at each root
    bool tie = false;
    MleMethod method = MleMethod::global;
};

namespace detail {

inline MleResult mle_global(const Sample& s) {
    MleResult res;
    res.method = MleMethod::global;
    res.roots = find_roots(s);
    res.losses.reserve(res.roots.roots.size());
    for (double r : res.roots.roots) res.losses.push_back(loss(r, s));

    const double min_loss = *std::min_element(res.losses.begin(), res.losses.end());
    // Roots within 1e-10 of the minimum are reported as a tie; the estimate
    // itself is chosen only among roots within 1e-12, so it always attains
    // the minimum loss to that tolerance regardless of how the tie resolves.
    constexpr double tie_tol = 1e-10;
    constexpr double select_tol = 1e-12;
    std::size_t near_min = 0;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < res.losses.size(); ++i) {
        if (res.losses[i] - min_loss <= tie_tol) ++near_min;
        if (res.losses[i] - min_loss <= select_tol) candidates.push_back(i);
    }
    res.tie = near_min >= 2;

    // Tie-break: nearest to the sample median, then the smaller root. The
    // proximity comparison carries a tolerance so that symmetric samples
    // resolve by value rather than by rounding noise.
    const double med = median(s);
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i : candidates)
        best_dist = std::min(best_dist, std::fabs(res.roots.roots[i] - med));
    double chosen = std::numeric_limits<double>::infinity();
    for (std::size_t i : candidates) {
        const double r = res.roots.roots[i];
        if (std::fabs(r - med) <= best_dist + 1e-9) chosen = std::min(chosen, r);
    }
    res.estimate = chosen;
    return res;
}

inline MleResult mle_local_from_median(const Sample& s) {
    const auto& xs = s.values();
    const double x_lo = *std::min_element(xs.begin(), xs.end());
    const double x_hi = *std::max_element(xs.begin(), xs.end());

    double t = median(s);
    bool converged = s.size() == 1;
    for (int iter = 0; iter < 100 && !converged; ++iter) {
        const double g = score(t, s);
        if (std::fabs(g) < 1e-15) {
            converged = true;
            break;
        }
        const double slope = score_slope(t, s);
        // D_n > 0 means the loss decreases to the right; fall back to a
        // fixed-length move when the local slope is unusable.
        double step = (slope < -1e-14) ? -g / slope : (g > 0.0 ? 0.5 : -0.5);
        double next = std::clamp(t + step, x_lo, x_hi);
        int halvings = 0;
        while (halvings < 40 && std::fabs(score(next, s)) > std::fabs(g)) {
            step *= 0.5;
            next = std::clamp(t + step, x_lo, x_hi);
            ++halvings;
        }
        const double moved = std::fabs(next - t);
        t = next;
        if (moved <= 1e-13 * (1.0 + std::fabs(t))) converged = true;
    }
    if (!converged)
        throw convergence_error("mle: Newton iteration from the median did not converge");

    MleResult res;
    res.method = MleMethod::local_from_median;
    res.estimate = t;

    // Record the convergence target as a root, with a probed sign-change
    // bracket when one exists nearby.
    RootSet rs;
    rs.roots = {t};
    rs.parity_ok = true;
    rs.scan_step = 0.0;
    double w = 1e-9 * (1.0 + std::fabs(t));
    std::array<double, 2> bracket = {t, t};
    for (int i = 0; i < 24; ++i, w *= 4.0) {
        if (score(t - w, s) > 0.0 && score(t + w, s) < 0.0) {
            bracket = {t - w, t + w};
            break;
        }
        if (w > 1e-3) break;
    }
    rs.brackets = {bracket};
    res.roots = std::move(rs);
    res.losses = {loss(t, s)};
    res.tie = false;
    return res;
}

}  // namespace detail

inline MleResult mle(const Sample& s, MleMethod method = MleMethod::global) {
    if (s.size() == 1) {
        MleResult res;
        res.method = method;
        res.estimate = s.values().front();
        res.roots = find_roots(s);
        res.losses = {0.0};
        res.tie = false;
        return res;
    }
    return method == MleMethod::global ? detail::mle_global(s)
                                       : detail::mle_local_from_median(s);
}

}  // namespace pvii
