#pragma once

// Population-level quantities of the PVII_m(0, 1) law: expectations by
// quadrature (expected loss F_m, expected score G_m, score variance H_m,
// KL divergence) and the closed-form asymptotic constants.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pvii/distribution.hpp"
#include "pvii/likelihood.hpp"
#include "pvii/quadrature.hpp"

namespace pvii {

struct TheoryConstants {
    double m = 0.0;
    double c_m = 0.0;            // normalizing constant
    double fisher = 0.0;         // I(theta) = m(2m-1)/(m+1)
    double asym_var = 0.0;       // (m+1)/(m(2m-1))
    double bahadur_slope = 0.0;  // m(2m-1)/(2(m+1))
    double lil_const = 0.0;      // sqrt(2(m+1)/(m(2m-1)))
};

inline TheoryConstants constants(double m) {
    if (!(m > 0.5) || !std::isfinite(m))
        throw std::domain_error("constants: m must be > 1/2");
    TheoryConstants c;
    c.m = m;
    c.c_m = normalizing_constant(m);
    c.fisher = m * (2.0 * m - 1.0) / (m + 1.0);
    c.asym_var = (m + 1.0) / (m * (2.0 * m - 1.0));
    c.bahadur_slope = m * (2.0 * m - 1.0) / (2.0 * (m + 1.0));
    c.lil_const = std::sqrt(2.0 * (m + 1.0) / (m * (2.0 * m - 1.0)));
    return c;
}

// E[g(X)] for X ~ PVII_m(0, 1).
//
// The substitution x = cot(w) maps each half line to (0, pi/2] and turns the
// weight into sin(w)^(2m-2); the further power map w = z^(1/(2m-1)) absorbs
// that endpoint factor exactly, leaving
//
//     E[g] = c_m * p * int_0^Z (g(cot(z^p)) + g(-cot(z^p))) (sin(z^p)/z^p)^(2m-2) dz
//
// with p = 1/(2m-1) and Z = (pi/2)^(2m-1). The transformed integrand is
// bounded for every m > 1/2. The two half lines are paired at matching
// abscissae, so odd integrands cancel pointwise (the symmetric-limit sense
// in which E[X] = 0 holds for m <= 1). g may grow logarithmically.
template <class G>
QuadResult expect(G&& g, double m, double tol = 1e-10) {
    if (!(m > 0.5) || !std::isfinite(m))
        throw std::domain_error("expect: m must be > 1/2");

    const double cm = normalizing_constant(m);
    const double p = 1.0 / (2.0 * m - 1.0);
    const double power = 2.0 * m - 2.0;
    const double z_max = std::pow(std::numbers::pi / 2.0, 2.0 * m - 1.0);

    auto integrand = [&](double z) {
        double w = std::pow(z, p);
        if (w < std::numeric_limits<double>::min()) w = std::numeric_limits<double>::min();
        const double x = std::cos(w) / std::sin(w);
        const double ratio = std::sin(w) / w;
        return p * (g(x) + g(-x)) * std::pow(ratio, power);
    };
    const QuadResult r = integrate(integrand, 0.0, z_max, tol / cm);
    return {cm * r.value, cm * r.err_estimate};
}

// F_m(t) = E[log(1 + (X - t)^2)], the expected loss. Even in t, uniquely
// minimized at 0.
inline double expected_loss(double t, double m, double tol = 1e-10) {
    return expect([t](double x) { return loss_kernel(x, t); }, m, tol).value;
}

// G_m(t) = E[D(X, t)]; satisfies -2 G_m = F_m'.
inline double expected_score(double t, double m, double tol = 1e-10) {
    return expect([t](double x) { return score_kernel(x, t); }, m, tol).value;
}

// H_m(eps) = Var(D(X, eps)).
inline double score_variance(double eps, double m, double tol = 1e-10) {
    const double second =
        expect([eps](double x) { const double d = score_kernel(x, eps); return d * d; }, m, tol).value;
    const double first = expected_score(eps, m, tol);
    return second - first * first;
}

// KL divergence between PVII_m(theta1, 1) and PVII_m(theta2, 1), which
// reduces to m (F_m(theta1 - theta2) - F_m(0)). Integrating the difference
// kernel in one pass keeps the result accurate for small separations.
inline double kl_divergence(double theta1, double theta2, double m, double tol = 1e-10) {
    const double delta = theta1 - theta2;
    if (delta == 0.0) return 0.0;
    const double diff =
        expect([delta](double x) { return loss_kernel(x, delta) - loss_kernel(x, 0.0); }, m, tol)
            .value;
    return m * diff;
}

}  // namespace pvii
