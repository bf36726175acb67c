#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "pvii/quadrature.hpp"
#include "pvii/theory.hpp"

using namespace pvii;

namespace {
const std::vector<double> m_grid{0.6, 0.8, 1.0, 1.2, 1.5, 3.0};
}

TEST_CASE("closed-form constants") {
    const auto c1 = constants(1.0);
    CHECK(c1.fisher == Approx(0.5).epsilon(1e-15));
    CHECK(c1.asym_var == Approx(2.0).epsilon(1e-15));
    CHECK(c1.bahadur_slope == Approx(0.25).epsilon(1e-15));

    CHECK(constants(0.6).asym_var == Approx(13.333333333333334).epsilon(1e-12));
    CHECK(constants(1.5).asym_var == Approx(5.0 / 6.0).epsilon(1e-14));

    for (double m : m_grid) {
        const auto c = constants(m);
        CHECK(c.fisher * c.asym_var == Approx(1.0).epsilon(1e-14));
        CHECK(c.bahadur_slope == Approx(0.5 * c.fisher).epsilon(1e-14));
        CHECK(c.lil_const * c.lil_const == Approx(2.0 * c.asym_var).epsilon(1e-14));
    }
    CHECK_THROWS_AS(constants(0.5), std::domain_error);
}

TEST_CASE("expect handles basic integrands") {
    for (double m : m_grid) {
        const auto one = expect([](double) { return 1.0; }, m, 1e-10);
        CHECK(one.value == Approx(1.0).margin(1e-9));
        CHECK(one.err_estimate <= 1e-10);

        // E[X] = 0 in the symmetric-limit sense, even where the mean does
        // not exist absolutely (m <= 1).
        const auto odd = expect([](double x) { return x; }, m, 1e-10);
        CHECK(odd.value == Approx(0.0).margin(1e-9));
        const auto odd2 = expect([](double x) { return x / (1.0 + x * x * x * x); }, m, 1e-10);
        CHECK(odd2.value == Approx(0.0).margin(1e-9));
    }
    const auto second = expect([](double x) { const double d = score_kernel(x, 0.0); return d * d; },
                               1.0, 1e-11);
    CHECK(second.value == Approx(1.0 / 8.0).margin(1e-10));
}

TEST_CASE("fisher information identity across the shape grid") {
    // I(theta) = 4 m^2 E[D(X,0)^2] = m(2m-1)/(m+1).
    for (double m : m_grid) {
        const auto ed2 =
            expect([](double x) { const double d = score_kernel(x, 0.0); return d * d; }, m, 1e-11);
        CHECK(4.0 * m * m * ed2.value == Approx(constants(m).fisher).margin(1e-8));
    }
}

TEST_CASE("mean of the score derivative") {
    // E[d/dt D(X,0)] = -(2m-1)/(2(m+1)).
    for (double m : m_grid) {
        const auto v = expect([](double x) { return score_kernel_dt(x, 0.0); }, m, 1e-11);
        CHECK(v.value == Approx(-(2.0 * m - 1.0) / (2.0 * (m + 1.0))).margin(1e-8));
    }
}

TEST_CASE("expected loss") {
    // For the Cauchy case the expected loss has the closed form log(t^2 + 4).
    for (double t : {0.0, 0.5, 1.0, 3.0, 10.0})
        CHECK(expected_loss(t, 1.0) == Approx(std::log(t * t + 4.0)).margin(1e-9));
    CHECK(expected_loss(0.0, 1.0) == Approx(2.0 * std::log(2.0)).margin(1e-9));

    for (double m : {0.6, 1.0, 1.5}) {
        for (double t : {0.5, 1.0, 3.0})
            CHECK(expected_loss(-t, m) == Approx(expected_loss(t, m)).margin(1e-9));
        double prev = expected_loss(0.0, m);
        for (double t : {0.25, 0.5, 1.0, 2.0, 4.0, 10.0}) {
            const double cur = expected_loss(t, m);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("expected loss approaches log(1 + t^2) in the tails") {
    // The gap decays like t^(1-2m) (times a log), so it closes slowly for
    // m near 1/2; only the decrease itself is asserted across shapes.
    for (double m : {0.6, 1.0, 1.5}) {
        double prev = INFINITY;
        for (double t : {1e2, 1e3, 1e4}) {
            const double gap = std::fabs(expected_loss(t, m) - std::log1p(t * t));
            CHECK(gap < prev);
            prev = gap;
        }
        if (m >= 1.0) CHECK(prev < 1e-2);
    }
}

TEST_CASE("expected score") {
    CHECK(expected_score(0.0, 1.0) == Approx(0.0).margin(1e-10));
    for (double m : {0.7, 1.0, 2.0}) {
        CHECK(expected_score(0.0, m) == Approx(0.0).margin(1e-10));
        for (double t : {0.3, 1.0, 2.0}) {
            CHECK(expected_score(-t, m) == Approx(-expected_score(t, m)).margin(1e-9));
            CHECK(expected_score(t, m) < 0.0);
        }
        // Central slope: -(2m-1)/(2(m+1)).
        const double h = 1e-4;
        const double slope = (expected_score(h, m, 1e-12) - expected_score(-h, m, 1e-12)) / (2.0 * h);
        CHECK(slope == Approx(-(2.0 * m - 1.0) / (2.0 * (m + 1.0))).margin(1e-6));
    }
    // Cauchy closed form G_1(t) = -t/(t^2+4).
    for (double t : {0.5, 1.0, 2.0})
        CHECK(expected_score(t, 1.0) == Approx(-t / (t * t + 4.0)).margin(1e-9));
}

TEST_CASE("expected score is minus half the loss derivative") {
    const double h = 1e-4;
    for (double m : {0.8, 1.0, 1.5}) {
        for (double t : {0.5, 1.0, 2.0}) {
            const double fd =
                (expected_loss(t + h, m, 1e-12) - expected_loss(t - h, m, 1e-12)) / (2.0 * h);
            CHECK(fd == Approx(-2.0 * expected_score(t, m, 1e-12)).margin(1e-5));
        }
    }
}

TEST_CASE("score variance") {
    CHECK(score_variance(0.0, 1.0) == Approx(1.0 / 8.0).margin(1e-9));
    CHECK(score_variance(0.0, 1.5) == Approx(2.0 / 15.0).margin(1e-9));
    for (double m : m_grid)
        CHECK(score_variance(0.0, m) ==
              Approx((2.0 * m - 1.0) / (4.0 * m * (m + 1.0))).margin(1e-9));

    // H_m(eps) - H_m(0) = O(eps): the ratio stays bounded as eps shrinks.
    const double h0 = score_variance(0.0, 1.0, 1e-12);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const double ratio = std::fabs(score_variance(eps, 1.0, 1e-12) - h0) / eps;
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("kl divergence") {
    CHECK(kl_divergence(0.7, 0.7, 1.0) == 0.0);
    for (double m : {0.8, 1.0, 1.6}) {
        CHECK(kl_divergence(1.3, 0.3, m) == Approx(kl_divergence(-0.2, -1.2, m)).margin(1e-9));
        CHECK(kl_divergence(1.0, 0.0, m) == Approx(kl_divergence(0.0, 1.0, m)).margin(1e-9));
        CHECK(kl_divergence(0.5, 0.0, m) > 0.0);
    }
    // Cauchy closed form: m (F(1) - F(0)) = log(5/4).
    CHECK(kl_divergence(1.0, 0.0, 1.0) == Approx(std::log(1.25)).margin(1e-9));

    // Direct integral oracle for m = 1.3: int f_t1 log(f_t1 / f_t2).
    const double m = 1.3, t1 = 0.4, t2 = -0.6;
    const Params p1(m, t1);
    auto integrand = [&](double x) {
        const double a = 1.0 + (x - t1) * (x - t1);
        const double b = 1.0 + (x - t2) * (x - t2);
        return density(x, p1) * m * (std::log(b) - std::log(a));
    };
    double direct = 0.0;
    const double cuts[] = {-1e7, -1e5, -1e3, -20.0, 20.0, 1e3, 1e5, 1e7};
    for (int i = 0; i + 1 < 8; ++i)
        direct += integrate(integrand, cuts[i], cuts[i + 1], 1e-11).value;
    CHECK(kl_divergence(t1, t2, m) == Approx(direct).margin(1e-7));
}

TEST_CASE("kl curvature matches the bahadur slope") {
    // m (F_m(eps) - F_m(0)) / eps^2 -> m(2m-1)/(2(m+1)) as eps -> 0.
    const double eps = 1e-3;
    for (double m : {0.8, 1.0, 1.5}) {
        const double ratio = kl_divergence(eps, 0.0, m, 1e-13) / (eps * eps);
        CHECK(ratio == Approx(constants(m).bahadur_slope).epsilon(1e-3));
    }
}
