#pragma once

// Adaptive Gauss-Kronrod quadrature on a finite interval. The worst panel
// (by error estimate) is bisected until the summed estimate meets the
// requested tolerance. Panels are never split past depth 60.

#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pvii {

struct QuadResult {
    double value = 0.0;
    double err_estimate = 0.0;
};

class quadrature_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
inline constexpr double gk_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
std::pair<double, double> gk15_panel(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(mid);
    double resk = gk_wk[7] * fc;
    double resg = gk_wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * gk_nodes[j];
        const double fsum = f(mid - dx) + f(mid + dx);
        resk += gk_wk[j] * fsum;
        if (j % 2 == 1) resg += gk_wg[j / 2] * fsum;
    }
    resk *= half;
    resg *= half;

    // QUADPACK-style sharpening of the raw Kronrod-Gauss difference.
    double err = std::fabs(resk - resg);
    const double scaled = 200.0 * err;
    if (scaled < 1.0) err = scaled * std::sqrt(scaled);
    return {resk, err};
}

}  // namespace detail

// Integrate f over [a, b] to absolute tolerance tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol, int max_depth = 60) {
    struct Panel {
        double a, b, value, err;
        int depth;
        bool alive;
    };
    std::vector<Panel> panels;
    // Worst-error-first refinement; ties broken by insertion index so the
    // refinement order is reproducible.
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> queue;

    auto push = [&](double lo, double hi, int depth) {
        auto [v, e] = detail::gk15_panel(f, lo, hi);
        panels.push_back({lo, hi, v, e, depth, true});
        queue.emplace(e, panels.size() - 1);
    };

    push(a, b, 0);
    double total_err = panels[0].err;

    constexpr std::size_t panel_budget = 200000;
    while (total_err > tol) {
        if (queue.empty() || panels.size() > panel_budget)
            throw quadrature_error("integrate: panel budget exhausted");
        auto [err, idx] = queue.top();
        queue.pop();
        if (!panels[idx].alive) continue;
        if (panels[idx].depth >= max_depth)
            throw quadrature_error("integrate: did not converge within depth limit");

        const Panel p = panels[idx];
        panels[idx].alive = false;
        const double mid = 0.5 * (p.a + p.b);
        push(p.a, mid, p.depth + 1);
        const double e1 = panels.back().err;
        push(mid, p.b, p.depth + 1);
        const double e2 = panels.back().err;
        total_err += e1 + e2 - p.err;
    }

    // Sum surviving panels in creation order (deterministic).
    double value = 0.0, err = 0.0;
    for (const Panel& p : panels) {
        if (!p.alive) continue;
        value += p.value;
        err += p.err;
    }
    return {value, err};
}

}  // namespace pvii
