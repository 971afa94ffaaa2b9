#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace alexkit {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (positive half; node 0 last).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Gauss-7 weights matching kGk15Nodes[1], [3], [5], [7].
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

} // namespace detail

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// One Gauss-Kronrod 7-15 panel on [a,b]. The embedded Gauss-7 rule uses
/// the odd Kronrod nodes plus the midpoint, which gives the usual
/// |K15 - G7| error estimate for free.
template <class F>
QuadResult gk15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double off = half * detail::kGk15Nodes[i];
        const double fsum = (i == 7) ? f(mid) : f(mid - off) + f(mid + off);
        kron += detail::kGk15Weights[i] * fsum;
        if (i == 1 || i == 3 || i == 5) gauss += detail::kG7Weights[i / 2] * fsum;
        if (i == 7) gauss += detail::kG7Weights[3] * fsum;
    }
    QuadResult r;
    r.value = kron * half;
    const double diff = std::abs(kron - gauss) * std::abs(half);
    const double sharpened = std::pow(200.0 * diff, 1.5);
    r.error = (sharpened < diff) ? sharpened : diff;
    if (diff == 0.0) r.error = std::abs(r.value) * 1e-16;
    return r;
}

/// Adaptive bisection driver. Tolerance is absolute; callers wanting a
/// relative target should pass rel * |rough estimate|.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_depth = 55) {
    if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: bad interval");
    if (a == b) return 0.0;
    struct Frame {
        double a, b, tol;
        int depth;
    };
    double total = 0.0;
    std::vector<Frame> stack{{a, b, abs_tol, 0}};
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        const QuadResult r = gk15(f, fr.a, fr.b);
        if (r.error <= fr.tol || fr.depth >= max_depth) {
            total += r.value;
        } else {
            const double m = 0.5 * (fr.a + fr.b);
            stack.push_back({fr.a, m, 0.5 * fr.tol, fr.depth + 1});
            stack.push_back({m, fr.b, 0.5 * fr.tol, fr.depth + 1});
        }
    }
    return total;
}

/// Adaptive integration with a relative tolerance, splitting first at the
/// given interior breakpoints (known kinks of the integrand).
template <class F>
double integrate_adaptive_rel(F&& f, double a, double b, double rel_tol,
                              const std::vector<double>& breakpoints = {}, int max_depth = 55) {
    std::vector<double> pts{a};
    for (double p : breakpoints)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double rough = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) rough += std::abs(gk15(f, pts[i], pts[i + 1]).value);
    const double abs_tol = rel_tol * (rough > 0 ? rough : 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += integrate_adaptive(f, pts[i], pts[i + 1], abs_tol * (pts[i + 1] - pts[i]) / (b - a), max_depth);
    return total;
}

} // namespace alexkit
