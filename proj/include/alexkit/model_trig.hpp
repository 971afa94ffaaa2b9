#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "alexkit/quadrature.hpp"

namespace alexkit {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Curvature bound of a model plane, per unit length^2. Any finite real.
struct Kappa {
    double value = 0.0;
};

/// Curvature-dimension pair (K, N) with N >= 1.
struct CDParams {
    double K = 0.0;
    double N = 1.0;

    void validate() const {
        if (!(N >= 1.0)) throw std::invalid_argument("CDParams: N must be >= 1");
        if (!std::isfinite(K) || !std::isfinite(N)) throw std::invalid_argument("CDParams: non-finite");
    }
};

/// Side lengths of a triangle (p,q,r): pq = |pq|, qr = |qr|, rp = |rp|.
struct TriangleSides {
    double pq = 0.0;
    double qr = 0.0;
    double rp = 0.0;

    void validate(Kappa kappa = {}) const {
        if (pq < 0 || qr < 0 || rp < 0) throw std::invalid_argument("TriangleSides: negative side");
        const double slack = 1e-12 * (pq + qr + rp) + 1e-300;
        if (pq > qr + rp + slack || qr > rp + pq + slack || rp > pq + qr + slack)
            throw std::invalid_argument("TriangleSides: triangle inequality violated");
        if (kappa.value > 0 && pq + qr + rp >= 2.0 * kPi / std::sqrt(kappa.value))
            throw std::domain_error("TriangleSides: perimeter >= 2*pi/sqrt(kappa)");
    }
};

enum class Vertex { p, q, r };

/// Extended real used for the distortion coefficients: +infinity is a tagged
/// branch, never a floating special riding through arithmetic.
struct ExtReal {
    double value = 0.0;
    bool finite = true;

    static ExtReal infinite() { return {0.0, false}; }
    static ExtReal of(double v) { return {v, true}; }
    bool is_infinite() const { return !finite; }
};

/// sn_kappa: solution of y'' + kappa*y = 0 with y(0)=0, y'(0)=1.
/// Switches to the power series when |kappa| t^2 < 1e-4 so the kappa -> 0
/// limit is reached without cancellation; the truncation error of the cubic
/// series tail is below 1e-16 at that cutoff.
inline double sn(Kappa kappa, double t) {
    const double k = kappa.value;
    const double x = k * t * t;
    if (std::abs(x) < 1e-4) {
        return t * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)));
    }
    if (k > 0) {
        const double s = std::sqrt(k);
        return std::sin(s * t) / s;
    }
    const double s = std::sqrt(-k);
    return std::sinh(s * t) / s;
}

/// cs_kappa = sn_kappa'; cs(0)=1, cs'(0)=0.
inline double cs(Kappa kappa, double t) {
    const double k = kappa.value;
    const double x = k * t * t;
    if (std::abs(x) < 1e-4) {
        return 1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0));
    }
    if (k > 0) return std::cos(std::sqrt(k) * t);
    return std::cosh(std::sqrt(-k) * t);
}

/// Side opposite the angle theta between sides b and c in the model plane
/// M_kappa; the cosine law cs(l) = cs(b)cs(c) + kappa sn(b)sn(c)cos(theta)
/// solved for l. Evaluated in half-angle form, which stays accurate for
/// nearly-degenerate triangles.
inline double model_side(Kappa kappa, double b, double c, double theta) {
    if (b < 0 || c < 0) throw std::invalid_argument("model_side: negative side");
    if (!(theta >= -1e-12 && theta <= kPi + 1e-12)) throw std::invalid_argument("model_side: theta outside [0,pi]");
    theta = std::min(std::max(theta, 0.0), kPi);
    const double k = kappa.value;
    const double sh = std::sin(0.5 * theta);
    if (k == 0.0) {
        const double d2 = (b - c) * (b - c) + 4.0 * b * c * sh * sh;
        return std::sqrt(std::max(0.0, d2));
    }
    if (k > 0) {
        const double rt = std::sqrt(k);
        const double bb = b * rt, cc = c * rt;
        if (bb > kPi + 1e-9 || cc > kPi + 1e-9)
            throw std::domain_error("model_side: side exceeds pi/sqrt(kappa)");
        const double sd = std::sin(0.5 * (bb - cc));
        double hav = sd * sd + std::sin(bb) * std::sin(cc) * sh * sh;
        hav = std::min(std::max(hav, 0.0), 1.0);
        return 2.0 * std::asin(std::sqrt(hav)) / rt;
    }
    const double rt = std::sqrt(-k);
    const double bb = b * rt, cc = c * rt;
    const double sd = std::sinh(0.5 * (bb - cc));
    const double arg = sd * sd + std::sinh(bb) * std::sinh(cc) * sh * sh;
    return 2.0 * std::asinh(std::sqrt(std::max(0.0, arg))) / rt;
}

namespace detail {

/// Angle opposite `opposite` between sides adj1, adj2 in M_kappa, by the
/// half-angle (L'Huilier-type) formulas; stable near 0 and pi where the
/// direct arccos form loses digits.
inline double angle_from_sides(Kappa kappa, double opposite, double adj1, double adj2) {
    if (adj1 <= 0 || adj2 <= 0)
        throw std::invalid_argument("comparison angle: zero adjacent side");
    const double k = kappa.value;
    auto clamped = [](double v) { return std::max(v, 0.0); };
    if (k == 0.0) {
        const double s = 0.5 * (opposite + adj1 + adj2);
        const double num = clamped(s - adj1) * clamped(s - adj2);
        const double den = s * clamped(s - opposite);
        return 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
    }
    const double rt = std::sqrt(std::abs(k));
    const double a = opposite * rt, b1 = adj1 * rt, b2 = adj2 * rt;
    const double s = 0.5 * (a + b1 + b2);
    if (k > 0) {
        if (s >= kPi + 1e-9) throw std::domain_error("comparison angle: perimeter >= 2*pi/sqrt(kappa)");
        const double num = clamped(std::sin(s - b1)) * clamped(std::sin(s - b2));
        const double den = clamped(std::sin(std::min(s, kPi))) * clamped(std::sin(s - a));
        return 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
    }
    const double num = clamped(std::sinh(s - b1)) * clamped(std::sinh(s - b2));
    const double den = std::sinh(s) * clamped(std::sinh(s - a));
    return 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
}

} // namespace detail

/// Comparison angle at a vertex of the M_kappa triangle with the given sides.
inline double comparison_angle(Kappa kappa, const TriangleSides& sides, Vertex at_vertex) {
    sides.validate(kappa);
    switch (at_vertex) {
        case Vertex::p: return detail::angle_from_sides(kappa, sides.qr, sides.pq, sides.rp);
        case Vertex::q: return detail::angle_from_sides(kappa, sides.rp, sides.pq, sides.qr);
        case Vertex::r: return detail::angle_from_sides(kappa, sides.pq, sides.qr, sides.rp);
    }
    throw std::logic_error("comparison_angle: bad vertex");
}

/// Distance |p~ x~| where x~ sits at arclength t*|qr| along q~r~ of the
/// comparison triangle.
inline double comparison_point_distance(Kappa kappa, const TriangleSides& sides, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("comparison_point_distance: t outside [0,1]");
    sides.validate(kappa);
    if (sides.qr == 0.0) return sides.pq;
    if (sides.pq == 0.0) return t * sides.qr; // p~ = q~
    const double theta_q = detail::angle_from_sides(kappa, sides.rp, sides.pq, sides.qr);
    return model_side(kappa, sides.pq, t * sides.qr, theta_q);
}

/// sigma_{K,N}^{(t)}(theta): +infinity on K theta^2 >= N pi^2, otherwise
/// sn_{K/N}(t theta)/sn_{K/N}(theta).
inline ExtReal sigma(const CDParams& params, double t, double theta) {
    params.validate();
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("sigma: t outside [0,1]");
    if (!(theta > 0.0)) throw std::invalid_argument("sigma: theta must be positive");
    if (params.K * theta * theta >= params.N * kPi * kPi) return ExtReal::infinite();
    const Kappa kn{params.K / params.N};
    return ExtReal::of(sn(kn, t * theta) / sn(kn, theta));
}

/// tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K,N-1}^{(t)}(theta)^{(N-1)/N};
/// equals t at N = 1 (the sigma_{K,0} factor is annihilated by the zero
/// exponent, matching the CD-literature convention).
inline ExtReal tau(const CDParams& params, double t, double theta) {
    params.validate();
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("tau: t outside [0,1]");
    if (!(theta > 0.0)) throw std::invalid_argument("tau: theta must be positive");
    if (params.N == 1.0) return ExtReal::of(t);
    if (params.K * theta * theta >= (params.N - 1.0) * kPi * kPi) return ExtReal::infinite();
    const Kappa kn{params.K / (params.N - 1.0)};
    const double sig = sn(kn, t * theta) / sn(kn, theta);
    return ExtReal::of(std::pow(t, 1.0 / params.N) * std::pow(sig, (params.N - 1.0) / params.N));
}

/// Bishop-Gromov model profile vbar_{K,N}(r) = int_0^r sn_{K/(N-1)}^{N-1}.
inline double bg_profile(const CDParams& params, double r, double rel_tol = 1e-10) {
    params.validate();
    if (!(params.N > 1.0)) throw std::invalid_argument("bg_profile: N must be > 1");
    if (r < 0) throw std::invalid_argument("bg_profile: negative radius");
    if (params.K > 0 && r > kPi * std::sqrt((params.N - 1.0) / params.K) + 1e-12)
        throw std::domain_error("bg_profile: r beyond pi*sqrt((N-1)/K)");
    if (r == 0) return 0.0;
    const Kappa kn{params.K / (params.N - 1.0)};
    const double ex = params.N - 1.0;
    auto integrand = [&](double t) { return std::pow(std::max(sn(kn, t), 0.0), ex); };
    return integrate_adaptive_rel(integrand, 0.0, r, rel_tol);
}

/// C_{K,N}(R, eps) = (vbar(R) - vbar(R - eps)) / (eps * vbar(R - eps)).
/// The numerator is computed as the integral over [R - eps, R] directly,
/// which keeps tiny eps well-conditioned at large R.
inline double c_coeff(const CDParams& params, double R, double eps, double rel_tol = 1e-10) {
    params.validate();
    if (!(params.K < 0)) throw std::invalid_argument("c_coeff: requires K < 0");
    if (!(params.N > 1.0)) throw std::invalid_argument("c_coeff: requires N > 1");
    if (!(eps > 0 && eps < R)) throw std::invalid_argument("c_coeff: requires 0 < eps < R");
    const Kappa kn{params.K / (params.N - 1.0)};
    const double ex = params.N - 1.0;
    auto integrand = [&](double t) { return std::pow(std::max(sn(kn, t), 0.0), ex); };
    const double num = integrate_adaptive_rel(integrand, R - eps, R, rel_tol);
    const double den = bg_profile(params, R - eps, rel_tol);
    return num / (eps * den);
}

namespace detail {
inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}
} // namespace detail

/// n! (n-1)^n (-kappa)^{n/2}; the scalar multiplying H^n(X) in the
/// Alexandrov-mode simplicial volume bound. Requires kappa < 0, n >= 1.
inline double simplicial_volume_coefficient_alexandrov(int n, Kappa kappa) {
    if (n < 1) throw std::invalid_argument("simplicial_volume_coefficient: n < 1");
    if (!(kappa.value < 0)) throw std::invalid_argument("simplicial_volume_coefficient: needs kappa < 0");
    return detail::factorial(n) * std::pow(double(n - 1), n) * std::pow(-kappa.value, 0.5 * n);
}

/// n! (-(N-1)K)^{n/2}; the CD-mode coefficient. Requires K < 0, N >= 1.
inline double simplicial_volume_coefficient_cd(int n, const CDParams& params) {
    params.validate();
    if (n < 1) throw std::invalid_argument("simplicial_volume_coefficient: n < 1");
    if (!(params.K < 0)) throw std::invalid_argument("simplicial_volume_coefficient: needs K < 0");
    return detail::factorial(n) * std::pow(-(params.N - 1.0) * params.K, 0.5 * n);
}

} // namespace alexkit
