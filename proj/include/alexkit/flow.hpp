#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "alexkit/rng.hpp"
#include "alexkit/semiconcave.hpp"
#include "alexkit/spaces.hpp"

namespace alexkit {

/// Parameters of the contraction pipeline. lambda must dominate the
/// concavity modulus of d(S(p,R),.) on B(p, delta0 R), i.e. be at least
/// cosh(R)/sinh(R(1-delta0)) for a curvature >= -1 space.
struct FlowParams {
    double eps = 0.1;
    double delta0 = 0.05;
    double R = 1.0;
    double lambda = 0.0; // filled by defaults(); must be >= the modulus bound
    double step_tol = 1e-3;
    double max_step = 1e-3;
    bool adaptive = true;
    int grad_resolution = 64;
    double grad_refine_tol = 1e-9;
    double critical_threshold = 1e-7;
    int rescan_every = 8; // full direction rescan cadence under warm starts
    bool warm_start = true;

    static FlowParams defaults(double R = 1.0, double eps = 0.1, double delta0 = 0.05) {
        FlowParams p;
        p.R = R;
        p.eps = eps;
        p.delta0 = delta0;
        p.lambda = std::cosh(R) / std::sinh(R * (1.0 - delta0));
        return p;
    }

    double ell() const { return delta0 * R / std::cos(eps); }

    void validate() const {
        if (!(eps > 0 && eps < kPi / 6)) throw std::invalid_argument("FlowParams: eps outside (0, pi/6)");
        if (!(delta0 > 0 && delta0 < 1)) throw std::invalid_argument("FlowParams: delta0 outside (0,1)");
        if (!(R > 0 && step_tol > 0 && max_step > 0)) throw std::invalid_argument("FlowParams: nonpositive parameter");
        const double bound = std::cosh(R) / std::sinh(R * (1.0 - delta0));
        if (!(lambda >= bound - 1e-12)) throw std::invalid_argument("FlowParams: lambda below cosh(R)/sinh(R(1-delta0))");
        if (grad_resolution < 16) throw std::invalid_argument("FlowParams: grad_resolution < 16");
    }

    GradientOptions grad_options() const { return {grad_resolution, grad_refine_tol, 1e-4}; }
};

enum class CurveStop { max_time, critical_point, domain_exit };

struct CurveSample {
    double t = 0.0;
    SpacePoint x{};
    double grad_norm = 0.0;
    double f_value = 0.0;
};

/// Time-stamped polyline produced by the integrator. Between samples the
/// curve is the recorded geodesic step, so position_at is exact piecewise
/// interpolation, and after a critical-point termination it is constant.
class GradientCurve {
public:
    std::vector<CurveSample> samples;
    std::vector<double> seg_dir;  // per segment: step direction at samples[k]
    std::vector<double> seg_len;  // per segment: geodesic length of the step
    CurveStop terminated = CurveStop::max_time;

    const Space* space = nullptr; // set by integrate(); used for interpolation

    double duration() const { return samples.empty() ? 0.0 : samples.back().t; }

    SpacePoint position_at(double t) const {
        if (samples.empty()) throw std::logic_error("GradientCurve: empty");
        if (t <= samples.front().t) return samples.front().x;
        if (t >= samples.back().t) return samples.back().x;
        std::size_t lo = 0, hi = samples.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (samples[mid].t <= t ? lo : hi) = mid;
        }
        const double span = samples[hi].t - samples[lo].t;
        if (span <= 0 || seg_len[lo] == 0.0) return samples[lo].x;
        const double frac = (t - samples[lo].t) / span;
        return space->exp_map(samples[lo].x, seg_dir[lo], frac * seg_len[lo]);
    }

    /// First sample time at which the curve sits exactly at `target`;
    /// +inf when it never does.
    double arrival_time(const SpacePoint& target) const {
        for (const auto& s : samples)
            if (s.x == target) return s.t;
        return std::numeric_limits<double>::infinity();
    }
};

namespace detail {

struct WarmState {
    bool valid = false;
    double dir = 0.0;
    int steps_since_rescan = 0;
};

/// Gradient with an optional warm start: when the previous step's direction
/// is available, only a bracket around it is refined, with a periodic full
/// rescan (and a fallback whenever the bracket result looks degraded).
inline GradientResult flow_gradient(const ScalarField& f, const SpacePoint& x, const FlowParams& params,
                                    WarmState& warm) {
    const GradientOptions opts = params.grad_options();
    if (!params.warm_start || !warm.valid || warm.steps_since_rescan >= params.rescan_every ||
        f.space().is_center_type(x)) {
        const GradientResult g = gradient(f, x, opts);
        warm.valid = g.regular && !f.space().is_center_type(x);
        warm.dir = g.g.dir;
        warm.steps_since_rescan = 0;
        return g;
    }
    const Space& s = f.space();
    const double L = s.directions_circle_length(x);
    const double w = 2.0 * L / opts.resolution;
    auto eval = [&](double dir) { return differential_capped(f, x, wrap_angle(dir, L), opts.base_h); };
    double a = warm.dir - w, b = warm.dir + w;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = eval(c), fd = eval(d);
    double best_dir = warm.dir, best_val = eval(warm.dir);
    while (b - a > opts.refine_tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(d);
        }
        if (std::max(fc, fd) > best_val) {
            best_val = std::max(fc, fd);
            best_dir = wrap_angle(fc > fd ? c : d, L);
        }
    }
    // anchor exact radial directions inside the bracket (apex handling
    // needs dir == pi bit-exactly)
    for (double cand : {kPi, 0.0}) {
        if (circle_gap(cand, best_dir, L) <= w) {
            const double v = eval(cand);
            if (v >= best_val - 1e-6) { // above the cusp-resolution noise band
                best_dir = cand;
                best_val = std::max(best_val, v);
            }
        }
    }
    if (!(best_val > 0)) {
        // bracket lost the maximizer; fall back to the full scan
        warm.valid = false;
        return flow_gradient(f, x, params, warm);
    }
    warm.dir = best_dir;
    warm.steps_since_rescan++;
    GradientResult out;
    out.regular = true;
    out.g = {x, best_dir, best_val};
    return out;
}

} // namespace detail

/// Explicit geodesic-stepping integrator for the gradient curve of f from
/// x0: each step moves exp(x, dir(grad f), h |grad f|) and h is adapted so
/// the observed increment of f matches |grad f|^2 h within step_tol * h.
/// Steps that would cross a cone apex/pole along a radial trajectory land
/// exactly on it; curves freeze at critical points.
inline GradientCurve integrate(const ScalarField& f, const SpacePoint& x0, double t_max,
                               const FlowParams& params) {
    params.validate();
    if (!(t_max > 0)) throw std::invalid_argument("integrate: t_max must be positive");
    const Space& s = f.space();
    s.validate_point(x0);

    GradientCurve curve;
    curve.space = &f.space();
    double t = 0.0;
    SpacePoint x = x0;
    detail::WarmState warm;

    GradientResult g = detail::flow_gradient(f, x, params, warm);
    curve.samples.push_back({0.0, x, g.g.mag, f.evaluate(x)});

    // Floor for the adaptive halving. At a kink of a min-field the increment
    // defect is proportional to dt, so halving cannot cure it; committing a
    // floored step lands the curve essentially on the kink, where riding the
    // equidistant set takes over.
    const double min_step = params.max_step / 1024.0;
    while (true) {
        if (!g.regular || g.g.mag < params.critical_threshold) {
            curve.terminated = CurveStop::critical_point;
            return curve;
        }
        if (t >= t_max * (1.0 - 1e-15)) {
            curve.terminated = CurveStop::max_time;
            return curve;
        }
        double h = std::min(params.max_step, t_max - t);
        const double gmag = g.g.mag;
        const double gsq = gmag * gmag;
        const double fx = curve.samples.back().f_value;
        bool committed = false;
        while (!committed) {
            double step_len = h * gmag;
            double dt = h;
            SpacePoint y;
            bool snapped = false;
            // radial crossing of the center/pole: land exactly on it
            const double hit = detail::radial_hit_distance(s, x, g.g.dir);
            if (std::isfinite(hit) && step_len >= hit * (1.0 - 1e-12)) {
                if (s.is_center_type(x)) {
                    // radial ray from a pole running into the opposite pole
                    y = g.g.dir == 0.0 ? x : x; // unreachable for our fields
                    curve.terminated = CurveStop::domain_exit;
                    return curve;
                }
                const double d2pi = detail::wrap_angle(g.g.dir, 2.0 * kPi);
                const bool inward = detail::circle_gap(d2pi, kPi, 2.0 * kPi) <= 1e-12;
                y = inward ? s.center() : s.point(s.max_radius(), 0.0);
                step_len = hit;
                dt = hit / gmag;
                snapped = true;
            } else {
                try {
                    y = s.exp_map(x, g.g.dir, step_len);
                } catch (const GeodesicDomainError& e) {
                    // non-snappable domain end: report the partial curve
                    curve.terminated = CurveStop::domain_exit;
                    return curve;
                }
            }
            const double fy = f.evaluate(y);
            const double defect = std::abs(fy - fx - gsq * dt);
            if (params.adaptive && !snapped && defect > params.step_tol * dt && h > min_step) {
                h *= 0.5;
                continue;
            }
            t += dt;
            x = y;
            curve.seg_dir.push_back(g.g.dir);
            curve.seg_len.push_back(step_len);
            if (snapped) warm.valid = false;
            g = detail::flow_gradient(f, x, params, warm);
            curve.samples.push_back({t, x, g.g.mag, fy});
            committed = true;
        }
    }
}

/// Batch flow map Phi(., t).
inline std::vector<SpacePoint> flow_map(const ScalarField& f, const std::vector<SpacePoint>& xs, double t,
                                        const FlowParams& params) {
    std::vector<SpacePoint> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        if (t == 0.0) {
            out.push_back(x);
            continue;
        }
        out.push_back(integrate(f, x, t, params).position_at(t));
    }
    return out;
}

struct ContractionRow {
    double s = 0.0;
    double dist = 0.0;
    double bound = 0.0; // e^{lambda s} d(x,y)
    double ratio = 0.0; // dist / bound
};

struct ContractionReport {
    std::vector<ContractionRow> rows;
    double max_ratio = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// d(Phi_s x, Phi_s y) <= e^{lambda s} d(x, y) on the given time grid.
inline ContractionReport check_contraction(const ScalarField& f, const SpacePoint& x, const SpacePoint& y,
                                           const std::vector<double>& s_grid, const FlowParams& params,
                                           double tol = 1e-4) {
    if (s_grid.empty()) throw std::invalid_argument("check_contraction: empty grid");
    const double s_max = *std::max_element(s_grid.begin(), s_grid.end());
    const Space& sp = f.space();
    const double d0 = sp.distance(x, y);
    ContractionReport rep;
    rep.tol = tol;
    if (s_max <= 0 || x == y) {
        for (double s : s_grid) rep.rows.push_back({s, 0.0, 0.0, 0.0});
        rep.pass = true;
        return rep;
    }
    const GradientCurve cx = integrate(f, x, s_max, params);
    const GradientCurve cy = integrate(f, y, s_max, params);
    for (double s : s_grid) {
        ContractionRow row;
        row.s = s;
        row.dist = sp.distance(cx.position_at(s), cy.position_at(s));
        row.bound = std::exp(params.lambda * s) * d0;
        row.ratio = row.bound > 0 ? row.dist / row.bound : 0.0;
        rep.rows.push_back(row);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    }
    rep.pass = rep.max_ratio <= 1.0 + tol;
    return rep;
}

struct ArrivalRow {
    SpacePoint start{};
    double dist0 = 0.0;
    double arrival = 0.0;      // first sample time exactly at p
    double bound = 0.0;        // |x,p| / cos(eps)
    double worst_decay = 0.0;  // max over samples of |Phi_t x, p| - (|x,p| - cos(eps) t)
    bool froze = false;        // all samples after arrival equal p exactly
};

struct ArrivalReport {
    std::vector<ArrivalRow> rows;
    double worst_decay = -std::numeric_limits<double>::infinity();
    double tol = 0.0;
    bool pass = false;
};

/// Lemma-style arrival check: |Phi_t(x), p| <= |x,p| - cos(eps) t along the
/// curve, exact arrival no later than |x,p|/cos(eps), frozen afterwards.
inline ArrivalReport check_arrival(const ScalarField& f, const SpacePoint& p,
                                   const std::vector<SpacePoint>& xs, const FlowParams& params,
                                   double tol = 1e-4) {
    const Space& sp = f.space();
    ArrivalReport rep;
    rep.tol = tol;
    bool ok = true;
    for (const auto& x : xs) {
        ArrivalRow row;
        row.start = x;
        row.dist0 = sp.distance(x, p);
        row.bound = row.dist0 / std::cos(params.eps);
        if (row.dist0 == 0.0) {
            row.arrival = 0.0;
            row.froze = true;
            rep.rows.push_back(row);
            continue;
        }
        const GradientCurve c = integrate(f, x, row.bound + 10.0 * params.max_step, params);
        row.arrival = c.arrival_time(p);
        bool arrived = false;
        bool froze = true;
        for (const auto& smp : c.samples) {
            if (!arrived) {
                const double excess = sp.distance(smp.x, p) - (row.dist0 - std::cos(params.eps) * smp.t);
                row.worst_decay = std::max(row.worst_decay, excess);
            }
            if (smp.x == p) arrived = true;
            if (arrived && !(smp.x == p)) froze = false;
        }
        row.froze = arrived && froze;
        ok = ok && row.froze && row.arrival <= row.bound + tol && row.worst_decay <= tol;
        rep.worst_decay = std::max(rep.worst_decay, row.worst_decay);
        rep.rows.push_back(row);
    }
    rep.pass = ok;
    return rep;
}

struct HomotopyBoundReport {
    double worst_margin = -std::numeric_limits<double>::infinity(); // max lhs - rhs
    std::size_t checked = 0;
    double tol = 0.0;
    bool pass = false;
};

/// d(Phi(x,s), Phi(y,t)) <= e^{lambda s} d(x,y) + (t - s) for s <= t.
inline HomotopyBoundReport check_homotopy_bound(const ScalarField& f,
                                                const std::vector<std::pair<SpacePoint, SpacePoint>>& pairs,
                                                const std::vector<std::pair<double, double>>& time_pairs,
                                                const FlowParams& params, double tol = 1e-4) {
    const Space& sp = f.space();
    double t_max = 0.0;
    for (const auto& [s, t] : time_pairs) {
        if (!(s <= t)) throw std::invalid_argument("check_homotopy_bound: needs s <= t");
        t_max = std::max(t_max, t);
    }
    HomotopyBoundReport rep;
    rep.tol = tol;
    for (const auto& [x, y] : pairs) {
        const GradientCurve cx = integrate(f, x, std::max(t_max, params.max_step), params);
        const GradientCurve cy = integrate(f, y, std::max(t_max, params.max_step), params);
        const double d0 = sp.distance(x, y);
        for (const auto& [s, t] : time_pairs) {
            const double lhs = sp.distance(cx.position_at(s), cy.position_at(t));
            const double rhs = std::exp(params.lambda * s) * d0 + (t - s);
            rep.worst_margin = std::max(rep.worst_margin, lhs - rhs);
            ++rep.checked;
        }
    }
    rep.pass = rep.worst_margin <= tol;
    return rep;
}

struct SllcWitness {
    SpacePoint x{}, y{};
    double u = 0.0, v = 0.0;
    double lhs = 0.0, rhs = 0.0;
};

/// Certificate of Lipschitz contractibility for U(p, delta0 R) under
/// h(x, u) = Phi(x, ell u), ell = delta0 R / cos(eps): endpoint identities,
/// concentric containment, and the two-variable Lipschitz bound with the
/// theoretical constants C = e^{lambda ell}, C' = ell.
struct SllcCertificate {
    SpacePoint p{};
    double r = 0.0;
    double ell = 0.0;
    double C = 0.0;
    double C_prime = 0.0;
    bool containment_pass = false;
    bool endpoint_pass = false;
    bool lipschitz_pass = false;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    double worst_lip_margin = -std::numeric_limits<double>::infinity();
    double worst_containment = 0.0; // max over samples of |h(x,u), p| - |x, p|
    double fitted_C = 0.0;
    double fitted_C_prime = 0.0;
    SllcWitness witness;

    bool passed() const {
        return containment_pass && endpoint_pass && lipschitz_pass && std::isfinite(C) && std::isfinite(C_prime);
    }
};

inline SllcCertificate build_sllc_certificate(const Space& space, const SpacePoint& p,
                                              const FlowParams& params, std::size_t n_pairs,
                                              std::uint64_t seed, double tol = 1e-4) {
    params.validate();
    space.validate_point(p);
    if (!space.is_center_type(p))
        throw std::invalid_argument("build_sllc_certificate: p must be an apex/origin/pole");
    const ScalarField f = ScalarField::dist_from_sphere(space, p, params.R, false);

    SllcCertificate cert;
    cert.p = p;
    cert.r = params.delta0 * params.R;
    cert.ell = params.ell();
    cert.C = std::exp(params.lambda * cert.ell);
    cert.C_prime = cert.ell;
    cert.samples = n_pairs;
    cert.seed = seed;
    cert.tol = tol;

    // pool of starting points with precomputed curves over [0, ell]
    Rng rng(seed);
    const std::size_t pool = std::min<std::size_t>(256, std::max<std::size_t>(32, n_pairs / 8));
    const double L = space.directions_circle_length(p);
    std::vector<SpacePoint> xs;
    std::vector<GradientCurve> curves;
    xs.reserve(pool);
    bool endpoints_ok = true;
    bool containment_ok = true;
    for (std::size_t i = 0; i < pool; ++i) {
        const double rad = cert.r * std::sqrt(rng.uniform());
        const SpacePoint x = space.exp_map(p, rng.uniform(0.0, L), rad);
        GradientCurve c = integrate(f, x, cert.ell, params);
        // h(x, 0) = x, h(x, 1) = p
        if (!(c.position_at(0.0) == x)) endpoints_ok = false;
        if (!(c.position_at(cert.ell) == p)) endpoints_ok = false;
        // containment: |h(x,u), p| <= |x, p| along the whole curve
        const double dx = space.distance(x, p);
        for (const auto& smp : c.samples) {
            const double excess = space.distance(smp.x, p) - dx;
            cert.worst_containment = std::max(cert.worst_containment, excess);
            if (excess > tol) containment_ok = false;
        }
        xs.push_back(x);
        curves.push_back(std::move(c));
    }
    cert.endpoint_pass = endpoints_ok;
    cert.containment_pass = containment_ok;

    // two-variable Lipschitz bound over sampled pairs; same-time and
    // same-point pairs are included so the fitted constants mean something
    bool lip_ok = true;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const std::size_t i = rng.below(pool);
        std::size_t j = rng.below(pool);
        double u = rng.uniform(), v = rng.uniform();
        const int kind = static_cast<int>(rng.below(5));
        if (kind == 0) {
            v = u; // same-time pair
        } else if (kind == 1) {
            j = i; // same-point pair
        }
        const SpacePoint hx = curves[i].position_at(cert.ell * u);
        const SpacePoint hy = curves[j].position_at(cert.ell * v);
        const double lhs = space.distance(hx, hy);
        const double dxy = space.distance(xs[i], xs[j]);
        const double rhs = cert.C * dxy + cert.C_prime * std::abs(u - v);
        const double margin = lhs - rhs;
        if (margin > cert.worst_lip_margin) {
            cert.worst_lip_margin = margin;
            cert.witness = {xs[i], xs[j], u, v, lhs, rhs};
        }
        if (margin > tol) lip_ok = false;
        if (u == v && dxy > 1e-9) cert.fitted_C = std::max(cert.fitted_C, lhs / dxy);
        if (i == j && std::abs(u - v) > 1e-9) cert.fitted_C_prime = std::max(cert.fitted_C_prime, lhs / std::abs(u - v));
    }
    cert.lipschitz_pass = lip_ok;
    return cert;
}

/// Semigroup defect d(Phi(x, s+t), Phi(Phi(x,s), t)) at each fixed step
/// size; the halving study behind the integrator-order claim.
inline std::vector<double> semigroup_defects(const ScalarField& f, const SpacePoint& x, double s, double t,
                                             const std::vector<double>& steps, const FlowParams& base) {
    std::vector<double> out;
    for (double h : steps) {
        FlowParams params = base;
        params.max_step = h;
        params.adaptive = false;
        const GradientCurve full = integrate(f, x, s + t, params);
        const GradientCurve first = integrate(f, x, s, params);
        const GradientCurve second = integrate(f, first.position_at(s), t, params);
        out.push_back(f.space().distance(full.position_at(s + t), second.position_at(t)));
    }
    return out;
}

} // namespace alexkit
