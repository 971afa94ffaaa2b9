#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "alexkit/rng.hpp"
#include "alexkit/spaces.hpp"

namespace alexkit {

enum class FieldKind { dist_from_set, dist_from_sphere };

/// Distance-type scalar fields: d(A, .) for a finite point set A, or the
/// distance from a metric sphere S(p,R) around a center-type point, plus an
/// affine wrapper a*f + b used to build falsification targets. Immutable.
class ScalarField {
public:
    static ScalarField dist_from_set(const Space& space, std::vector<SpacePoint> points) {
        if (points.empty()) throw std::invalid_argument("dist_from_set: empty set");
        for (const auto& p : points) space.validate_point(p);
        ScalarField f(space);
        f.kind_ = FieldKind::dist_from_set;
        f.points_ = std::move(points);
        return f;
    }

    /// d(S(p,R), .) = |R - |p,x||, or R - |p,x| when signed_inside. Exact only
    /// when S(p,R) is a full metric circle, so p must be a center-type point
    /// (apex, origin, pole); use sphere_net for anything else.
    static ScalarField dist_from_sphere(const Space& space, const SpacePoint& p, double R, bool signed_inside) {
        space.validate_point(p);
        if (!space.is_center_type(p))
            throw std::invalid_argument("dist_from_sphere: center must be an apex/origin/pole; use sphere_net");
        if (!(R > 0)) throw std::invalid_argument("dist_from_sphere: R must be positive");
        ScalarField f(space);
        f.kind_ = FieldKind::dist_from_sphere;
        f.center_ = p;
        f.radius_ = R;
        f.signed_inside_ = signed_inside;
        return f;
    }

    /// Min-distance to a uniform net of n points on S(p,R); the epsilon-net
    /// stand-in for the sphere distance at non-symmetric configurations.
    static ScalarField sphere_net(const Space& space, const SpacePoint& p, double R, int n) {
        if (n < 3) throw std::invalid_argument("sphere_net: need at least 3 net points");
        const double L = space.directions_circle_length(p);
        std::vector<SpacePoint> net;
        net.reserve(n);
        for (int i = 0; i < n; ++i) net.push_back(space.exp_map(p, i * L / n, R));
        return dist_from_set(space, std::move(net));
    }

    ScalarField affine(double scale, double offset) const {
        ScalarField f = *this;
        f.scale_ = scale * scale_;
        f.offset_ = scale * offset_ + offset;
        return f;
    }

    ScalarField negated() const { return affine(-1.0, 0.0); }

    const Space& space() const { return space_; }
    FieldKind kind() const { return kind_; }
    double scale() const { return scale_; }
    const std::vector<SpacePoint>& set_points() const { return points_; }
    SpacePoint sphere_center() const { return center_; }
    double sphere_radius() const { return radius_; }

    /// Pre-wrapper distance value.
    double base_value(const SpacePoint& x) const {
        if (kind_ == FieldKind::dist_from_set) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& a : points_) best = std::min(best, space_.distance(a, x));
            return best;
        }
        const double d = space_.distance(center_, x);
        return signed_inside_ ? radius_ - d : std::abs(radius_ - d);
    }

    double evaluate(const SpacePoint& x) const { return scale_ * base_value(x) + offset_; }

private:
    explicit ScalarField(const Space& s) : space_(s) {}

    Space space_;
    FieldKind kind_ = FieldKind::dist_from_set;
    std::vector<SpacePoint> points_;
    SpacePoint center_{};
    double radius_ = 0.0;
    bool signed_inside_ = false;
    double scale_ = 1.0;
    double offset_ = 0.0;
};

namespace detail {

/// Largest step along (x, dir) before the ray runs into an apex/pole, or
/// +inf. Only exactly-radial rays ever hit one.
inline double radial_hit_distance(const Space& s, const SpacePoint& x, double dir) {
    const double inf = std::numeric_limits<double>::infinity();
    const double rm = s.max_radius();
    if (s.is_center_type(x)) return std::isfinite(rm) ? rm : inf;
    const double d2pi = wrap_angle(dir, 2.0 * kPi);
    if (circle_gap(d2pi, kPi, 2.0 * kPi) <= 1e-12) return x.r;                  // inward radial
    if (d2pi <= 1e-12 && std::isfinite(rm)) return rm - x.r;                    // outward radial
    return inf;
}

} // namespace detail

/// One-sided directional derivative d_x f(dir) by difference quotients at
/// steps h and h/2 with Richardson extrapolation. Steps shrink only when the
/// exact ray would run off the geodesic domain.
inline double differential(const ScalarField& f, const SpacePoint& x, double dir, double base_h = 1e-4) {
    const Space& s = f.space();
    double h = base_h;
    const double hit = detail::radial_hit_distance(s, x, dir);
    if (h > 0.5 * hit) h = 0.5 * hit;
    if (!(h > 0)) throw GeodesicDomainError("differential: no admissible step", 0.0);
    const double f0 = f.evaluate(x);
    const double d1 = (f.evaluate(s.exp_map(x, dir, h)) - f0) / h;
    const double d2 = (f.evaluate(s.exp_map(x, dir, 0.5 * h)) - f0) / (0.5 * h);
    return 2.0 * d2 - d1;
}

namespace detail {

/// Richardson capped by the plain h/2 quotient. On rays that cross a kink
/// of a min-field the extrapolation can overshoot the true one-sided
/// derivative by O(1) * h; the plain quotient of a function with concave
/// branches never does, so the min is exact on linear rays, conservative
/// elsewhere, and never exceeds the Lipschitz constant. Gradient magnitudes
/// come from this estimator.
inline double differential_capped(const ScalarField& f, const SpacePoint& x, double dir, double base_h) {
    const Space& s = f.space();
    double h = base_h;
    const double hit = radial_hit_distance(s, x, dir);
    if (h > 0.5 * hit) h = 0.5 * hit;
    if (!(h > 0)) throw GeodesicDomainError("differential: no admissible step", 0.0);
    const double f0 = f.evaluate(x);
    const double d1 = (f.evaluate(s.exp_map(x, dir, h)) - f0) / h;
    const double d2 = (f.evaluate(s.exp_map(x, dir, 0.5 * h)) - f0) / (0.5 * h);
    return std::min(2.0 * d2 - d1, d2);
}

} // namespace detail

struct GradientOptions {
    int resolution = 720;
    double refine_tol = 1e-10;
    double base_h = 1e-4;
};

struct GradientResult {
    TangentVector g;
    bool regular = false;
    bool multiplicity = false;
    /// Worst excess of df(v) over <v,g> across the scanned directions; stays
    /// ~0 for semiconcave fields at adequate resolution. Recorded, not thrown:
    /// distance fields are legitimately non-semiconcave at their minimum set.
    double check_violation = 0.0;
};

/// Gradient per the variational characterization: scans the direction circle
/// for the maximizer of the differential, then sharpens it with golden-section
/// search. Critical (zero vector) when no direction increases f.
inline GradientResult gradient(const ScalarField& f, const SpacePoint& x, const GradientOptions& opt = {}) {
    if (opt.resolution < 16) throw std::invalid_argument("gradient: resolution < 16");
    const Space& s = f.space();
    const double L = s.directions_circle_length(x);
    const bool regular_point = !s.is_center_type(x);

    const int res = opt.resolution;
    std::vector<double> dirs;
    dirs.reserve(res + 2);
    for (int i = 0; i < res; ++i) dirs.push_back(i * L / res);
    if (regular_point) {
        dirs.push_back(kPi); // exact radial candidates; the scan grid may miss
        dirs.push_back(0.0); // them and secants misread near-apex geometry
    }
    std::vector<double> vals(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) vals[i] = detail::differential_capped(f, x, dirs[i], opt.base_h);

    const double spacing = L / res;
    auto eval = [&](double dir) { return detail::differential_capped(f, x, detail::wrap_angle(dir, L), opt.base_h); };
    auto refine = [&](double dir0, double val0) {
        // golden-section maximization on [dir0 - spacing, dir0 + spacing]
        double a = dir0 - spacing, b = dir0 + spacing;
        double best_dir = dir0, best_val = val0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = eval(c), fd = eval(d);
        while (b - a > opt.refine_tol) {
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
                best_dir = detail::wrap_angle(fc > fd ? c : d, L);
            }
        }
        return std::pair<double, double>{best_dir, best_val};
    };

    // refine every near-tied local maximum of the scan, so symmetric
    // configurations report their sampling ambiguity instead of an
    // arbitrary winner
    struct Cand {
        double dir, val;
    };
    std::vector<Cand> cands;
    double scan_best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < res; ++i) scan_best = std::max(scan_best, vals[i]);
    for (int i = 0; i < res; ++i) {
        const double prev = vals[(i + res - 1) % res], next = vals[(i + 1) % res];
        if (vals[i] >= prev && vals[i] >= next && vals[i] >= scan_best - 1e-3)
            cands.push_back({dirs[i], vals[i]});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.val > b.val; });
    if (cands.size() > 6) cands.resize(6);
    std::vector<Cand> refined;
    for (const Cand& c : cands) {
        const auto [rd, rv] = refine(c.dir, c.val);
        refined.push_back({rd, rv});
    }
    constexpr double kTieTol = 1e-9;
    double best_val = -std::numeric_limits<double>::infinity();
    for (const Cand& c : refined) best_val = std::max(best_val, c.val);
    // smallest-angle representative among ties
    double best_dir = 0.0;
    bool have_dir = false;
    for (const Cand& c : refined) {
        if (c.val >= best_val - kTieTol && (!have_dir || c.dir < best_dir)) {
            best_dir = c.dir;
            have_dir = true;
        }
    }
    bool multiplicity = false;
    for (const Cand& c : refined)
        if (c.val >= best_val - kTieTol && detail::circle_gap(c.dir, best_dir, L) > 2.0 * spacing)
            multiplicity = true;
    // anchor to an exact radial direction when it ties the winning peak.
    // Secants cannot resolve a cusp below ~1e-6 in direction (fp granularity
    // of the unfolded geometry), so the anchor tolerance sits above that
    // noise band; downstream apex handling wants dir == pi bit-exactly.
    constexpr double kAnchorTol = 1e-6;
    if (regular_point) {
        for (std::size_t j : {std::size_t(res), std::size_t(res) + 1}) {
            if (vals[j] >= best_val - kAnchorTol && detail::circle_gap(dirs[j], best_dir, L) <= 2.0 * spacing) {
                best_dir = dirs[j];
                best_val = std::max(best_val, vals[j]);
            }
        }
    }

    GradientResult out;
    if (best_val <= 0.0) {
        out.g = {x, 0.0, 0.0};
        out.regular = false;
        out.check_violation = std::max(0.0, scan_best);
        return out;
    }
    out.regular = true;
    out.multiplicity = multiplicity;
    out.g = {x, best_dir, best_val};
    // a posteriori Def-of-gradient check: df(v) <= |g| cos(angle(v, g))
    double worst = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const double ang = std::min(detail::circle_gap(dirs[i], best_dir, L), kPi);
        worst = std::max(worst, vals[i] - best_val * std::cos(ang));
    }
    out.check_violation = worst;
    return out;
}

struct ConcavityWitness {
    SpacePoint midpoint{};
    double dir = 0.0;
    double second_difference = 0.0;
    double lambda = 0.0;
};

struct ConcavityReport {
    double worst_violation = -std::numeric_limits<double>::infinity(); // max secdiff - lambda h^2
    std::size_t samples = 0;
    std::size_t skipped = 0;
    ConcavityWitness witness;
    double h = 0.0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    bool pass = false;
};

struct ConcavityOptions {
    std::size_t samples = 2000;
    double h = 1e-3;
    double tol = 1e-6; // pass iff worst_violation <= tol * h^2
    std::uint64_t seed = 1;
};

/// Samples geodesic midpoints in the region and tests the centered second
/// difference against the modulus lambda(x) = cs_kappa(f(x))/sn_kappa(f(x))
/// (1/f(x) at kappa = 0), the concavity modulus of distance functions.
inline ConcavityReport verify_concavity(const ScalarField& f, const Region& region, Kappa kappa,
                                        const ConcavityOptions& opt = {}) {
    region.validate();
    const Space& s = f.space();
    s.validate_point(region.center);
    Rng rng(opt.seed);
    ConcavityReport rep;
    rep.h = opt.h;
    rep.tol = opt.tol;
    rep.seed = opt.seed;
    const double Lc = s.directions_circle_length(region.center);
    std::size_t produced = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = opt.samples * 20;
    while (produced < opt.samples && attempts++ < max_attempts) {
        const double radius = std::sqrt(rng.uniform(region.r_lo * region.r_lo, region.r_hi * region.r_hi));
        SpacePoint x;
        try {
            x = s.exp_map(region.center, rng.uniform(0.0, Lc), radius);
        } catch (const GeodesicDomainError&) {
            ++rep.skipped;
            continue;
        }
        if (s.is_center_type(x)) {
            ++rep.skipped;
            continue;
        }
        const double v = f.evaluate(x);
        // modulus is undefined on the zero set of the field and outside the
        // kappa > 0 cap
        if (std::abs(v) <= 4.0 * opt.h || (kappa.value > 0 && std::abs(v) >= 0.5 * kPi / std::sqrt(kappa.value))) {
            ++rep.skipped;
            continue;
        }
        const double snv = sn(kappa, v);
        if (std::abs(snv) < 1e-12) {
            ++rep.skipped;
            continue;
        }
        const double dir = rng.uniform(0.0, 2.0 * kPi);
        SpacePoint xp, xm;
        try {
            xp = s.exp_map(x, dir, opt.h);
            xm = s.exp_map(x, dir + kPi, opt.h);
        } catch (const GeodesicDomainError&) {
            ++rep.skipped;
            continue;
        }
        const double lambda = cs(kappa, v) / snv;
        const double secdiff = f.evaluate(xp) + f.evaluate(xm) - 2.0 * v;
        const double violation = secdiff - lambda * opt.h * opt.h;
        ++produced;
        if (violation > rep.worst_violation) {
            rep.worst_violation = violation;
            rep.witness = {x, dir, secdiff, lambda};
        }
    }
    rep.samples = produced;
    if (produced < opt.samples)
        throw std::invalid_argument("verify_concavity: region rejects too many samples");
    rep.pass = rep.worst_violation <= opt.tol * opt.h * opt.h;
    return rep;
}

} // namespace alexkit
