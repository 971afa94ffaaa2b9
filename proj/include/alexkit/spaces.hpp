#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alexkit/model_trig.hpp"
#include "alexkit/quadrature.hpp"

namespace alexkit {

/// Geodesic ray left its domain of definition (hit a cone apex / pole).
/// max_t is the largest admissible parameter.
class GeodesicDomainError : public std::domain_error {
public:
    GeodesicDomainError(const std::string& what, double max_t_)
        : std::domain_error(what), max_t(max_t_) {}
    double max_t;
};

/// Point in space-native coordinates: (radius from the distinguished center,
/// angle mod the angular period). r = 0 is the apex/origin/pole regardless
/// of phi; on spherical-type spaces r = r_max is the opposite pole.
struct SpacePoint {
    double r = 0.0;
    double phi = 0.0;

    bool operator==(const SpacePoint&) const = default;
};

/// Direction (angle on the circle of directions at `base`) plus magnitude.
/// At regular points dir = 0 is the outward radial direction and dir grows
/// toward increasing phi; at a center-type point dir is the phi of the ray.
struct TangentVector {
    SpacePoint base;
    double dir = 0.0;
    double mag = 0.0;
};

struct DirectionResult {
    TangentVector v;
    bool unique = true;
};

struct GeodesicPointResult {
    SpacePoint x;
    bool unique = true;
};

/// Ball/annulus around a point: r_lo <= d(center, x) <= r_hi.
struct Region {
    SpacePoint center;
    double r_lo = 0.0;
    double r_hi = 1.0;

    void validate() const {
        if (!(r_lo >= 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("Region: need 0 <= r_lo < r_hi");
    }
};

enum class SpaceKind { model_plane, euclidean_cone, spherical_cone };

namespace detail {

inline double wrap_angle(double a, double period) {
    double w = std::fmod(a, period);
    if (w < 0) w += period;
    if (w == period) w = 0.0;
    return w;
}

/// Signed gap from a to b, in (-period/2, period/2].
inline double signed_gap(double a, double b, double period) {
    double d = wrap_angle(b - a, period);
    if (d > 0.5 * period) d -= period;
    return d;
}

/// Distance between two direction angles on a circle of length `period`,
/// in [0, period/2].
inline double circle_gap(double a, double b, double period) {
    return std::abs(signed_gap(a, b, period));
}

} // namespace detail

/// Concrete 2-dimensional spaces: the model planes M_kappa and Euclidean /
/// spherical cones over circles. All metric queries are exact closed forms;
/// only ball volumes use quadrature. Immutable after construction.
class Space {
public:
    static Space model_plane(double kappa, std::optional<double> declared_bound = std::nullopt) {
        Space s;
        s.kind_ = SpaceKind::model_plane;
        s.kappa_ = kappa;
        s.declared_ = declared_bound.value_or(kappa);
        return s;
    }

    static Space euclidean_cone(double theta_total, std::optional<double> declared_bound = std::nullopt) {
        if (!(theta_total > 0)) throw std::invalid_argument("euclidean_cone: theta_total must be positive");
        Space s;
        s.kind_ = SpaceKind::euclidean_cone;
        s.theta_ = theta_total;
        s.declared_ = declared_bound.value_or(0.0);
        return s;
    }

    static Space spherical_cone(double theta_total, std::optional<double> declared_bound = std::nullopt) {
        if (!(theta_total > 0)) throw std::invalid_argument("spherical_cone: theta_total must be positive");
        Space s;
        s.kind_ = SpaceKind::spherical_cone;
        s.theta_ = theta_total;
        s.declared_ = declared_bound.value_or(1.0);
        return s;
    }

    SpaceKind kind() const { return kind_; }
    double theta_total() const { return theta_; }
    double plane_kappa() const { return kappa_; }
    Kappa curvature_lower_bound() const { return {declared_}; }

    /// Period of the global angular coordinate.
    double angular_period() const { return kind_ == SpaceKind::model_plane ? 2.0 * kPi : theta_; }

    /// Curvature of the model plane the metric formulas live in.
    Kappa model_kappa() const {
        switch (kind_) {
            case SpaceKind::model_plane: return {kappa_};
            case SpaceKind::euclidean_cone: return {0.0};
            case SpaceKind::spherical_cone: return {1.0};
        }
        return {0.0};
    }

    /// Largest radial coordinate (pi/sqrt(kappa) on spheres, pi on spherical
    /// cones, +inf otherwise).
    double max_radius() const {
        if (kind_ == SpaceKind::spherical_cone) return kPi;
        if (kind_ == SpaceKind::model_plane && kappa_ > 0) return kPi / std::sqrt(kappa_);
        return std::numeric_limits<double>::infinity();
    }

    /// True when r = max_radius() is a single singular point (spherical cone
    /// south pole). On model planes with kappa > 0 it is the smooth antipode.
    bool max_radius_is_pole() const { return kind_ == SpaceKind::spherical_cone; }

    SpacePoint center() const { return {0.0, 0.0}; }

    bool is_center(const SpacePoint& x) const { return x.r == 0.0; }
    bool is_far_pole(const SpacePoint& x) const {
        const double rm = max_radius();
        return std::isfinite(rm) && x.r == rm;
    }
    bool is_center_type(const SpacePoint& x) const { return is_center(x) || (max_radius_is_pole() && is_far_pole(x)); }

    /// Normalizing constructor; clamps roundoff at the poles and wraps phi.
    SpacePoint point(double r, double phi) const {
        if (!std::isfinite(r) || !std::isfinite(phi)) throw std::invalid_argument("point: non-finite coordinates");
        const double rm = max_radius();
        if (r < 0) {
            if (r < -1e-12) throw std::invalid_argument("point: negative radius");
            r = 0.0;
        }
        if (std::isfinite(rm)) {
            if (r > rm + 1e-9) throw std::domain_error("point: radius beyond max_radius");
            if (r > rm) r = rm;
        }
        if (r == 0.0) return {0.0, 0.0};
        if (std::isfinite(rm) && r == rm && max_radius_is_pole()) return {rm, 0.0};
        return {r, detail::wrap_angle(phi, angular_period())};
    }

    void validate_point(const SpacePoint& x) const {
        if (!std::isfinite(x.r) || !std::isfinite(x.phi) || x.r < 0)
            throw std::invalid_argument("validate_point: bad coordinates");
        const double rm = max_radius();
        if (std::isfinite(rm) && x.r > rm + 1e-9)
            throw std::domain_error("validate_point: radius beyond max_radius (space mismatch?)");
    }

    double distance(const SpacePoint& a, const SpacePoint& b) const {
        validate_point(a);
        validate_point(b);
        if (is_center(a)) return b.r;
        if (is_center(b)) return a.r;
        if (max_radius_is_pole()) {
            const double rm = max_radius();
            if (is_far_pole(a)) return rm - b.r;
            if (is_far_pole(b)) return rm - a.r;
        }
        const double gap = detail::circle_gap(a.phi, b.phi, angular_period());
        if (gap <= kPi) return model_side(model_kappa(), a.r, b.r, gap);
        // only reachable when the angular period exceeds 2*pi
        if (kind_ == SpaceKind::spherical_cone) return std::min(a.r + b.r, 2.0 * kPi - a.r - b.r);
        return a.r + b.r;
    }

    double directions_circle_length(const SpacePoint& x) const {
        validate_point(x);
        if (kind_ == SpaceKind::model_plane) return 2.0 * kPi;
        if (is_center(x) || (max_radius_is_pole() && is_far_pole(x))) return theta_;
        return 2.0 * kPi;
    }

    /// Unit-speed geodesic from x with initial direction `dir`, evaluated at
    /// arclength t >= 0. Throws GeodesicDomainError (with the largest valid
    /// parameter) when the ray runs into a cone apex or pole.
    SpacePoint exp_map(const SpacePoint& x, double dir, double t) const {
        validate_point(x);
        if (t < 0) throw std::invalid_argument("exp_map: negative arclength");
        if (t == 0) return x;
        const double rm = max_radius();
        if (is_center(x)) {
            if (std::isfinite(rm) && t > rm + 1e-12) {
                if (kind_ == SpaceKind::model_plane)
                    return point(2.0 * rm - t, dir + kPi); // through the antipode
                throw GeodesicDomainError("exp_map: ray through the far pole", rm);
            }
            return point(std::min(t, std::isfinite(rm) ? rm : t), dir);
        }
        if (max_radius_is_pole() && is_far_pole(x)) {
            if (t > rm + 1e-12) throw GeodesicDomainError("exp_map: ray through the apex", rm);
            return point(rm - std::min(t, rm), dir);
        }
        const double d2pi = detail::wrap_angle(dir, 2.0 * kPi);
        const double omega = detail::circle_gap(d2pi, kPi, 2.0 * kPi); // angle with the inward radial
        constexpr double kRadialTol = 1e-13;
        if (omega <= kRadialTol) {
            // inward radial ray
            if (t < x.r) return point(x.r - t, x.phi);
            if (t == x.r) return center();
            if (kind_ == SpaceKind::model_plane) {
                const double over = t - x.r;
                if (std::isfinite(rm) && over > rm + 1e-12)
                    throw GeodesicDomainError("exp_map: ray beyond the antipode", x.r + rm);
                return point(over, x.phi + kPi);
            }
            throw GeodesicDomainError("exp_map: radial ray hits the apex", x.r);
        }
        if (omega >= kPi - kRadialTol) {
            // outward radial ray
            const double reach = std::isfinite(rm) ? rm - x.r : std::numeric_limits<double>::infinity();
            if (t <= reach || !std::isfinite(rm)) return point(x.r + t, x.phi);
            if (kind_ == SpaceKind::model_plane) {
                const double over = t - reach;
                if (over > rm + 1e-12) throw GeodesicDomainError("exp_map: ray beyond the pole", reach + rm);
                return point(rm - over, x.phi + kPi);
            }
            throw GeodesicDomainError("exp_map: radial ray hits the far pole", reach);
        }
        const Kappa km = model_kappa();
        const double rho = model_side(km, x.r, t, omega);
        if (rho < 1e-300) return center();
        const double beta = detail::angle_from_sides(km, t, x.r, rho);
        const double sign = (d2pi < kPi) ? 1.0 : -1.0;
        return point(rho, x.phi + sign * beta);
    }

    SpacePoint exp_map(const TangentVector& v, double t) const { return exp_map(v.base, v.dir, t); }

    /// Direction and length of a minimizing geodesic from x to y
    /// (log_p(y) = |xy| * up-arrow). `unique` is false at ties (two ways
    /// around a cone, antipodes) and on apex-branching paths.
    DirectionResult log_direction(const SpacePoint& x, const SpacePoint& y) const {
        validate_point(x);
        validate_point(y);
        if (x == y) throw std::invalid_argument("log_direction: coincident points");
        const double rm = max_radius();
        const double period = angular_period();
        if (is_center(x)) {
            if (max_radius_is_pole() && is_far_pole(y)) return {{x, 0.0, rm}, false};
            return {{x, y.phi, y.r}, true};
        }
        if (max_radius_is_pole() && is_far_pole(x)) {
            if (is_center(y)) return {{x, 0.0, rm}, false};
            return {{x, y.phi, rm - y.r}, true};
        }
        if (is_center(y)) return {{x, kPi, x.r}, true};
        if (max_radius_is_pole() && is_far_pole(y)) return {{x, 0.0, rm - x.r}, true};

        const double sg = detail::signed_gap(x.phi, y.phi, period);
        const double gap = std::abs(sg);
        if (gap <= kPi) {
            const Kappa km = model_kappa();
            const double d = model_side(km, x.r, y.r, gap);
            const double omega = detail::angle_from_sides(km, y.r, x.r, d);
            const double dir = detail::wrap_angle(sg >= 0 ? kPi - omega : kPi + omega, 2.0 * kPi);
            bool unique = true;
            if (period < 2.0 * kPi - 1e-12 && std::abs(gap - 0.5 * period) < 1e-12) unique = false;
            if (model_kappa().value > 0) {
                const double diam = kPi / std::sqrt(model_kappa().value);
                if (std::abs(d - diam) < 1e-12) unique = false;
            }
            return {{x, dir, d}, unique};
        }
        // through-apex branch; only on cones with theta_total > 2*pi
        if (kind_ == SpaceKind::spherical_cone) {
            const double north = x.r + y.r;
            const double south = 2.0 * kPi - x.r - y.r;
            if (north <= south) return {{x, kPi, north}, false};
            return {{x, 0.0, south}, false};
        }
        return {{x, kPi, x.r + y.r}, false};
    }

    /// Point at fraction t in [0,1] along a minimizing geodesic x -> y,
    /// handling the radial paths through an apex/pole that exp_map cannot
    /// continue across.
    GeodesicPointResult geodesic_point(const SpacePoint& x, const SpacePoint& y, double t) const {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("geodesic_point: t outside [0,1]");
        if (x == y) return {x, true};
        const DirectionResult ld = log_direction(x, y);
        const double s = t * ld.v.mag;
        if (s == 0.0) return {x, ld.unique};
        if (is_center_type(x)) return {exp_map(x, ld.v.dir, s), ld.unique};
        const double d2pi = detail::wrap_angle(ld.v.dir, 2.0 * kPi);
        const double rm = max_radius();
        if (detail::circle_gap(d2pi, kPi, 2.0 * kPi) <= 1e-12) {
            // inward radial, possibly continuing through the center toward y
            if (s <= x.r) return {point(x.r - s, x.phi), ld.unique};
            if (kind_ == SpaceKind::model_plane) return {exp_map(x, ld.v.dir, s), ld.unique};
            return {point(s - x.r, y.phi), ld.unique};
        }
        if (d2pi <= 1e-12 && std::isfinite(rm)) {
            // outward radial through the far pole
            const double reach = rm - x.r;
            if (s <= reach) return {point(x.r + s, x.phi), ld.unique};
            if (kind_ == SpaceKind::model_plane) return {exp_map(x, ld.v.dir, s), ld.unique};
            return {point(rm - (s - reach), y.phi), ld.unique};
        }
        return {exp_map(x, ld.v.dir, s), ld.unique};
    }

    /// 2-dimensional Hausdorff measure of the closed ball B(x, r), by exact
    /// per-ray interval extraction and adaptive quadrature over the angle.
    double ball_volume(const SpacePoint& x, double r, double rel_tol = 1e-9) const {
        validate_point(x);
        if (!(r > 0)) throw std::invalid_argument("ball_volume: radius must be positive");
        const double period = angular_period();
        const double half = 0.5 * period;
        if (is_center_type(x)) {
            const double reff = is_far_pole(x) ? r : r; // symmetric either way
            const double cap = std::isfinite(max_radius()) ? std::min(reff, max_radius()) : reff;
            return period * weight_antiderivative(cap);
        }
        auto slice = [&](double gap) {
            double acc = 0.0;
            for (const auto& [lo, hi] : ray_intervals(x, r, gap))
                acc += weight_antiderivative(hi) - weight_antiderivative(lo);
            return acc;
        };
        std::vector<double> breaks;
        if (half > kPi) breaks.push_back(kPi);
        // tangency kink of the flat interval formula
        if (model_kappa().value == 0.0 && r < x.r) breaks.push_back(std::asin(r / x.r));
        return 2.0 * integrate_adaptive_rel(slice, 0.0, half, rel_tol, breaks);
    }

private:
    Space() = default;

    SpaceKind kind_ = SpaceKind::model_plane;
    double kappa_ = 0.0;    // model planes
    double theta_ = 0.0;    // cones
    double declared_ = 0.0; // declared curvature lower bound

    double weight_antiderivative(double rho) const {
        const double k = model_kappa().value;
        if (k == 0.0) return 0.5 * rho * rho;
        return (1.0 - cs({k}, rho)) / k;
    }

    /// {rho >= 0 : d((rho, psi), x) <= r} for a ray at angular gap `gap`.
    std::vector<std::pair<double, double>> ray_intervals(const SpacePoint& x, double r, double gap) const {
        std::vector<std::pair<double, double>> out;
        const double rm = max_radius();
        const double rho_cap = std::isfinite(rm) ? rm : x.r + r;
        if (gap > kPi) {
            // behind the apex: distance is rho + x.r (plus the south route on
            // spherical cones)
            if (r > x.r) out.emplace_back(0.0, std::min(r - x.r, rho_cap));
            if (kind_ == SpaceKind::spherical_cone) {
                const double lo = 2.0 * kPi - r - x.r;
                if (lo < rho_cap) out.emplace_back(std::max(lo, 0.0), rho_cap);
            }
            return out;
        }
        const double k = model_kappa().value;
        if (k == 0.0) {
            const double disc = r * r - x.r * x.r * std::sin(gap) * std::sin(gap);
            if (disc < 0) return out;
            const double root = std::sqrt(disc);
            const double lo = x.r * std::cos(gap) - root;
            const double hi = x.r * std::cos(gap) + root;
            if (hi <= 0) return out;
            out.emplace_back(std::max(lo, 0.0), std::min(hi, rho_cap));
            return out;
        }
        // curved models: split [0, rho_cap] at the critical points of
        // d(rho) and bisect each monotone piece for the r-crossing.
        auto dist_at = [&](double rho) { return model_side({k}, x.r, rho, gap); };
        std::vector<double> nodes{0.0};
        if (k > 0) {
            const double rt = std::sqrt(k);
            const double crit0 = std::atan2(std::sin(x.r * rt) * std::cos(gap), std::cos(x.r * rt));
            for (double c : {crit0, crit0 + kPi, crit0 - kPi, crit0 + 2.0 * kPi}) {
                const double rho_c = c / rt;
                if (rho_c > 1e-15 && rho_c < rho_cap - 1e-15) nodes.push_back(rho_c);
            }
        } else {
            const double rt = std::sqrt(-k);
            const double q = std::tanh(x.r * rt) * std::cos(gap);
            if (q > 0) {
                const double rho_c = std::atanh(q) / rt;
                if (rho_c > 1e-15 && rho_c < rho_cap - 1e-15) nodes.push_back(rho_c);
            }
        }
        nodes.push_back(rho_cap);
        std::sort(nodes.begin(), nodes.end());
        auto crossing = [&](double a, double b) {
            double fa = dist_at(a) - r;
            for (int i = 0; i < 80; ++i) {
                const double m = 0.5 * (a + b);
                const double fm = dist_at(m) - r;
                if ((fa <= 0) == (fm <= 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        };
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double a = nodes[i], b = nodes[i + 1];
            const bool ina = dist_at(a) <= r, inb = dist_at(b) <= r;
            double lo, hi;
            if (ina && inb) {
                lo = a;
                hi = b;
            } else if (!ina && !inb) {
                continue; // monotone piece entirely outside
            } else if (ina) {
                lo = a;
                hi = crossing(a, b);
            } else {
                lo = crossing(a, b);
                hi = b;
            }
            if (!out.empty() && std::abs(out.back().second - lo) < 1e-12) {
                out.back().second = hi;
            } else {
                out.emplace_back(lo, hi);
            }
        }
        return out;
    }
};

} // namespace alexkit
