#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "alexkit/rng.hpp"
#include "alexkit/spaces.hpp"

using namespace alexkit;
using Catch::Approx;

namespace {
SpacePoint sample_in(const Space& s, Rng& rng, double r_hi) {
    const double rm = s.max_radius();
    const double cap = std::isfinite(rm) ? std::min(r_hi, rm * 0.95) : r_hi;
    const double r = cap * std::sqrt(rng.uniform());
    return s.point(r, rng.uniform(0.0, s.angular_period()));
}
} // namespace

TEST_CASE("cone distances: unfolding formula and apex routes") {
    const Space plane_like = Space::euclidean_cone(2.0 * kPi);
    CHECK(plane_like.distance({1.0, 0.0}, plane_like.point(1.0, kPi)) == Approx(2.0).epsilon(1e-14));

    const Space half = Space::euclidean_cone(kPi);
    CHECK(half.distance({1.0, 0.0}, half.point(1.0, kPi / 2)) == Approx(std::sqrt(2.0)).epsilon(1e-14));

    const Space cone = Space::euclidean_cone(1.5 * kPi);
    CHECK(cone.distance(cone.center(), {0.7, 1.0}) == Approx(0.7).epsilon(1e-15));

    // theta > 2*pi: gaps beyond pi go through the apex
    const Space wide = Space::euclidean_cone(2.5 * kPi);
    const SpacePoint a = wide.point(1.0, 0.0);
    const SpacePoint b = wide.point(2.0, 1.1 * kPi);
    CHECK(wide.distance(a, b) == Approx(3.0).epsilon(1e-14));
}

TEST_CASE("euclidean_cone(2pi) is the flat plane") {
    const Space cone = Space::euclidean_cone(2.0 * kPi);
    const Space plane = Space::model_plane(0.0);
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const SpacePoint x = sample_in(cone, rng, 3.0);
        const SpacePoint y = sample_in(cone, rng, 3.0);
        CHECK(cone.distance(x, y) == Approx(plane.distance(x, y)).margin(1e-12));
    }
}

TEST_CASE("model plane distances match 2-point closed forms") {
    const Space hyp = Space::model_plane(-1.0);
    // law of cosines through the origin chart vs a direct polar pair
    const SpacePoint x = hyp.point(0.8, 0.3);
    const SpacePoint y = hyp.point(1.4, 2.1);
    const double expect = std::acosh(std::cosh(0.8) * std::cosh(1.4) -
                                     std::sinh(0.8) * std::sinh(1.4) * std::cos(1.8));
    CHECK(hyp.distance(x, y) == Approx(expect).epsilon(1e-13));

    const Space sph = Space::model_plane(1.0);
    const SpacePoint u = sph.point(0.5, 0.0);
    const SpacePoint v = sph.point(1.2, 1.0);
    const double ex2 = std::acos(std::cos(0.5) * std::cos(1.2) + std::sin(0.5) * std::sin(1.2) * std::cos(1.0));
    CHECK(sph.distance(u, v) == Approx(ex2).epsilon(1e-13));
}

TEST_CASE("spherical cone over a 2pi circle matches the round sphere") {
    const Space sc = Space::spherical_cone(2.0 * kPi);
    const Space sph = Space::model_plane(1.0);
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const SpacePoint x = sample_in(sc, rng, 3.0);
        const SpacePoint y = sample_in(sc, rng, 3.0);
        CHECK(sc.distance(x, y) == Approx(sph.distance(x, y)).margin(1e-12));
    }
    // poles
    CHECK(sc.distance(sc.point(kPi, 1.0), sc.point(0.4, 2.0)) == Approx(kPi - 0.4).epsilon(1e-14));
}

TEST_CASE("triangle inequality holds on random triples") {
    Rng rng(9);
    const Space spaces[] = {Space::euclidean_cone(1.5 * kPi), Space::euclidean_cone(2.5 * kPi),
                            Space::model_plane(-1.0), Space::model_plane(1.0), Space::spherical_cone(1.5 * kPi)};
    for (const Space& s : spaces) {
        for (int i = 0; i < 2000; ++i) {
            const SpacePoint a = sample_in(s, rng, 2.0);
            const SpacePoint b = sample_in(s, rng, 2.0);
            const SpacePoint c = sample_in(s, rng, 2.0);
            CHECK(s.distance(a, c) <= s.distance(a, b) + s.distance(b, c) + 1e-12);
            CHECK(s.distance(a, b) == Approx(s.distance(b, a)).margin(1e-15));
        }
    }
}

TEST_CASE("exp_map basics") {
    const Space cone = Space::euclidean_cone(1.5 * kPi);
    // radial ray from the apex
    const SpacePoint p = cone.exp_map(cone.center(), 2.0, 0.75);
    CHECK(p.r == Approx(0.75));
    CHECK(p.phi == Approx(2.0));
    // unfolding example: from (1,0), orthogonal to the radial direction,
    // toward increasing phi, arclength 1 -> (sqrt 2, pi/4)
    const SpacePoint q = cone.exp_map({1.0, 0.0}, kPi / 2, 1.0);
    CHECK(q.r == Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(q.phi == Approx(kPi / 4).epsilon(1e-12));
    // flat plane from origin: any direction lands at distance t
    const Space plane = Space::model_plane(0.0);
    const SpacePoint z = plane.exp_map(plane.center(), 1.234, 2.0);
    CHECK(plane.distance(plane.center(), z) == Approx(2.0).epsilon(1e-14));
    // inward radial through a cone apex is domain-exceeded beyond r
    CHECK_THROWS_AS(cone.exp_map({0.5, 0.0}, kPi, 0.6), GeodesicDomainError);
    try {
        cone.exp_map({0.5, 0.0}, kPi, 0.6);
    } catch (const GeodesicDomainError& e) {
        CHECK(e.max_t == Approx(0.5));
    }
    // on a model plane the same ray passes through the origin
    const SpacePoint w = plane.exp_map({0.5, 0.3}, kPi, 0.8);
    CHECK(w.r == Approx(0.3).epsilon(1e-13));
    CHECK(w.phi == Approx(0.3 + kPi).epsilon(1e-12));
}

TEST_CASE("geodesic speed along exp rays") {
    Rng rng(17);
    const Space spaces[] = {Space::euclidean_cone(1.5 * kPi), Space::model_plane(-1.0),
                            Space::model_plane(1.0), Space::spherical_cone(1.5 * kPi)};
    for (const Space& s : spaces) {
        for (int i = 0; i < 300; ++i) {
            const SpacePoint x = sample_in(s, rng, 1.5);
            if (s.is_center_type(x)) continue;
            const double dir = rng.uniform(0.0, 2.0 * kPi);
            const double t1 = rng.uniform(0.01, 0.3), t2 = rng.uniform(0.01, 0.3);
            SpacePoint a, b;
            try {
                a = s.exp_map(x, dir, t1);
                b = s.exp_map(x, dir, t2);
            } catch (const GeodesicDomainError&) {
                continue;
            }
            CHECK(s.distance(a, b) == Approx(std::abs(t1 - t2)).margin(1e-9));
        }
    }
}

TEST_CASE("exp/log round trip on unique-geodesic pairs") {
    Rng rng(23);
    const Space spaces[] = {Space::euclidean_cone(1.5 * kPi), Space::euclidean_cone(2.0 * kPi),
                            Space::model_plane(-1.0), Space::model_plane(0.0), Space::model_plane(1.0),
                            Space::spherical_cone(1.5 * kPi)};
    for (const Space& s : spaces) {
        int done = 0;
        for (int i = 0; done < 500 && i < 3000; ++i) {
            const SpacePoint x = sample_in(s, rng, 1.5);
            const SpacePoint y = sample_in(s, rng, 1.5);
            if (x == y) continue;
            const DirectionResult ld = s.log_direction(x, y);
            if (!ld.unique) continue;
            CHECK(ld.v.mag == Approx(s.distance(x, y)).margin(1e-12));
            SpacePoint back;
            try {
                back = s.exp_map(x, ld.v.dir, ld.v.mag);
            } catch (const GeodesicDomainError&) {
                continue; // radial leg ending exactly at an apex measure-zero case
            }
            CHECK(s.distance(back, y) < 1e-9);
            ++done;
        }
        CHECK(done == 500);
    }
}

TEST_CASE("log_direction special cases and uniqueness flags") {
    const Space cone = Space::euclidean_cone(1.5 * kPi);
    // toward the apex: inward radial
    const DirectionResult to_apex = cone.log_direction({2.0, 0.7}, cone.center());
    CHECK(to_apex.v.dir == Approx(kPi));
    CHECK(to_apex.v.mag == Approx(2.0));
    CHECK(to_apex.unique);
    // from the apex: the ray at phi
    const DirectionResult from_apex = cone.log_direction(cone.center(), {1.5, 0.9});
    CHECK(from_apex.v.dir == Approx(0.9));
    CHECK(from_apex.v.mag == Approx(1.5));
    // exact two-ways-around tie
    const Space narrow = Space::euclidean_cone(kPi);
    const DirectionResult tie = narrow.log_direction({1.0, 0.0}, narrow.point(1.0, kPi / 2));
    CHECK_FALSE(tie.unique);
    // through-apex branch on a wide cone
    const Space wide = Space::euclidean_cone(2.5 * kPi);
    const DirectionResult through = wide.log_direction(wide.point(1.0, 0.0), wide.point(1.0, 1.15 * kPi));
    CHECK_FALSE(through.unique);
    CHECK(through.v.dir == Approx(kPi));
    CHECK(through.v.mag == Approx(2.0));
    // antipodal points on the sphere
    const Space sph = Space::model_plane(1.0);
    CHECK_FALSE(sph.log_direction(sph.point(0.5, 0.0), sph.point(kPi - 0.5, kPi)).unique);
    CHECK_THROWS_AS(cone.log_direction({1.0, 0.5}, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("geodesic_point runs through apexes where needed") {
    const Space wide = Space::euclidean_cone(2.5 * kPi);
    const SpacePoint q = wide.point(1.0, 0.0);
    const SpacePoint r = wide.point(2.0, 1.2 * kPi);
    const auto mid = wide.geodesic_point(q, r, 1.0 / 3.0);
    CHECK(mid.x.r == Approx(0.0).margin(1e-12)); // 1/3 of length 3 = the apex
    const auto late = wide.geodesic_point(q, r, 2.0 / 3.0);
    CHECK(late.x.r == Approx(1.0).epsilon(1e-12));
    CHECK(late.x.phi == Approx(r.phi).epsilon(1e-12));
}

TEST_CASE("directions_circle_length") {
    const Space cone = Space::euclidean_cone(1.5 * kPi);
    CHECK(cone.directions_circle_length(cone.center()) == Approx(1.5 * kPi));
    CHECK(cone.directions_circle_length({0.5, 1.0}) == Approx(2.0 * kPi));
    const Space sc = Space::spherical_cone(kPi);
    CHECK(sc.directions_circle_length(sc.center()) == Approx(kPi));
    CHECK(sc.directions_circle_length(sc.point(kPi, 0.0)) == Approx(kPi));
    CHECK(sc.directions_circle_length(sc.point(1.0, 2.0)) == Approx(2.0 * kPi));
    const Space mp = Space::model_plane(-1.0);
    CHECK(mp.directions_circle_length(mp.center()) == Approx(2.0 * kPi));
}

TEST_CASE("ball volumes: closed forms") {
    const Space cone = Space::euclidean_cone(1.5 * kPi);
    for (double r : {0.3, 1.0, 2.5}) {
        CHECK(cone.ball_volume(cone.center(), r) == Approx(1.5 * kPi * r * r / 2).epsilon(1e-10));
    }
    const Space plane = Space::model_plane(0.0);
    CHECK(plane.ball_volume({1.3, 0.7}, 0.9) == Approx(kPi * 0.81).epsilon(1e-8));
    const Space hyp = Space::model_plane(-1.0);
    for (double r : {0.5, 1.0, 2.0}) {
        CHECK(hyp.ball_volume(hyp.center(), r) == Approx(2 * kPi * (std::cosh(r) - 1)).epsilon(1e-9));
        CHECK(hyp.ball_volume({0.8, 1.0}, r) == Approx(2 * kPi * (std::cosh(r) - 1)).epsilon(1e-8));
    }
    const Space sph = Space::model_plane(1.0);
    CHECK(sph.ball_volume({0.4, 0.2}, 1.0) == Approx(2 * kPi * (1 - std::cos(1.0))).epsilon(1e-8));
    // whole sphere once r exceeds the diameter
    CHECK(sph.ball_volume({0.4, 0.2}, 3.5) == Approx(4 * kPi).epsilon(1e-9));
    // off-center flat-cone ball not covering the apex still has plane volume
    CHECK(cone.ball_volume({2.0, 0.0}, 0.5) == Approx(kPi * 0.25).epsilon(1e-8));
}

TEST_CASE("off-center cone ball covering the apex loses the missing sector") {
    // exact value: integrate the two-branch formula; for r > x.r the ball
    // contains the apex and the behind-the-apex region is a disk sector of
    // radius r - x.r over the extra angle (theta - 2*pi < 0 shrinks it).
    const Space cone = Space::euclidean_cone(1.5 * kPi);
    const SpacePoint x{0.5, 0.0};
    const double r = 2.0;
    // reference by dense midpoint integration in (rho, psi)
    const int n = 4000;
    double acc = 0.0;
    const double period = cone.angular_period();
    for (int i = 0; i < n; ++i) {
        const double psi = (i + 0.5) * period / n;
        const double gap = std::min(std::abs(psi - x.phi), period - std::abs(psi - x.phi));
        // rho range on this ray
        const double lim = 4.0;
        const int m = 3000;
        double lo = lim, hi = 0.0;
        for (int j = 0; j < m; ++j) {
            const double rho = (j + 0.5) * lim / m;
            double d;
            if (gap <= kPi)
                d = std::sqrt(rho * rho + x.r * x.r - 2 * rho * x.r * std::cos(gap));
            else
                d = rho + x.r;
            if (d <= r) {
                lo = std::min(lo, rho);
                hi = std::max(hi, rho);
            }
        }
        if (hi > 0.0) acc += (hi * hi - lo * lo) / 2 * (period / n);
    }
    CHECK(cone.ball_volume(x, r) == Approx(acc).epsilon(2e-3));
}
