#include "hyperchoq/geometry.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace hyperchoq;

namespace {
BallPoint pt(std::initializer_list<double> c) { return BallPoint{std::vector<double>(c)}; }
}  // namespace

TEST_CASE("mobius translation fixed points are exact") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        BallPoint a = testutil::random_ball_point(rng, 3);
        BallPoint zero = pt({0.0, 0.0, 0.0});
        BallPoint ta = mobius_translate(a, a);
        for (double c : ta.x) CHECK(c == 0.0);
        BallPoint t0 = mobius_translate(a, zero);
        for (std::size_t i = 0; i < 3; ++i) CHECK(t0.x[i] == doctest::Approx(a.x[i]).epsilon(1e-15));
    }
}

TEST_CASE("mobius translation is an involution") {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t dim = 2 + trial % 4;
        BallPoint a = testutil::random_ball_point(rng, dim);
        BallPoint x = testutil::random_ball_point(rng, dim);
        BallPoint y = mobius_translate(a, mobius_translate(a, x));
        for (std::size_t i = 0; i < dim; ++i)
            CHECK(y.x[i] == doctest::Approx(x.x[i]).epsilon(1e-12));
    }
}

TEST_CASE("distance from the origin to euclidean radius 1/2 is log 3") {
    BallPoint x = pt({0.5, 0.0, 0.0});
    BallPoint zero = pt({0.0, 0.0, 0.0});
    CHECK(geodesic_distance(zero, x) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(geodesic_radius(x) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("distance is invariant under mobius translation") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t dim = 2 + trial % 3;
        BallPoint a = testutil::random_ball_point(rng, dim);
        BallPoint x = testutil::random_ball_point(rng, dim);
        BallPoint y = testutil::random_ball_point(rng, dim);
        double d = geodesic_distance(x, y);
        double dt = geodesic_distance(mobius_translate(a, x), mobius_translate(a, y));
        CHECK(dt == doctest::Approx(d).epsilon(1e-10));
    }
}

TEST_CASE("distance satisfies the triangle inequality and symmetry") {
    std::mt19937_64 rng(104);
    for (int trial = 0; trial < 200; ++trial) {
        BallPoint x = testutil::random_ball_point(rng, 3, 0.95);
        BallPoint y = testutil::random_ball_point(rng, 3, 0.95);
        BallPoint z = testutil::random_ball_point(rng, 3, 0.95);
        double dxy = geodesic_distance(x, y);
        CHECK(geodesic_distance(y, x) == doctest::Approx(dxy).epsilon(1e-13));
        CHECK(dxy <= geodesic_distance(x, z) + geodesic_distance(z, y) + 1e-11);
    }
    BallPoint x = pt({0.3, 0.1});
    CHECK(geodesic_distance(x, x) == 0.0);
}

TEST_CASE("boundary guard rejects points at or beyond 1 - 1e-12") {
    BallPoint bad = pt({1.0 - 1e-13, 0.0});
    BallPoint good = pt({0.2, 0.0});
    CHECK_THROWS_AS(geodesic_distance(bad, good), std::domain_error);
    CHECK_THROWS_AS(mobius_translate(bad, good), std::domain_error);
    CHECK_THROWS_AS(geodesic_radius(bad), std::domain_error);
}

TEST_CASE("law of cosines: degenerate angles") {
    CHECK(distance_from_radii(2.0, 0.75, 0.0) == doctest::Approx(1.25).epsilon(1e-13));
    CHECK(distance_from_radii(2.0, 0.75, M_PI) == doctest::Approx(2.75).epsilon(1e-13));
    CHECK(distance_from_radii(3.0, 3.0, 0.0) == 0.0);
}

TEST_CASE("law of cosines: right angle at unit sides") {
    // Expected value derived once: cosh d = cosh(1)^2, d = acosh(cosh^2 1) = 1.5133740...
    double expected = std::acosh(std::cosh(1.0) * std::cosh(1.0));
    CHECK(expected == doctest::Approx(1.5133740066).epsilon(1e-9));
    CHECK(distance_from_radii(1.0, 1.0, M_PI / 2.0) == doctest::Approx(expected).epsilon(1e-14));
    // Independent route through explicit ball points on orthogonal axes.
    BallPoint x = from_polar(1.0, {1.0, 0.0, 0.0});
    BallPoint y = from_polar(1.0, {0.0, 1.0, 0.0});
    CHECK(geodesic_distance(x, y) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("law of cosines agrees with explicit ball points at random angles") {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> unif;
    for (int trial = 0; trial < 100; ++trial) {
        double r = 3.0 * unif(rng), s = 3.0 * unif(rng), theta = M_PI * unif(rng);
        BallPoint x = from_polar(r, {1.0, 0.0, 0.0});
        BallPoint y = from_polar(s, {std::cos(theta), std::sin(theta), 0.0});
        CHECK(distance_from_radii(r, s, theta) ==
              doctest::Approx(geodesic_distance(x, y)).epsilon(1e-11));
    }
}

TEST_CASE("law of cosines is stable for large radii") {
    double d = distance_from_radii(200.0, 190.0, 0.0);
    CHECK(d == doctest::Approx(10.0).epsilon(1e-12));
    double d2 = distance_from_radii(200.0, 200.0, 1e-3);
    CHECK(std::isfinite(d2));
    CHECK(d2 > 0.0);
    // theta = pi at large radii: d = r + s up to exponentially small terms
    CHECK(distance_from_radii(180.0, 185.0, M_PI) == doctest::Approx(365.0).epsilon(1e-12));
    // coincident points at large radius
    CHECK(distance_from_radii(175.0, 175.0, 0.0) == 0.0);
}

TEST_CASE("reflection is an involutive isometry fixing the hypersurface") {
    std::mt19937_64 rng(106);
    for (int trial = 0; trial < 50; ++trial) {
        GeodesicHypersurface H{testutil::random_ball_point(rng, 3, 0.5),
                               testutil::random_unit_vector(rng, 3)};
        BallPoint x = testutil::random_ball_point(rng, 3);
        BallPoint y = testutil::random_ball_point(rng, 3);

        BallPoint xr = reflect(H, reflect(H, x));
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(xr.x[i] == doctest::Approx(x.x[i]).epsilon(1e-11));

        CHECK(geodesic_distance(reflect(H, x), reflect(H, y)) ==
              doctest::Approx(geodesic_distance(x, y)).epsilon(1e-10));

        // Points built on H stay put: z orthogonal to the normal, pushed by the anchor.
        std::vector<double> z = testutil::random_unit_vector(rng, 3);
        double zn = z[0] * H.normal[0] + z[1] * H.normal[1] + z[2] * H.normal[2];
        for (std::size_t i = 0; i < 3; ++i) z[i] = 0.4 * (z[i] - zn * H.normal[i]);
        BallPoint on_h = mobius_translate(H.anchor, BallPoint{z});
        BallPoint fixed = reflect(H, on_h);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(fixed.x[i] == doctest::Approx(on_h.x[i]).epsilon(1e-11));
        CHECK(half_space_side(H, on_h) == Side::on);
    }
}

TEST_CASE("half space side classification and reflection swap") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 50; ++trial) {
        GeodesicHypersurface H{testutil::random_ball_point(rng, 3, 0.4),
                               testutil::random_unit_vector(rng, 3)};
        BallPoint origin = pt({0.0, 0.0, 0.0});
        if (half_space_side(H, origin) == Side::on) continue;
        CHECK(half_space_side(H, origin) == Side::plus);  // plus side contains the origin
        BallPoint x = testutil::random_ball_point(rng, 3);
        Side sx = half_space_side(H, x);
        if (sx == Side::on) continue;
        Side sr = half_space_side(H, reflect(H, x));
        CHECK(static_cast<int>(sx) == -static_cast<int>(sr));
    }
}
