#include <doctest.h>

#include <cmath>

#include "dtqw/coin_field.hpp"

using namespace dtqw;

TEST_CASE("angle wrapping respects the 4pi coin period") {
    CHECK(wrap_angle_4pi(0.3) == doctest::Approx(0.3));
    CHECK(wrap_angle_4pi(4.0 * pi + 0.3) == doctest::Approx(0.3));
    CHECK(wrap_angle_4pi(-4.0 * pi + 0.3) == doctest::Approx(0.3));
    CHECK(wrap_angle_4pi(3.0 * pi) == doctest::Approx(-pi));
    CHECK(wrap_to_pi(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
    CHECK(wrap_to_pi(pi) == doctest::Approx(pi));
}

TEST_CASE("optics presets reproduce the published resolutions") {
    // 1D apparatus: R_A = 4.8 lattice constants; 2D: R_A = 0.8.
    CHECK(abbe_ratio(OpticsConfig::setup_1d()) == doctest::Approx(4.8).epsilon(0.02));
    CHECK(abbe_ratio(OpticsConfig::setup_2d()) == doctest::Approx(0.8).epsilon(0.02));
    CHECK(abbe_ratio(OpticsConfig::from_ratio(0.4)) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(OpticsConfig::setup_1d().psf_sigma() / OpticsConfig::setup_1d().abbe_radius() ==
          doctest::Approx(std::sqrt(2.0) / pi).epsilon(1e-14));
    CHECK_THROWS_AS(OpticsConfig::from_ratio(0.0), std::invalid_argument);
    CHECK_THROWS_AS((OpticsConfig{1.5, 894.0, 433.0}).validate(), std::invalid_argument);
}

TEST_CASE("the erf crossover interpolates between its plateaus") {
    const OpticsConfig o = OpticsConfig::setup_2d();
    const double tl = -pi / 2.0, tr = pi / 2.0;
    CHECK(erf_crossover(tl, tr, o, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(erf_crossover(tl, tr, o, -50.0) == doctest::Approx(tl).epsilon(1e-12));
    CHECK(erf_crossover(tl, tr, o, 50.0) == doctest::Approx(tr).epsilon(1e-12));
    // Odd symmetry about the wall.
    for (double x : {0.3, 1.0, 2.7})
        CHECK(erf_crossover(tl, tr, o, x) + erf_crossover(tl, tr, o, -x) ==
              doctest::Approx(tl + tr).epsilon(1e-12));
    // Monotone profile.
    double prev = erf_crossover(tl, tr, o, -5.0);
    for (double x = -4.5; x <= 5.0; x += 0.5) {
        const double cur = erf_crossover(tl, tr, o, x);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("a wall field keeps theta1 homogeneous when both sides share it") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const CoinField f = wall_field_1d(g, {-pi / 2.0, pi / 4.0}, {-pi / 2.0, 3.0 * pi / 4.0},
                                      OpticsConfig::setup_2d());
    for (std::int64_t s = 0; s < g.n_sites(); ++s)
        CHECK(f.theta1(s) == doctest::Approx(-pi / 2.0).epsilon(1e-12));
    CHECK(f.theta2(g.site_index({-80, 0})) == doctest::Approx(pi / 4.0).epsilon(1e-9));
    CHECK(f.theta2(g.site_index({80, 0})) == doctest::Approx(3.0 * pi / 4.0).epsilon(1e-9));
    CHECK(f.theta2(g.site_index({0, 0})) == doctest::Approx(pi / 2.0).epsilon(1e-12));
    // The 2D-apparatus resolution crosses over within about two sites.
    CHECK(f.theta2(g.site_index({-2, 0})) == doctest::Approx(pi / 4.0).epsilon(1e-3));
    CHECK(f.theta2(g.site_index({2, 0})) == doctest::Approx(3.0 * pi / 4.0).epsilon(1e-3));
}

TEST_CASE("droplet shape geometry: membership and contour") {
    DropletShape shape;  // disc radius 12, triangle apex at y = 18
    CHECK(shape.inside(0.0, 0.0));
    CHECK(shape.inside(11.9, 0.0));
    CHECK(!shape.inside(12.5, 0.0));
    CHECK(shape.inside(0.0, 17.5));   // just below the apex
    CHECK(!shape.inside(0.0, 18.5));  // above it
    CHECK(!shape.inside(5.9, 17.0));  // beside the narrowing triangle tip

    const double len = shape.contour_length();
    // Perimeter below the full circle plus the two triangle sides.
    CHECK(len > 2.0 * pi * shape.radius * 0.8);
    CHECK(len < 2.0 * pi * shape.radius + 4.0 * (shape.apex_y - shape.radius));

    const auto poly = shape.contour_polyline(4096);
    double poly_len = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto [x0, y0] = poly[i];
        const auto [x1, y1] = poly[(i + 1) % poly.size()];
        poly_len += std::hypot(x1 - x0, y1 - y0);
    }
    CHECK(poly_len == doctest::Approx(len).epsilon(1e-3));

    DropletShape bad = shape;
    bad.apex_y = 5.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("the smoothed indicator saturates away from the boundary") {
    const LatticeGeometry g = LatticeGeometry::plane(61, 61);
    DropletShape shape;
    const auto ind = smoothed_indicator(g, shape, OpticsConfig::setup_2d());
    for (double v : ind) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(ind[static_cast<std::size_t>(g.site_index({0, 0}))] ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ind[static_cast<std::size_t>(g.site_index({25, -25}))] ==
          doctest::Approx(0.0).epsilon(1e-6));
    // Near the circular boundary the indicator sits mid-slope.
    const double edge = ind[static_cast<std::size_t>(g.site_index({12, 0}))];
    CHECK(edge > 0.05);
    CHECK(edge < 0.95);
}

TEST_CASE("island fields interpolate the angle pair along the indicator") {
    const LatticeGeometry g = LatticeGeometry::plane(61, 61);
    DropletShape shape;
    const std::pair<double, double> in{pi / 5.0, 4.0 * pi / 5.0};
    const std::pair<double, double> out{4.0 * pi / 5.0, pi / 5.0};
    const CoinField f = island_field(g, shape, in, out, OpticsConfig::setup_2d());
    const auto deep = g.site_index({0, 0});
    const auto far = g.site_index({25, -25});
    CHECK(f.theta1(deep) == doctest::Approx(in.first).epsilon(1e-6));
    CHECK(f.theta2(deep) == doctest::Approx(in.second).epsilon(1e-6));
    CHECK(f.theta1(far) == doctest::Approx(out.first).epsilon(1e-6));
    CHECK(f.theta2(far) == doctest::Approx(out.second).epsilon(1e-6));
    // Interpolation is the straight segment between the two angle pairs, so
    // theta1 + theta2 is conserved when the endpoints sum equally.
    for (std::int64_t s = 0; s < g.n_sites(); ++s)
        CHECK(f.theta1(s) + f.theta2(s) == doctest::Approx(pi).epsilon(1e-9));
}

TEST_CASE("strip profiles place the inside angles between two walls") {
    const auto prof =
        strip_profile(100, 20.0, {pi / 5.0, 4.0 * pi / 5.0}, {4.0 * pi / 5.0, pi / 5.0},
                      OpticsConfig::setup_2d());
    REQUIRE(prof.size() == 100);
    // Centered coordinates: index 50 is y = 0 (deep inside).
    CHECK(prof[50].first == doctest::Approx(pi / 5.0).epsilon(1e-6));
    CHECK(prof[50].second == doctest::Approx(4.0 * pi / 5.0).epsilon(1e-6));
    // y = -45 is deep outside.
    CHECK(prof[5].first == doctest::Approx(4.0 * pi / 5.0).epsilon(1e-6));
    CHECK(prof[5].second == doctest::Approx(pi / 5.0).epsilon(1e-6));
}
