#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dtqw/state.hpp"

using namespace dtqw;

TEST_CASE("centered coordinates cover the lattice symmetrically") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    CHECK(g.coord_min(0) == -100);
    CHECK(g.coord_max(0) == 100);
    CHECK(g.n_sites() == 201);
    CHECK(g.basis_size() == 402);
    CHECK(g.contains({0, 0}));
    CHECK(g.contains({-100, 0}));
    CHECK(!g.contains({101, 0}));

    const LatticeGeometry p = LatticeGeometry::plane(121, 121, Boundary::absorbing_guard);
    CHECK(p.coord_min(1) == -60);
    CHECK(p.any_absorbing());
    for (const Coord c : {Coord{0, 0}, Coord{-60, 60}, Coord{17, -41}}) {
        CHECK(p.site_coord(p.site_index(c)) == c);
        CHECK(p.basis_index(c, Spin::down) == p.basis_index(c, Spin::up) + 1);
    }
}

TEST_CASE("basis states are normalized and concentrated") {
    const LatticeGeometry g = LatticeGeometry::line(9);
    const SpinorState psi = SpinorState::basis_state(g, {2, 0}, Spin::down);
    CHECK(psi.norm_sq() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(psi.amplitude({2, 0}, Spin::down) - cx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(psi.amplitude({2, 0}, Spin::up)) == 0.0);

    const auto dist = position_distribution(psi);
    CHECK(dist[static_cast<std::size_t>(g.site_index({2, 0}))] == doctest::Approx(1.0));
    CHECK(position_distribution_1d(psi).at(2) == doctest::Approx(1.0));
}

TEST_CASE("position distributions reject unnormalized input") {
    const LatticeGeometry g = LatticeGeometry::line(5);
    SpinorState psi = SpinorState::basis_state(g, {0, 0}, Spin::up);
    for (auto& a : psi.amplitudes()) a *= 2.0;
    CHECK_THROWS_AS((void)position_distribution(psi), std::invalid_argument);
}

TEST_CASE("region probabilities agree between pure and dense representations") {
    const LatticeGeometry g = LatticeGeometry::line(11);
    SpinorState psi(g);
    for (std::int64_t i = 0; i < g.basis_size(); ++i)
        psi.amplitudes()[static_cast<std::size_t>(i)] =
            cx(std::cos(0.7 * static_cast<double>(i) + 0.2),
               std::sin(1.3 * static_cast<double>(i)));
    psi.normalize();

    const Region left = Region::interval(g, -5, -1);
    const Region right = Region::interval(g, 0, 5);
    const DensityOperator rho = DensityOperator::pure(psi);

    CHECK(region_probability(psi, left) + region_probability(psi, right) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(region_probability(psi, left) ==
          doctest::Approx(region_probability(rho, left)).epsilon(1e-12));
    CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.hermiticity_error() < 1e-14);
    CHECK(rho.overlap(psi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the maximally mixed state is flat and positive") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const DensityOperator rho = DensityOperator::maximally_mixed(g);
    CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rho.min_eigenvalue() == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    const auto dist = position_distribution(rho);
    for (double p : dist) CHECK(p == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("overlap probability is symmetric and bounded") {
    const LatticeGeometry g = LatticeGeometry::line(7);
    SpinorState a = SpinorState::basis_state(g, {0, 0}, Spin::up);
    SpinorState b(g);
    b.amplitude({0, 0}, Spin::up) = cx(0.6, 0.0);
    b.amplitude({1, 0}, Spin::down) = cx(0.0, 0.8);
    CHECK(overlap_probability(a, b) == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(overlap_probability(b, a) == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("state snapshots survive a write/read cycle") {
    const LatticeGeometry g = LatticeGeometry::plane(5, 3);
    SpinorState psi(g);
    for (std::int64_t i = 0; i < g.basis_size(); ++i)
        psi.amplitudes()[static_cast<std::size_t>(i)] =
            cx(0.1 * static_cast<double>(i), -0.05 * static_cast<double>(i));
    psi.normalize();

    std::stringstream ss;
    write_state_snapshot(ss, psi, 17);
    const SpinorState back = read_state_snapshot(ss);
    REQUIRE(back.geometry() == g);
    for (std::int64_t i = 0; i < g.basis_size(); ++i)
        CHECK(std::abs(back.amplitudes()[static_cast<std::size_t>(i)] -
                       psi.amplitudes()[static_cast<std::size_t>(i)]) < 1e-12);
}
