#include <doctest.h>

#include <cmath>
#include <complex>

#include "dtqw/bloch.hpp"
#include "dtqw/errors.hpp"

using namespace dtqw;

TEST_CASE("the Hadamard-angle walk has the textbook dispersion") {
    // cos eps(k) = cos(k)/sqrt(2) for (theta1, theta2) = (pi/2, 0).
    const QuasienergySpectrum spec = bloch_bands(split_step_1d(), pi / 2.0, 0.0, 256);
    REQUIRE(spec.k.size() == 256);
    for (std::size_t i = 0; i < spec.k.size(); ++i)
        CHECK(std::cos(spec.epsilon[i]) ==
              doctest::Approx(std::cos(spec.k[i]) / std::sqrt(2.0)).epsilon(1e-12));
    // Both gaps have width pi/2 (band edges at eps = pi/4 and 3 pi/4).
    CHECK(spec.gap0 == doctest::Approx(pi / 2.0).epsilon(1e-12));
    CHECK(spec.gap_pi == doctest::Approx(pi / 2.0).epsilon(1e-12));
}

TEST_CASE("su2 decomposition inverts the exponential map") {
    const double eps = 0.8;
    const std::array<double, 3> n{0.6, -0.48, 0.64};  // unit vector
    Eigen::Matrix2cd sigma_dot_n;
    sigma_dot_n << cx(n[2], 0.0), cx(n[0], -n[1]), cx(n[0], n[1]), cx(-n[2], 0.0);
    const Eigen::Matrix2cd w = std::cos(eps) * Eigen::Matrix2cd::Identity() -
                               cx(0.0, 1.0) * std::sin(eps) * sigma_dot_n;
    const BlochDecomposition d = decompose_su2(w);
    CHECK(d.epsilon == doctest::Approx(eps).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(d.axis[i] == doctest::Approx(n[i]).epsilon(1e-12));
}

TEST_CASE("bloch operators are special-unitary for every protocol") {
    for (double k : {-2.0, 0.0, 0.4, pi}) {
        const Eigen::Matrix2cd w = bloch_operator(split_step_1d(), 0.7, -1.9, {k});
        CHECK(std::abs(std::abs(w.determinant()) - 1.0) < 1e-13);
        CHECK((w * w.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-13);
    }
    const Eigen::Matrix2cd w2 = bloch_operator(walk_2d(), 0.7, -1.9, {0.3, -1.1});
    CHECK((w2 * w2.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("frame windings hit the anchor values") {
    CHECK(winding_number(ChiralFrame::frame_prime, pi / 2.0, 0.0) == 1);
    CHECK(winding_number(ChiralFrame::frame_double_prime, pi / 2.0, 0.0) == 0);
    // Reversing the Brillouin-zone loop negates the winding.
    CHECK(winding_number(ChiralFrame::frame_prime, pi / 2.0, 0.0, 256, true) == -1);
}

TEST_CASE("invariant pairs distinguish the wall's two phases") {
    const TopologicalClassification left = classify_1d(-pi / 2.0, pi / 4.0);
    CHECK(left.nu_0 == 0);
    CHECK(left.nu_pi == 0);
    const TopologicalClassification right = classify_1d(-pi / 2.0, 3.0 * pi / 4.0);
    CHECK(right.nu_0 == 1);
    CHECK(right.nu_pi == 0);
    const auto [nu0, nupi] = invariants_1d(pi / 2.0, 0.0);
    CHECK(nu0 == 1);
    CHECK(nupi == 1);
}

TEST_CASE("closed gaps make the winding ill-defined") {
    // theta1 + theta2 = 0 closes the 0 gap at k = 0.
    CHECK_THROWS_AS((void)winding_number(ChiralFrame::frame_prime, 0.4, -0.4),
                    GapClosedError);
    CHECK_THROWS_AS((void)classify_1d(0.4, -0.4), GapClosedError);
}

TEST_CASE("2d bulk gaps open inside the island phases and close at theta = 0") {
    const auto [g0_in, gpi_in] = min_gaps(walk_2d(), pi / 5.0, 4.0 * pi / 5.0, 64);
    CHECK(g0_in > 0.1);
    CHECK(gpi_in > 0.1);
    const auto [g0_out, gpi_out] = min_gaps(walk_2d(), 4.0 * pi / 5.0, pi / 5.0, 64);
    CHECK(g0_out > 0.1);
    CHECK(gpi_out > 0.1);
    // Identity coins leave a gapless free walk. An even grid puts the
    // closure momenta (kx + ky = 0 and pi) exactly on sampled points.
    const auto [g0_triv, gpi_triv] = min_gaps(walk_2d(), 0.0, 0.0, 64);
    CHECK(g0_triv < 1e-9);
    CHECK(gpi_triv < 1e-9);
}

TEST_CASE("gap scans tabulate both gaps over the angle grid") {
    const std::vector<double> grid{-pi / 2.0, 0.0, pi / 2.0};
    const auto scan = gap_scan_2d(grid, grid, 64);
    REQUIRE(scan.size() == 9);
    bool found_origin = false;
    for (const GapScanEntry& e : scan) {
        CHECK(e.gap0 >= 0.0);
        CHECK(e.gap_pi >= 0.0);
        if (e.theta1 == 0.0 && e.theta2 == 0.0) {
            found_origin = true;
            CHECK(e.gap0 < 1e-9);  // the gapless free walk
        }
    }
    CHECK(found_origin);
}

TEST_CASE("a small strip resolves two counter-propagating modes per gap") {
    StripConfig cfg;
    cfg.ny = 40;
    cfg.half_height = 10.0;
    cfg.inside_angles = {pi / 5.0, 4.0 * pi / 5.0};
    cfg.outside_angles = {4.0 * pi / 5.0, pi / 5.0};
    cfg.kx_points = 48;
    cfg.bz_points = 64;
    const StripSpectrum spec = strip_spectrum(cfg);
    REQUIRE(spec.kx.size() == 48);
    REQUIRE(spec.modes.size() == 48);
    for (const auto& col : spec.modes) {
        CHECK(col.size() == 80);  // 2 * ny bands per k_x
        for (const StripMode& m : col) {
            CHECK(m.epsilon <= pi + 1e-12);
            CHECK(m.epsilon > -pi - 1e-12);
        }
    }
    for (std::size_t i = 0; i < spec.kx.size(); ++i) {
        CHECK(spec.gap0_half[i] > 0.05);
        CHECK(spec.gap_pi_half[i] > 0.05);
    }
    // Net chirality: two modes per gap on each wall, opposite between walls.
    const EdgeModeCount c0 = edge_mode_count(spec, GapCenter::zero);
    const EdgeModeCount cpi = edge_mode_count(spec, GapCenter::pi);
    CHECK(std::abs(c0.lower) == 2);
    CHECK(c0.upper == -c0.lower);
    CHECK(std::abs(cpi.lower) == 2);
    CHECK(cpi.upper == -cpi.lower);
}

TEST_CASE("band sampling rejects under-resolved grids") {
    CHECK_THROWS_AS((void)bloch_bands(split_step_1d(), 0.1, 0.2, 32), std::invalid_argument);
    CHECK_THROWS_AS((void)winding_number(ChiralFrame::frame_prime, pi / 2.0, 0.0, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)bloch_bands(walk_2d(), 0.1, 0.2, 128), std::invalid_argument);
}
