#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "dtqw/errors.hpp"
#include "dtqw/linalg.hpp"
#include "dtqw/protocol.hpp"

using namespace dtqw;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

SpinorState stepped(const WalkProtocol& proto, const CoinField& field, Coord c, Spin s,
                    int n = 1) {
    SpinorState psi = SpinorState::basis_state(field.geometry(), c, s);
    const CompiledStep w(proto, field);
    for (int i = 0; i < n; ++i) step(psi, w);
    return psi;
}

}  // namespace

TEST_CASE("one Hadamard-angle step from |0,down>") {
    // W |0,down> = (-|1,up> + |-1,down>) / sqrt(2) for (theta1, theta2) = (pi/2, 0):
    // the coin rotates |down> to (-|up> + |down>)/sqrt(2), the shifts then
    // separate the two spin components by one site each way.
    const LatticeGeometry g = LatticeGeometry::line(9);
    const CoinField f = CoinField::homogeneous(g, pi / 2.0, 0.0);
    const SpinorState psi = stepped(split_step_1d(), f, {0, 0}, Spin::down);

    CHECK(std::abs(psi.amplitude({1, 0}, Spin::up) - cx(-inv_sqrt2, 0.0)) < 1e-14);
    CHECK(std::abs(psi.amplitude({-1, 0}, Spin::down) - cx(inv_sqrt2, 0.0)) < 1e-14);
    CHECK(psi.norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
    double rest = 0.0;
    for (const cx& a : psi.amplitudes()) rest += std::norm(a);
    CHECK(rest == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("one 2D step separates the spin components along the diagonal") {
    const LatticeGeometry g = LatticeGeometry::plane(9, 9);
    const CoinField f = CoinField::homogeneous(g, pi / 2.0, 0.0);
    const SpinorState psi = stepped(walk_2d(), f, {0, 0}, Spin::down);
    CHECK(std::abs(psi.amplitude({1, 1}, Spin::up) - cx(-inv_sqrt2, 0.0)) < 1e-14);
    CHECK(std::abs(psi.amplitude({-1, -1}, Spin::down) - cx(inv_sqrt2, 0.0)) < 1e-14);
}

TEST_CASE("steps conserve norm on rings and leak through absorbing guards") {
    const LatticeGeometry ring = LatticeGeometry::line(16);
    const CoinField f = CoinField::homogeneous(ring, 0.7, -1.3);
    SpinorState psi = SpinorState::basis_state(ring, {5, 0}, Spin::up);
    const CompiledStep w(split_step_1d(), f);
    for (int n = 0; n < 40; ++n) step(psi, w);
    CHECK(psi.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psi.leaked_norm() == 0.0);

    const LatticeGeometry open = LatticeGeometry::line(9, Boundary::absorbing_guard);
    const CoinField fo = CoinField::homogeneous(open, 0.7, -1.3);
    SpinorState edge = SpinorState::basis_state(open, {4, 0}, Spin::up);
    const CompiledStep wo(split_step_1d(), fo);
    step(edge, wo);
    CHECK(edge.leaked_norm() > 0.0);
    CHECK(edge.norm_sq() + edge.leaked_norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int n = 0; n < 30; ++n) step(edge, wo);
    CHECK(edge.norm_sq() + edge.leaked_norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compiled and primitive-by-primitive application agree") {
    const LatticeGeometry g = LatticeGeometry::line(12);
    const CoinField f = CoinField::homogeneous(g, 0.4, 2.1);
    const CompiledStep w(frame_prime(), f);
    SpinorState a = SpinorState::basis_state(g, {3, 0}, Spin::down);
    SpinorState b = a;
    w.apply(a.amplitudes());
    for (std::size_t i = 0; i < w.primitive_count(); ++i) w.apply_primitive(i, b.amplitudes());
    for (std::size_t i = 0; i < a.amplitudes().size(); ++i)
        CHECK(std::abs(a.amplitudes()[i] - b.amplitudes()[i]) < 1e-14);
}

TEST_CASE("dense step operators are unitary on periodic lattices") {
    const LatticeGeometry g = LatticeGeometry::line(10);
    const CoinField f = CoinField::homogeneous(g, 1.1, -0.6);
    for (const WalkProtocol& p :
         {split_step_1d(), frame_prime(), frame_double_prime(), sigma_z_frame()})
        CHECK(unitarity_error(dense_step_operator(p, f)) < 1e-13);
}

TEST_CASE("chiral frames share the walk spectrum") {
    // W and W' differ by a position-local similarity, so their quasienergy
    // spectra coincide even though W itself obeys no exact chiral identity.
    const LatticeGeometry g = LatticeGeometry::line(10);
    const CoinField f = CoinField::homogeneous(g, 0.9, -1.7);
    const auto eig_w = eigendecompose(dense_step_operator(split_step_1d(), f));
    const auto eig_p = eigendecompose(dense_step_operator(frame_prime(), f));
    auto phases = [](const EigenDecomposition& e) {
        std::vector<double> out;
        for (Eigen::Index i = 0; i < e.values.size(); ++i)
            out.push_back(std::arg(e.values(i)));
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto pw = phases(eig_w), pp = phases(eig_p);
    REQUIRE(pw.size() == pp.size());
    for (std::size_t i = 0; i < pw.size(); ++i)
        CHECK(pw[i] == doctest::Approx(pp[i]).epsilon(1e-10));
}

TEST_CASE("chiral symmetry operators invert the frame operators") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = CoinField::homogeneous(g, 0.35, -1.1);
    for (const WalkProtocol& p : {frame_prime(), frame_double_prime(), sigma_z_frame()}) {
        REQUIRE(p.chiral_spin_operator.has_value());
        const Eigen::MatrixXcd w = dense_step_operator(p, f);
        const Eigen::MatrixXcd gamma = dense_chiral_operator(p, g);
        const double res = (gamma * w * gamma.adjoint() - w.adjoint()).cwiseAbs().maxCoeff();
        CHECK(res < 1e-13);
    }
    CHECK(!split_step_1d().chiral_spin_operator.has_value());
}

TEST_CASE("named protocols resolve and reject unknown names") {
    for (const char* name :
         {"split_step_1d", "frame_prime", "frame_double_prime", "sigma_z_frame", "walk_2d"})
        CHECK(named_protocol(name).name == name);
    CHECK_THROWS_AS(named_protocol("hadamard"), std::invalid_argument);
    CHECK_THROWS_AS(frame_operator(ChiralFrame::frame_prime, 2), std::invalid_argument);
}

TEST_CASE("protocol/lattice dimension mismatches are rejected") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = CoinField::homogeneous(g, 0.1, 0.2);
    CHECK_THROWS_AS(CompiledStep(walk_2d(), f), std::invalid_argument);
    CHECK_THROWS_AS((void)dense_step_operator(walk_2d(), f), std::invalid_argument);
}

TEST_CASE("half-angle coins compose to the full rotation") {
    // C(theta/2) C(theta/2) = C(theta): the frame constructions rely on it.
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = CoinField::homogeneous(g, 1.234, 0.0);
    SpinorState a = SpinorState::basis_state(g, {0, 0}, Spin::down);
    SpinorState b = a;
    apply_coin(a, f, CoinSource::theta1, 1.0);
    apply_coin(b, f, CoinSource::theta1, 0.5);
    apply_coin(b, f, CoinSource::theta1, 0.5);
    for (std::size_t i = 0; i < a.amplitudes().size(); ++i)
        CHECK(std::abs(a.amplitudes()[i] - b.amplitudes()[i]) < 1e-14);
}
