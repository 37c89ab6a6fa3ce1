#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "dtqw/edge.hpp"

using namespace dtqw;

namespace {

CoinField standard_wall(const LatticeGeometry& g) {
    return wall_field_1d(g, {-pi / 2.0, pi / 4.0}, {-pi / 2.0, 3.0 * pi / 4.0},
                         OpticsConfig::setup_2d());
}

}  // namespace

TEST_CASE("wall detection finds the engineered wall and the wrap seam") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const auto walls = wall_positions_1d(standard_wall(g));
    REQUIRE(walls.size() == 2);
    CHECK(walls[0] == doctest::Approx(0.5));
    CHECK(walls[1] == doctest::Approx(100.5));

    const CoinField flat = CoinField::homogeneous(g, 0.2, 0.4);
    CHECK(wall_positions_1d(flat).empty());
}

TEST_CASE("the invariant step binds zero-gap states to both walls and none at pi") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const CoinField f = standard_wall(g);
    const auto zero = find_edge_states(split_step_1d(), f, GapCenter::zero);
    REQUIRE(zero.size() == 2);
    // Sorted by center: engineered wall near 0.5, seam wall near 100.5. The
    // smooth profile decays slower on the small-gap side, so the circular
    // mean sits a site or so off the nominal crossing.
    CHECK(std::fabs(zero[0].center - 0.5) < 2.0);
    CHECK(std::fabs(std::fabs(zero[1].center) - 100.5) < 2.0);
    for (const EdgeState& e : zero) {
        CHECK(std::fabs(e.quasienergy) < 1e-6);
        CHECK(e.gap == GapCenter::zero);
        CHECK(e.rms_size < 4.0);
        CHECK(e.state.norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
    }
    // Delta nu_pi = 0 across this wall: the pi gap hosts no protected state.
    CHECK(find_edge_states(split_step_1d(), f, GapCenter::pi).empty());
}

TEST_CASE("edge states factorize into position times spin") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const auto states = find_edge_states(split_step_1d(), standard_wall(g), GapCenter::zero);
    REQUIRE(!states.empty());
    const EdgeState& e = states[0];
    CHECK(e.factorized);
    CHECK(e.spin_purity == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(e.spin_factor.norm() == doctest::Approx(1.0).epsilon(1e-10));
    // The factor reproduces per-site amplitudes up to the position profile.
    double residual = 0.0;
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        const Coord c = g.site_coord(s);
        const cx up = e.state.amplitude(c, Spin::up);
        const cx dn = e.state.amplitude(c, Spin::down);
        // Component orthogonal to the spin factor at this site.
        const cx proj = std::conj(e.spin_factor(0)) * up + std::conj(e.spin_factor(1)) * dn;
        residual += std::norm(up - proj * e.spin_factor(0)) +
                    std::norm(dn - proj * e.spin_factor(1));
    }
    CHECK(residual < 1e-8);
}

TEST_CASE("analytic decay rates for hand-built states") {
    const LatticeGeometry g = LatticeGeometry::line(9);
    SpinorState psi(g);
    psi.amplitude({0, 0}, Spin::up) = cx(1.0 / std::sqrt(2.0), 0.0);
    psi.amplitude({1, 0}, Spin::down) = cx(1.0 / std::sqrt(2.0), 0.0);
    EdgeState e(psi);

    // Spin weights (1/2, 1/2): gamma_S = p (1 - 1/4 - 1/4) = p/2. Site
    // weights (1/2, 1/2): gamma_P = p/2 as well.
    const DecayPrediction ds = decay_rate(e, NoiseChannel::spin, 0.3, 2);
    CHECK(ds.gamma == doctest::Approx(0.15).epsilon(1e-12));
    REQUIRE(ds.predicted.size() == 3);
    CHECK(ds.predicted[0] == doctest::Approx(1.0));
    CHECK(ds.predicted[2] == doctest::Approx(0.85 * 0.85).epsilon(1e-12));
    const DecayPrediction dp = decay_rate(e, NoiseChannel::position, 0.3);
    CHECK(dp.gamma == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(dp.predicted.empty());

    // A basis state is immune to both channels.
    EdgeState pinned(SpinorState::basis_state(g, {0, 0}, Spin::down));
    CHECK(decay_rate(pinned, NoiseChannel::spin, 0.8).gamma == doctest::Approx(0.0));
    CHECK(decay_rate(pinned, NoiseChannel::position, 0.8).gamma == doctest::Approx(0.0));
}

TEST_CASE("the first measured decay step is exact") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const CoinField f = standard_wall(g);
    const auto states = find_edge_states(split_step_1d(), f, GapCenter::zero);
    REQUIRE(!states.empty());
    const EdgeState& e = std::fabs(states[0].center) < 50.0 ? states[0] : states[1];
    const double p = 0.1;
    const DecayMeasurement m =
        measure_decay(e, split_step_1d(), f, NoiseChannel::spin, p, 1);
    const double gamma = decay_rate(e, NoiseChannel::spin, p).gamma;
    CHECK(m.pi_n.size() == 2);
    CHECK(m.pi_n[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(m.pi_n[1] - (1.0 - gamma)) < 1e-10);
}

TEST_CASE("edge-state size shrinks as the optics sharpen") {
    const auto sweep = edge_state_size_sweep({0.5, 1.0, 2.0}, 201);
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0].ratio == doctest::Approx(0.5));
    for (std::size_t i = 1; i < sweep.size(); ++i)
        CHECK(sweep[i].rms_size <= sweep[i - 1].rms_size + 1e-9);
    for (const EdgeSizeEntry& e : sweep) {
        CHECK(e.rms_size > 0.0);
        CHECK(e.p_init >= 0.0);
        CHECK(e.p_init <= 1.0);
    }
}

TEST_CASE("edge-state json sidecar carries the localization summary") {
    const LatticeGeometry g = LatticeGeometry::line(201);
    const auto states = find_edge_states(split_step_1d(), standard_wall(g), GapCenter::zero);
    REQUIRE(!states.empty());
    std::ostringstream os;
    write_edge_state_json(os, states[0]);
    const nlohmann::json j = nlohmann::json::parse(os.str());
    CHECK(j.at("gap") == "zero");
    CHECK(std::fabs(j.at("epsilon").get<double>()) < 1e-6);
    CHECK(j.at("rms_size").get<double>() > 0.0);
    CHECK(j.at("gamma_spin").get<double>() >= 0.0);
    CHECK(j.at("gamma_position").get<double>() > 0.0);
    CHECK(j.contains("spin_factor"));
}

TEST_CASE("a reduced droplet run transports weight along the contour") {
    DropletTransportConfig cfg;
    cfg.geometry = LatticeGeometry::plane(61, 61, Boundary::absorbing_guard);
    cfg.shape.center_x = -2.0;  // contour through the initial site
    cfg.shape.radius = 9.0;
    cfg.shape.half_width = 4.0;
    cfg.shape.apex_y = 14.0;
    cfg.initial_site = {-11, 0};
    cfg.n_steps = 60;
    cfg.front_fit_lo = 10;
    cfg.snapshot_steps = {30, 60};
    const DropletTransportResult r = droplet_transport(cfg);

    REQUIRE(r.f_population.value.size() == 61);
    CHECK(r.contour_length == doctest::Approx(cfg.shape.contour_length()).epsilon(1e-6));
    CHECK(!r.f_region.empty());
    CHECK(r.l_region.size() < r.f_region.size());
    for (double v : r.f_population.value) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
    // The injected state starts on the contour band.
    CHECK(r.f_population.value[0] == doctest::Approx(1.0).epsilon(1e-9));
    // Chiral transport keeps a majority of the surviving weight on the band.
    CHECK(r.f_population.value[30] > 0.4);
    CHECK(std::isfinite(r.front_speed));
    CHECK(r.front_speed > 0.0);
    REQUIRE(r.snapshots.size() == 2);
    double snap_total = 0.0;
    for (double v : r.snapshots[0]) snap_total += v;
    CHECK(snap_total <= 1.0 + 1e-9);
    CHECK(snap_total > 0.5);
}
