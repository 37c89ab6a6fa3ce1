#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dtqw/decoherence.hpp"

using namespace dtqw;

namespace {

CoinField hadamard_field(const LatticeGeometry& g) {
    return CoinField::homogeneous(g, pi / 2.0, 0.0);
}

}  // namespace

TEST_CASE("the counter rng is reproducible and uniform-ish") {
    CounterRng a(42, 7), b(42, 7);
    a.set_step(3);
    b.set_step(3);
    for (int i = 0; i < 32; ++i) CHECK(a.uniform() == b.uniform());

    CounterRng c(42, 8);
    c.set_step(3);
    a.set_step(3);
    int distinct = 0;
    double mean = 0.0;
    for (int i = 0; i < 512; ++i) {
        const double u = a.uniform(), v = c.uniform();
        if (u != v) ++distinct;
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    CHECK(distinct == 512);  // neighbouring trajectories decorrelate
    CHECK(mean / 512.0 == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("a zero-probability channel is the unitary map") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    DensityOperator rho = DensityOperator::pure(SpinorState::basis_state(g, {0, 0}, Spin::down));

    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::spin;
    cfg.probability = 0.0;
    const DensityOperator after = channel_step(rho, w, cfg);

    SpinorState psi = SpinorState::basis_state(g, {0, 0}, Spin::down);
    step(psi, w);
    const DensityOperator ref = DensityOperator::pure(psi);
    CHECK((after.matrix() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("channels preserve trace, hermiticity, and positivity") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = CoinField::homogeneous(g, 0.9, -0.5);
    const CompiledStep w(split_step_1d(), f);
    for (NoiseChannel ch : {NoiseChannel::spin, NoiseChannel::position}) {
        DensityOperator rho =
            DensityOperator::pure(SpinorState::basis_state(g, {2, 0}, Spin::up));
        DecoherenceConfig cfg;
        cfg.channel = ch;
        cfg.probability = 0.3;
        for (int n = 0; n < 6; ++n) rho = channel_step(rho, w, cfg);
        CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rho.hermiticity_error() < 1e-12);
        CHECK(rho.min_eigenvalue() > -1e-12);
    }
}

TEST_CASE("a full-strength position channel leaves no site coherence") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    DensityOperator rho = DensityOperator::pure(SpinorState::basis_state(g, {0, 0}, Spin::down));
    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::position;
    cfg.probability = 1.0;
    rho = channel_step(rho, w, cfg);
    double off_site = 0.0;
    for (std::int64_t i = 0; i < g.basis_size(); ++i)
        for (std::int64_t j = 0; j < g.basis_size(); ++j)
            if (LatticeGeometry::basis_site(i) != LatticeGeometry::basis_site(j))
                off_site = std::max(off_site, std::abs(rho.matrix()(i, j)));
    CHECK(off_site < 1e-14);
}

TEST_CASE("full spin decoherence reduces the split-step walk to a classical chain") {
    // For theta2 = 0 the walk is coin + deterministic spin-dependent shifts,
    // so projecting the spin every step yields a classical Markov chain on
    // (x, s) with coin mixing matrix [[c^2, s^2], [s^2, c^2]].
    const int n_sites = 9;
    const double theta1 = 0.8;
    const LatticeGeometry g = LatticeGeometry::line(n_sites);
    const CoinField f = CoinField::homogeneous(g, theta1, 0.0);
    const CompiledStep w(split_step_1d(), f);

    DensityOperator rho = DensityOperator::pure(SpinorState::basis_state(g, {0, 0}, Spin::down));
    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::spin;
    cfg.probability = 1.0;

    // Classical reference: p[site][spin].
    std::vector<std::array<double, 2>> p(n_sites, {0.0, 0.0});
    p[static_cast<std::size_t>(g.site_index({0, 0}))][1] = 1.0;
    const double c2 = std::cos(theta1 / 2.0) * std::cos(theta1 / 2.0);
    const double s2 = 1.0 - c2;

    for (int n = 0; n < 4; ++n) {
        rho = channel_step(rho, w, cfg);
        std::vector<std::array<double, 2>> mixed(n_sites);
        for (int i = 0; i < n_sites; ++i) {
            mixed[static_cast<std::size_t>(i)][0] = c2 * p[i][0] + s2 * p[i][1];
            mixed[static_cast<std::size_t>(i)][1] = s2 * p[i][0] + c2 * p[i][1];
        }
        std::vector<std::array<double, 2>> next(n_sites);
        for (int i = 0; i < n_sites; ++i) {
            next[static_cast<std::size_t>((i + 1) % n_sites)][0] = mixed[i][0];
            next[static_cast<std::size_t>((i - 1 + n_sites) % n_sites)][1] = mixed[i][1];
        }
        p = next;
    }

    for (int i = 0; i < n_sites; ++i)
        for (int s = 0; s < 2; ++s)
            CHECK(rho.matrix()(2 * i + s, 2 * i + s).real() ==
                  doctest::Approx(p[static_cast<std::size_t>(i)]
                                   [static_cast<std::size_t>(s)]).epsilon(1e-12));
}

TEST_CASE("trajectory ensembles match the dense channel within sampling error") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    const SpinorState init = SpinorState::basis_state(g, {0, 0}, Spin::down);

    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::spin;
    cfg.probability = 0.2;
    cfg.seed = 11;
    cfg.trajectories = 2000;

    TrajectoryObservables obs;
    obs.regions = {Region::interval(g, -4, -1), Region::interval(g, 0, 3)};
    obs.overlap_reference = &init;
    const int n_steps = 5;
    const TrajectoryEnsembleResult ens = run_trajectories(init, w, cfg, n_steps, obs, 2);

    DensityOperator rho = DensityOperator::pure(init);
    std::vector<double> dense_left, dense_overlap;
    evolve_dense(rho, w, cfg, n_steps, [&](int, const DensityOperator& r) {
        dense_left.push_back(region_probability(r, obs.regions[0]));
        dense_overlap.push_back(r.overlap(init));
    });

    for (int n = 0; n <= n_steps; ++n) {
        const auto un = static_cast<std::size_t>(n);
        const double sig_l = std::max(ens.region_err[0][un], 1e-4);
        CHECK(std::abs(ens.region_mean[0][un] - dense_left[un]) < 4.0 * sig_l);
        const double sig_o = std::max(ens.overlap_err[un], 1e-4);
        CHECK(std::abs(ens.overlap_mean[un] - dense_overlap[un]) < 4.0 * sig_o);
    }
}

TEST_CASE("trajectory results do not depend on the thread count") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    const SpinorState init = SpinorState::basis_state(g, {1, 0}, Spin::up);

    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::position;
    cfg.probability = 0.4;
    cfg.seed = 5;
    cfg.trajectories = 130;  // not a multiple of the 64 reduction blocks

    TrajectoryObservables obs;
    obs.regions = {Region::interval(g, 0, 3)};
    obs.snapshot_steps = {4};
    const auto r1 = run_trajectories(init, w, cfg, 4, obs, 1);
    const auto r3 = run_trajectories(init, w, cfg, 4, obs, 3);
    REQUIRE(r1.region_mean[0].size() == r3.region_mean[0].size());
    for (std::size_t i = 0; i < r1.region_mean[0].size(); ++i) {
        CHECK(r1.region_mean[0][i] == r3.region_mean[0][i]);  // bitwise
        CHECK(r1.region_err[0][i] == r3.region_err[0][i]);
    }
    for (std::size_t i = 0; i < r1.snapshot_mean[0].size(); ++i)
        CHECK(r1.snapshot_mean[0][i] == r3.snapshot_mean[0][i]);
}

TEST_CASE("projection bins accumulate the binned distribution") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    const SpinorState init = SpinorState::basis_state(g, {0, 0}, Spin::down);

    DecoherenceConfig cfg;  // noise-free ensemble of one trajectory
    cfg.trajectories = 1;
    TrajectoryObservables obs;
    obs.projection_bins.assign(static_cast<std::size_t>(g.n_sites()), 0);
    obs.projection_bins[0] = -1;  // excluded site
    obs.n_bins = 1;
    obs.regions = {Region::whole(g)};
    const auto r = run_trajectories(init, w, cfg, 3, obs, 1);
    for (std::size_t n = 0; n < r.bin_mean.size(); ++n) {
        REQUIRE(r.bin_mean[n].size() == 1);
        CHECK(r.bin_mean[n][0] <= r.region_mean[0][n] + 1e-12);
    }
    CHECK(r.bin_mean[0][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per-primitive noise placement changes the channel") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = CoinField::homogeneous(g, 1.0, 0.7);
    const CompiledStep w(split_step_1d(), f);
    DensityOperator a = DensityOperator::pure(SpinorState::basis_state(g, {0, 0}, Spin::down));
    DensityOperator b = a;
    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::spin;
    cfg.probability = 0.3;
    a = channel_step(a, w, cfg);
    cfg.kraus_per_primitive = true;
    b = channel_step(b, w, cfg);
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() > 1e-4);
    CHECK(b.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("absorbing lattices keep survival consistent under trajectories") {
    const LatticeGeometry g = LatticeGeometry::line(9, Boundary::absorbing_guard);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    const SpinorState init = SpinorState::basis_state(g, {0, 0}, Spin::down);
    DecoherenceConfig cfg;
    cfg.channel = NoiseChannel::spin;
    cfg.probability = 0.5;
    cfg.seed = 3;
    cfg.trajectories = 64;
    TrajectoryObservables obs;
    obs.track_survival = true;
    const auto r = run_trajectories(init, w, cfg, 12, obs, 2);
    CHECK(r.survival_mean[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 1; n < r.survival_mean.size(); ++n) {
        CHECK(r.survival_mean[n] <= r.survival_mean[n - 1] + 1e-12);
        CHECK(r.survival_mean[n] >= 0.0);
    }
    CHECK(r.survival_mean.back() < 1.0);  // walker reaches the guard within 12 steps
}

TEST_CASE("evolve_pure reports the initial state and every step") {
    const LatticeGeometry g = LatticeGeometry::line(8);
    const CoinField f = hadamard_field(g);
    const CompiledStep w(split_step_1d(), f);
    SpinorState psi = SpinorState::basis_state(g, {0, 0}, Spin::up);
    int calls = 0, last = -1;
    evolve_pure(psi, w, 7, [&](int n, const SpinorState& st) {
        ++calls;
        last = n;
        CHECK(st.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    });
    CHECK(calls == 8);
    CHECK(last == 7);
}

TEST_CASE("series csv uses long format with optional stderr") {
    std::ostringstream os;
    write_series_csv(os, {{"a", {1.0, 0.5}, {}}, {"b", {0.0, 0.25}, {0.0, 0.01}}});
    const std::string text = os.str();
    CHECK(text.find("n,observable_name,value,stderr") == 0);
    CHECK(text.find("0,a,1,") != std::string::npos);
    CHECK(text.find("1,b,0.25,0.01") != std::string::npos);
}
