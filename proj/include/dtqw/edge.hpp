#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dtqw/bloch.hpp"
#include "dtqw/coin_field.hpp"
#include "dtqw/decoherence.hpp"
#include "dtqw/protocol.hpp"
#include "dtqw/state.hpp"

namespace dtqw {

/// A topologically protected eigenstate of an inhomogeneous walk, localized
/// at a domain wall.
struct EdgeState {
    SpinorState state;
    double quasienergy = 0.0;  // in (-pi, pi]
    GapCenter gap = GapCenter::zero;
    double center = 0.0;    // circular-mean position, centered coordinates
    double rms_size = 0.0;  // sqrt(sum_x P(x) (x - center)^2), min-image
    /// Reduced spin state's dominant eigenvector; meaningful when factorized.
    Eigen::Vector2cd spin_factor = Eigen::Vector2cd::Zero();
    double spin_purity = 0.0;  // largest eigenvalue of the reduced spin state
    bool factorized = false;   // spin_purity >= 1 - 1e-6

    explicit EdgeState(SpinorState s) : state(std::move(s)) {}
};

/// Domain-wall positions of a 1D field: midpoint crossings of either angle
/// profile between neighbouring sites (cyclic), as fractional coordinates.
std::vector<double> wall_positions_1d(const CoinField& field);

/// Dense search for in-gap eigenstates near domain walls on a 1D ring.
/// Near-degenerate candidates (the two walls a ring enforces) are resolved by
/// diagonalizing the chiral operator -- or a wall-indicator -- within their
/// subspace before localization measures are taken.
std::vector<EdgeState> find_edge_states(const WalkProtocol& protocol, const CoinField& field,
                                        GapCenter gap, double tolerance = 0.1);

/// Closed-form stroboscopic decay of an edge-state population:
///   spin:     gamma = p [1 - sum_s (sum_x |<x,s|E>|^2)^2]
///   position: gamma = p [1 - sum_x (sum_s |<x,s|E>|^2)^2]
/// and Pi(n) = (1 - gamma)^n.
struct DecayPrediction {
    NoiseChannel channel = NoiseChannel::none;
    double gamma = 0.0;
    std::vector<double> predicted;  // Pi(n), n = 0..n_max (empty if n_max = 0)
};

DecayPrediction decay_rate(const EdgeState& edge, NoiseChannel channel, double p,
                           int n_max = 0);

/// Dense-channel measurement of Pi(n) = tr(|E><E| rho_n) from rho_0 = |E><E|,
/// with a log-linear fit over n in [5, min(50, n_max)].
struct DecayMeasurement {
    std::vector<double> pi_n;  // n = 0..n_max
    double fitted_rate = 0.0;
    double predicted_rate = 0.0;
};

DecayMeasurement measure_decay(const EdgeState& edge, const WalkProtocol& protocol,
                               const CoinField& field, NoiseChannel channel, double p,
                               int n_max, bool kraus_per_primitive = false);

/// 2D droplet-island transport: inject at a boundary site and follow the
/// contour-band population P(F), the normalized lower-band series P(L)/P(F),
/// and the wavepacket front along the contour arc length.
struct DropletTransportConfig {
    LatticeGeometry geometry = LatticeGeometry::plane(121, 121, Boundary::absorbing_guard);
    /// Disc center offset so the contour passes through the initial site:
    /// the walker must start on the boundary to populate the edge channel.
    DropletShape shape{.center_x = -3.0};
    std::pair<double, double> inside_angles{pi / 5.0, 4.0 * pi / 5.0};
    std::pair<double, double> outside_angles{4.0 * pi / 5.0, pi / 5.0};
    OpticsConfig optics = OpticsConfig::setup_2d();
    Coord initial_site{-15, 0};
    Spin initial_spin = Spin::down;
    DecoherenceConfig noise{};  // channel none -> single pure run
    int n_steps = 400;
    /// F = sites whose convolved indicator lies in [band_lo, band_hi],
    /// dilated by a Chebyshev radius; L = F restricted to y < center_y.
    double band_lo = 0.05, band_hi = 0.95;
    int band_dilation = 3;
    int front_fit_lo = 40, front_fit_hi = -1;  // -1: n_steps - 5
    int threads = 1;
    std::vector<int> snapshot_steps;
};

struct DropletTransportResult {
    TimeSeries f_population;   // P(x in F; n)
    TimeSeries l_ratio;        // P(x in L; n) / P(x in F; n)
    TimeSeries front_position;  // unwrapped arc-length coordinate, sites
    double contour_length = 0.0;
    double front_speed = 0.0;  // least-squares slope over the fit window
    double l_period = 0.0;     // autocorrelation peak of the detrended ratio
    std::vector<int> snapshot_steps;
    std::vector<std::vector<double>> snapshots;  // mean P(site) at those steps
    Region f_region, l_region;
};

DropletTransportResult droplet_transport(const DropletTransportConfig& cfg);

/// RMS size and initial-state overlap of the 0-gap wall state across optical
/// resolutions, on the standard two-phase wall (theta1 fixed, theta2 step).
struct EdgeSizeEntry {
    double ratio = 0.0;  // a / R_A
    double rms_size = 0.0;
    double p_init = 0.0;  // |<E| x_wall, s_E>|^2
};

std::vector<EdgeSizeEntry> edge_state_size_sweep(const std::vector<double>& ratios,
                                                 int n_sites = 201);

/// JSON sidecar {epsilon, center, rms_size, spin_factor, gamma_spin,
/// gamma_position}; decay rates are quoted per unit probability (p = 1).
void write_edge_state_json(std::ostream& os, const EdgeState& edge);

}  // namespace dtqw
