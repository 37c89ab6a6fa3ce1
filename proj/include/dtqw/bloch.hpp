#pragma once

#include <array>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dtqw/coin_field.hpp"
#include "dtqw/protocol.hpp"

namespace dtqw {

/// The two quasienergy gaps of a gapped walk.
enum class GapCenter { zero, pi };

/// 2x2 Bloch matrix W(k) of a homogeneous protocol: translations are replaced
/// by shift phases in the plane-wave convention <x|k> ~ e^{ikx}, so S^up
/// contributes e^{-ik_d} on the up-up entry and S^down e^{+ik_d} on down-down.
/// k has one component per axis, each in (-pi, pi] (lattice constant = 1).
Eigen::Matrix2cd bloch_operator(const WalkProtocol& protocol, double theta1, double theta2,
                                const std::vector<double>& k);

/// Axis-angle form of an SU(2) Bloch matrix, W = e^{-i eps n.sigma}:
/// quasienergy branch eps in [0, pi] (bands are +-eps) and the unit
/// eigenspinor axis n of the +eps band. n is zeroed where sin(eps) ~ 0.
struct BlochDecomposition {
    double epsilon = 0.0;
    std::array<double, 3> axis{{0.0, 0.0, 0.0}};
};

BlochDecomposition decompose_su2(const Eigen::Matrix2cd& w);

/// Sampled 1D band structure. Bands come in +-epsilon pairs; `axis` is n(k)
/// for the +epsilon band. Gap widths are min over the grid of 2*eps and
/// 2*(pi - eps).
struct QuasienergySpectrum {
    std::vector<double> k;
    std::vector<double> epsilon;
    std::vector<std::array<double, 3>> axis;
    double gap0 = 0.0;
    double gap_pi = 0.0;
};

/// k_points >= 64 equally spaced quasimomenta covering the Brillouin zone.
QuasienergySpectrum bloch_bands(const WalkProtocol& protocol, double theta1, double theta2,
                                int k_points);

/// Minimum gaps (at 0 and pi) over the full BZ, sampled bz_points per axis.
std::pair<double, double> min_gaps(const WalkProtocol& protocol, double theta1, double theta2,
                                   int bz_points);

/// Winding number of the eigenspinor's (n_y, n_z) projection around the
/// origin over one BZ loop, for a chiral time frame. Accumulates turning
/// angles of consecutive grid spinors; any increment >= pi/2 triggers grid
/// doubling. Throws GapClosedError when a gap is closed at the sampled
/// resolution ("ill-defined winding"). `reverse` traverses the loop backwards
/// (negating the result).
int winding_number(ChiralFrame frame, double theta1, double theta2, int k_points = 256,
                   bool reverse = false);

/// Frame windings and the derived invariant pair
/// (nu_0, nu_pi) = ((nu' + nu'')/2 + 1/2, (nu' - nu'')/2 + 1/2).
struct TopologicalClassification {
    int nu_prime = 0;
    int nu_double_prime = 0;
    int nu_0 = 0;
    int nu_pi = 0;
};

TopologicalClassification classify_1d(double theta1, double theta2, int k_points = 256);
std::pair<int, int> invariants_1d(double theta1, double theta2, int k_points = 256);

/// Gap widths of the homogeneous 2D walk over an angle grid (phase-boundary
/// scan; boundaries are the loci where either gap drops below tolerance).
struct GapScanEntry {
    double theta1;
    double theta2;
    double gap0;
    double gap_pi;
};

std::vector<GapScanEntry> gap_scan_2d(const std::vector<double>& theta1_grid,
                                      const std::vector<double>& theta2_grid, int bz_points = 64);

/// Strip of `inside` angles on a y-torus, homogeneous in x: inner domain
/// |y| < half_height bounded by two erf domain walls (the weight profile
/// comes from strip_profile). The mixed-space one-step operator at fixed k_x
/// has dimension 2*ny and is diagonalized exactly.
struct StripConfig {
    int ny = 100;
    double half_height = 20.0;  // walls sit at y = -half_height and +half_height
    std::pair<double, double> inside_angles{0.0, 0.0};
    std::pair<double, double> outside_angles{0.0, 0.0};
    OpticsConfig optics = OpticsConfig::setup_2d();
    int kx_points = 256;
    int bz_points = 256;  // k_y sampling for the bulk-gap envelopes
};

struct StripMode {
    double epsilon = 0.0;     // in (-pi, pi]
    double centroid_y = 0.0;  // circular-mean position, centered coordinates
    int gap = -1;             // 0 = in the 0 gap, 1 = in the pi gap, -1 = bulk
    int wall = 0;             // -1 lower, +1 upper, 0 = unassigned (bulk)
    double v_group = 0.0;     // forward-difference d eps / d k_x (edge modes)
    double tail_beyond_10 = 0.0;  // probability farther than 10 sites from the wall
};

struct StripSpectrum {
    std::vector<double> kx;
    int ny = 0;
    double wall_lower_y = 0.0;
    double wall_upper_y = 0.0;
    /// Joint bulk-gap half-widths (min over both bulk phases and k_y), per k_x.
    std::vector<double> gap0_half;
    std::vector<double> gap_pi_half;
    /// modes[i][m] sorted by quasienergy at kx[i].
    std::vector<std::vector<StripMode>> modes;
    /// Net signed crossings of the gap-center quasienergy, [gap][0=lower wall,
    /// 1=upper wall]; the bulk-boundary count of chiral edge modes.
    int crossings[2][2] = {{0, 0}, {0, 0}};
};

StripSpectrum strip_spectrum(const StripConfig& cfg);

/// Net chirality of in-gap modes per edge (signed crossing count).
struct EdgeModeCount {
    int lower = 0;
    int upper = 0;
};

EdgeModeCount edge_mode_count(const StripSpectrum& spectrum, GapCenter gap);

/// CSV "k,m,epsilon" with bands m = 0 (-eps) and m = 1 (+eps).
void write_bands_csv(std::ostream& os, const QuasienergySpectrum& spectrum);
/// CSV "theta1,theta2,gap0,gappi".
void write_gap_scan_csv(std::ostream& os, const std::vector<GapScanEntry>& scan);
/// CSV "k,m,epsilon,edge_label,v_g" (edge_label: bulk/lower/upper).
void write_strip_csv(std::ostream& os, const StripSpectrum& spectrum);

}  // namespace dtqw
