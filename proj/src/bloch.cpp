#include "dtqw/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <ostream>

#include "dtqw/errors.hpp"
#include "dtqw/linalg.hpp"

namespace dtqw {

namespace {

double resolve_theta(const Primitive& op, double theta1, double theta2) {
    switch (op.source) {
        case CoinSource::theta1: return op.scale * theta1;
        case CoinSource::theta2: return op.scale * theta2;
        default: return op.fixed_angle;
    }
}

Eigen::Matrix2cd coin_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Eigen::Matrix2cd m;
    m << cx(c, 0), cx(-s, 0), cx(s, 0), cx(c, 0);
    return m;
}

/// Handedness of the (n_y, n_z) winding plane. +1 reproduces the Hadamard
/// anchor nu' = +1 with the e^{-ik} up-shift phase convention.
constexpr double winding_orientation = +1.0;

}  // namespace

Eigen::Matrix2cd bloch_operator(const WalkProtocol& protocol, double theta1, double theta2,
                                const std::vector<double>& k) {
    if (static_cast<int>(k.size()) != protocol.dimension)
        throw std::invalid_argument("bloch_operator: need one quasimomentum per axis");
    Eigen::Matrix2cd w = Eigen::Matrix2cd::Identity();
    for (const Primitive& op : protocol.ops) {
        Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
        switch (op.kind) {
            case Primitive::Kind::coin:
                m = coin_matrix(resolve_theta(op, theta1, theta2));
                break;
            case Primitive::Kind::shift_up:
                m(0, 0) = std::exp(cx(0.0, -k.at(op.axis)));
                break;
            case Primitive::Kind::shift_down:
                m(1, 1) = std::exp(cx(0.0, +k.at(op.axis)));
                break;
        }
        w = m * w;  // ops[0] acts first
    }
    return w;
}

BlochDecomposition decompose_su2(const Eigen::Matrix2cd& w) {
    const cx det = w(0, 0) * w(1, 1) - w(0, 1) * w(1, 0);
    if (std::abs(det - cx(1.0)) > 1e-10)
        throw InvariantViolation("Bloch matrix is not special-unitary (det = " +
                                 std::to_string(det.real()) + " + " +
                                 std::to_string(det.imag()) + "i)");
    BlochDecomposition out;
    double cos_eps = 0.5 * (w(0, 0) + w(1, 1)).real();
    cos_eps = std::clamp(cos_eps, -1.0, 1.0);
    out.epsilon = std::acos(cos_eps);
    const double sin_eps = std::sin(out.epsilon);
    if (sin_eps > 1e-12) {
        // W = cos(eps) - i sin(eps) n.sigma  =>  n_j = i tr(W sigma_j) / (2 sin eps)
        const cx i_unit(0.0, 1.0);
        double n1 = (i_unit * (w(0, 1) + w(1, 0))).real() / (2.0 * sin_eps);
        double n2 = (w(1, 0) - w(0, 1)).real() / (2.0 * sin_eps);
        double n3 = (i_unit * (w(0, 0) - w(1, 1))).real() / (2.0 * sin_eps);
        const double r = std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
        if (r > 1e-12) {
            out.axis = {n1 / r, n2 / r, n3 / r};
        }
    }
    return out;
}

QuasienergySpectrum bloch_bands(const WalkProtocol& protocol, double theta1, double theta2,
                                int k_points) {
    if (protocol.dimension != 1)
        throw std::invalid_argument("bloch_bands samples 1D protocols; use min_gaps in 2D");
    if (k_points < 64) throw std::invalid_argument("bloch_bands: need >= 64 k points");
    QuasienergySpectrum out;
    out.k.resize(k_points);
    out.epsilon.resize(k_points);
    out.axis.resize(k_points);
    double min_eps = pi, max_eps = 0.0;
    for (int j = 0; j < k_points; ++j) {
        const double k = -pi + 2.0 * pi * j / k_points;
        const BlochDecomposition d = decompose_su2(bloch_operator(protocol, theta1, theta2, {k}));
        out.k[j] = k;
        out.epsilon[j] = d.epsilon;
        out.axis[j] = d.axis;
        min_eps = std::min(min_eps, d.epsilon);
        max_eps = std::max(max_eps, d.epsilon);
    }
    out.gap0 = 2.0 * min_eps;
    out.gap_pi = 2.0 * (pi - max_eps);
    return out;
}

std::pair<double, double> min_gaps(const WalkProtocol& protocol, double theta1, double theta2,
                                   int bz_points) {
    if (bz_points < 2) throw std::invalid_argument("min_gaps: need a positive BZ grid");
    double min_eps = pi, max_eps = 0.0;
    if (protocol.dimension == 1) {
        for (int j = 0; j < bz_points; ++j) {
            const double k = -pi + 2.0 * pi * j / bz_points;
            const double e = decompose_su2(bloch_operator(protocol, theta1, theta2, {k})).epsilon;
            min_eps = std::min(min_eps, e);
            max_eps = std::max(max_eps, e);
        }
    } else {
        for (int jx = 0; jx < bz_points; ++jx) {
            const double kx = -pi + 2.0 * pi * jx / bz_points;
            for (int jy = 0; jy < bz_points; ++jy) {
                const double ky = -pi + 2.0 * pi * jy / bz_points;
                const double e =
                    decompose_su2(bloch_operator(protocol, theta1, theta2, {kx, ky})).epsilon;
                min_eps = std::min(min_eps, e);
                max_eps = std::max(max_eps, e);
            }
        }
    }
    return {2.0 * min_eps, 2.0 * (pi - max_eps)};
}

int winding_number(ChiralFrame frame, double theta1, double theta2, int k_points, bool reverse) {
    if (k_points < 64) throw std::invalid_argument("winding_number: need >= 64 k points");
    const WalkProtocol proto = frame_operator(frame, 1);
    int n = k_points;
    const int max_doublings = 5;
    for (int attempt = 0;; ++attempt) {
        // Gap tolerance scales with resolution: 1e-3 * pi at 256-point sampling.
        const double gap_threshold = 1e-3 * pi * 256.0 / n;
        double min_gap = std::numeric_limits<double>::infinity();
        std::vector<std::array<double, 2>> u;
        u.reserve(n);
        bool spinor_defined = true;
        for (int j = 0; j < n; ++j) {
            const double k = -pi + 2.0 * pi * j / n;
            const BlochDecomposition d =
                decompose_su2(bloch_operator(proto, theta1, theta2, {k}));
            min_gap = std::min({min_gap, 2.0 * d.epsilon, 2.0 * (pi - d.epsilon)});
            const double r = std::hypot(d.axis[1], d.axis[2]);
            if (r < 1e-12) {
                spinor_defined = false;
                break;
            }
            u.push_back({d.axis[1] / r, d.axis[2] / r});
        }
        if (spinor_defined && min_gap >= gap_threshold) {
            double total = 0.0;
            bool too_coarse = false;
            for (int j = 0; j < n; ++j) {
                const auto& a = u[j];
                const auto& b = u[(j + 1) % n];
                const double cross = a[0] * b[1] - a[1] * b[0];
                const double dot = a[0] * b[0] + a[1] * b[1];
                const double dphi = std::atan2(cross, dot);
                if (std::abs(dphi) >= pi / 2.0) {
                    too_coarse = true;
                    break;
                }
                total += dphi;
            }
            if (!too_coarse) {
                double nu_real = winding_orientation * total / (2.0 * pi);
                if (reverse) nu_real = -nu_real;
                const long nu = std::lround(nu_real);
                if (std::abs(nu_real - static_cast<double>(nu)) > 1e-6)
                    throw InvariantViolation("winding failed to quantize: " +
                                             std::to_string(nu_real));
                return static_cast<int>(nu);
            }
        }
        if (attempt >= max_doublings)
            throw GapClosedError("ill-defined winding: gap " + std::to_string(min_gap) +
                                 " below threshold at " + std::to_string(n) + " k points");
        n *= 2;
    }
}

TopologicalClassification classify_1d(double theta1, double theta2, int k_points) {
    TopologicalClassification out;
    out.nu_prime = winding_number(ChiralFrame::frame_prime, theta1, theta2, k_points);
    out.nu_double_prime =
        winding_number(ChiralFrame::frame_double_prime, theta1, theta2, k_points);
    const int twice_nu0 = out.nu_prime + out.nu_double_prime + 1;
    const int twice_nupi = out.nu_prime - out.nu_double_prime + 1;
    if (twice_nu0 % 2 != 0)
        throw InvariantViolation("frame windings (" + std::to_string(out.nu_prime) + ", " +
                                 std::to_string(out.nu_double_prime) +
                                 ") give a non-integral invariant pair");
    // Exact integer division, also correct for negative numerators.
    out.nu_0 = twice_nu0 / 2;
    out.nu_pi = twice_nupi / 2;
    return out;
}

std::pair<int, int> invariants_1d(double theta1, double theta2, int k_points) {
    const TopologicalClassification c = classify_1d(theta1, theta2, k_points);
    return {c.nu_0, c.nu_pi};
}

std::vector<GapScanEntry> gap_scan_2d(const std::vector<double>& theta1_grid,
                                      const std::vector<double>& theta2_grid, int bz_points) {
    if (bz_points < 64) throw std::invalid_argument("gap_scan_2d: need >= 64 BZ points per axis");
    const WalkProtocol proto = walk_2d();
    std::vector<GapScanEntry> out;
    out.reserve(theta1_grid.size() * theta2_grid.size());
    for (double t1 : theta1_grid) {
        for (double t2 : theta2_grid) {
            const auto [g0, gpi] = min_gaps(proto, t1, t2, bz_points);
            out.push_back({t1, t2, g0, gpi});
        }
    }
    return out;
}

namespace {

/// Torus distance between two centered y coordinates.
double torus_distance(double a, double b, int ny) {
    double d = std::fabs(a - b);
    d = std::fmod(d, static_cast<double>(ny));
    return std::min(d, ny - d);
}

struct MatchCandidate {
    std::size_t a, b;
    double dist;
};

}  // namespace

StripSpectrum strip_spectrum(const StripConfig& cfg) {
    if (cfg.ny < 4) throw std::invalid_argument("strip_spectrum: need at least 4 y sites");
    if (cfg.kx_points < 8) throw std::invalid_argument("strip_spectrum: need >= 8 k_x points");
    if (cfg.bz_points < 64)
        throw std::invalid_argument("strip_spectrum: need >= 64 k_y points for bulk gaps");
    cfg.optics.validate();
    const int ny = cfg.ny;
    const double inner_width = 2.0 * cfg.half_height;
    if (inner_width < 10.0 || (ny - inner_width) < 10.0)
        std::cerr << "warning: hybridized edges (strip domains narrower than 10 sites)\n";

    const auto profile = strip_profile(ny, cfg.half_height, cfg.inside_angles,
                                       cfg.outside_angles, cfg.optics);
    std::vector<double> c1(ny), s1(ny), c2(ny), s2(ny);
    for (int y = 0; y < ny; ++y) {
        c1[y] = std::cos(profile[y].first / 2.0);
        s1[y] = std::sin(profile[y].first / 2.0);
        c2[y] = std::cos(profile[y].second / 2.0);
        s2[y] = std::sin(profile[y].second / 2.0);
    }

    StripSpectrum out;
    out.ny = ny;
    out.wall_lower_y = -cfg.half_height;
    out.wall_upper_y = +cfg.half_height;
    out.kx.resize(cfg.kx_points);
    out.gap0_half.resize(cfg.kx_points);
    out.gap_pi_half.resize(cfg.kx_points);
    out.modes.resize(cfg.kx_points);

    const WalkProtocol bulk_proto = walk_2d();
    const int y_min = -ny / 2;
    const std::size_t dim = 2 * static_cast<std::size_t>(ny);

    // One mixed-space step at fixed k_x: coin(theta1(y)), x shifts as spin
    // phases e^{-+ i k_x}, coin(theta2(y)), then real-space y shifts.
    const auto apply_mixed = [&](std::vector<cx>& a, double kx) {
        for (int y = 0; y < ny; ++y) {
            const cx up = a[2 * y], dn = a[2 * y + 1];
            a[2 * y] = c1[y] * up - s1[y] * dn;
            a[2 * y + 1] = s1[y] * up + c1[y] * dn;
        }
        const cx pu = std::exp(cx(0.0, -kx)), pd = std::exp(cx(0.0, +kx));
        for (int y = 0; y < ny; ++y) {
            a[2 * y] *= pu;
            a[2 * y + 1] *= pd;
        }
        for (int y = 0; y < ny; ++y) {
            const cx up = a[2 * y], dn = a[2 * y + 1];
            a[2 * y] = c2[y] * up - s2[y] * dn;
            a[2 * y + 1] = s2[y] * up + c2[y] * dn;
        }
        const cx last_up = a[2 * (ny - 1)];
        for (int y = ny - 1; y >= 1; --y) a[2 * y] = a[2 * (y - 1)];
        a[0] = last_up;
        const cx first_dn = a[1];
        for (int y = 0; y + 1 < ny; ++y) a[2 * y + 1] = a[2 * (y + 1) + 1];
        a[2 * (ny - 1) + 1] = first_dn;
    };

    for (int i = 0; i < cfg.kx_points; ++i) {
        const double kx = -pi + 2.0 * pi * i / cfg.kx_points;
        out.kx[i] = kx;

        // Joint bulk-gap envelope: min over both asymptotic phases and k_y.
        double min_eps = pi, max_eps = 0.0;
        for (const auto& phase : {cfg.inside_angles, cfg.outside_angles}) {
            for (int jy = 0; jy < cfg.bz_points; ++jy) {
                const double ky = -pi + 2.0 * pi * jy / cfg.bz_points;
                const double e =
                    decompose_su2(bloch_operator(bulk_proto, phase.first, phase.second, {kx, ky}))
                        .epsilon;
                min_eps = std::min(min_eps, e);
                max_eps = std::max(max_eps, e);
            }
        }
        out.gap0_half[i] = min_eps;
        out.gap_pi_half[i] = pi - max_eps;

        Eigen::MatrixXcd u(dim, dim);
        std::vector<cx> col(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            std::fill(col.begin(), col.end(), cx(0.0));
            col[j] = cx(1.0);
            apply_mixed(col, kx);
            for (std::size_t r = 0; r < dim; ++r) u(static_cast<Eigen::Index>(r),
                                                    static_cast<Eigen::Index>(j)) = col[r];
        }
        const WalkEigensystem eig = walk_eigensystem(u);

        auto& modes = out.modes[i];
        modes.resize(dim);
        for (std::size_t m = 0; m < dim; ++m) {
            StripMode mode;
            mode.epsilon = eig.quasienergies[m];
            std::vector<double> p(ny);
            cx z(0.0, 0.0);
            for (int y = 0; y < ny; ++y) {
                p[y] = std::norm(eig.states(2 * y, static_cast<Eigen::Index>(m))) +
                       std::norm(eig.states(2 * y + 1, static_cast<Eigen::Index>(m)));
                z += p[y] * std::exp(cx(0.0, 2.0 * pi * y / ny));
            }
            double idx = std::arg(z) * ny / (2.0 * pi);
            if (idx < 0.0) idx += ny;
            mode.centroid_y = idx + y_min;
            const double d_low = torus_distance(mode.centroid_y, out.wall_lower_y, ny);
            const double d_up = torus_distance(mode.centroid_y, out.wall_upper_y, ny);
            mode.wall = d_low <= d_up ? -1 : +1;
            const double abs_eps = std::fabs(mode.epsilon);
            if (abs_eps < 0.98 * out.gap0_half[i])
                mode.gap = 0;
            else if (pi - abs_eps < 0.98 * out.gap_pi_half[i])
                mode.gap = 1;
            if (mode.gap >= 0) {
                const double wall_y = mode.wall < 0 ? out.wall_lower_y : out.wall_upper_y;
                for (int y = 0; y < ny; ++y)
                    if (torus_distance(y + y_min, wall_y, ny) > 10.0) mode.tail_beyond_10 += p[y];
            }
            modes[m] = mode;
        }
    }

    // Branch continuation between adjacent k_x samples (cyclic): forward
    // difference group velocity and signed gap-center crossings per wall.
    const double dk = 2.0 * pi / cfg.kx_points;
    const double match_tol = 3.5 * dk;
    for (int i = 0; i < cfg.kx_points; ++i) {
        const int j = (i + 1) % cfg.kx_points;
        for (int gap = 0; gap < 2; ++gap) {
            const double ref = gap == 0 ? 0.0 : pi;
            for (int wall = -1; wall <= 1; wall += 2) {
                std::vector<std::size_t> a_idx, b_idx;
                for (std::size_t m = 0; m < out.modes[i].size(); ++m)
                    if (out.modes[i][m].gap == gap && out.modes[i][m].wall == wall)
                        a_idx.push_back(m);
                const double half_j = gap == 0 ? out.gap0_half[j] : out.gap_pi_half[j];
                for (std::size_t m = 0; m < out.modes[j].size(); ++m) {
                    const StripMode& cand = out.modes[j][m];
                    if (cand.wall == wall &&
                        std::fabs(wrap_to_pi(cand.epsilon - ref)) < half_j + dk)
                        b_idx.push_back(m);
                }
                std::vector<MatchCandidate> cands;
                for (std::size_t ai = 0; ai < a_idx.size(); ++ai)
                    for (std::size_t bi = 0; bi < b_idx.size(); ++bi) {
                        const double d = std::fabs(wrap_to_pi(out.modes[j][b_idx[bi]].epsilon -
                                                              out.modes[i][a_idx[ai]].epsilon));
                        if (d <= match_tol) cands.push_back({ai, bi, d});
                    }
                std::sort(cands.begin(), cands.end(),
                          [](const MatchCandidate& l, const MatchCandidate& r) {
                              return l.dist < r.dist;
                          });
                std::vector<char> a_used(a_idx.size(), 0), b_used(b_idx.size(), 0);
                for (const MatchCandidate& c : cands) {
                    if (a_used[c.a] || b_used[c.b]) continue;
                    a_used[c.a] = b_used[c.b] = 1;
                    StripMode& ma = out.modes[i][a_idx[c.a]];
                    const StripMode& mb = out.modes[j][b_idx[c.b]];
                    const double de = wrap_to_pi(mb.epsilon - ma.epsilon);
                    ma.v_group = de / dk;
                    const double da = wrap_to_pi(ma.epsilon - ref);
                    const double db = wrap_to_pi(mb.epsilon - ref);
                    const int w = wall < 0 ? 0 : 1;
                    if (da < 0.0 && db >= 0.0)
                        out.crossings[gap][w] += 1;
                    else if (da >= 0.0 && db < 0.0)
                        out.crossings[gap][w] -= 1;
                }
                const double half_i = gap == 0 ? out.gap0_half[i] : out.gap_pi_half[i];
                for (std::size_t ai = 0; ai < a_idx.size(); ++ai) {
                    if (a_used[ai]) continue;
                    const double da = std::fabs(wrap_to_pi(out.modes[i][a_idx[ai]].epsilon - ref));
                    if (da < 0.7 * half_i)
                        throw std::runtime_error(
                            "ambiguous edge-mode crossings: a branch deep in the gap has no "
                            "continuation at the next k_x sample; refine the k_x grid");
                }
            }
        }
    }
    return out;
}

EdgeModeCount edge_mode_count(const StripSpectrum& spectrum, GapCenter gap) {
    const int g = gap == GapCenter::zero ? 0 : 1;
    return {spectrum.crossings[g][0], spectrum.crossings[g][1]};
}

void write_bands_csv(std::ostream& os, const QuasienergySpectrum& spectrum) {
    os << "k,m,epsilon\n";
    os.precision(17);
    for (std::size_t j = 0; j < spectrum.k.size(); ++j) {
        os << spectrum.k[j] << ",0," << -spectrum.epsilon[j] << '\n';
        os << spectrum.k[j] << ",1," << spectrum.epsilon[j] << '\n';
    }
}

void write_gap_scan_csv(std::ostream& os, const std::vector<GapScanEntry>& scan) {
    os << "theta1,theta2,gap0,gappi\n";
    os.precision(17);
    for (const GapScanEntry& e : scan)
        os << e.theta1 << ',' << e.theta2 << ',' << e.gap0 << ',' << e.gap_pi << '\n';
}

void write_strip_csv(std::ostream& os, const StripSpectrum& spectrum) {
    os << "k,m,epsilon,edge_label,v_g\n";
    os.precision(17);
    for (std::size_t i = 0; i < spectrum.kx.size(); ++i) {
        for (std::size_t m = 0; m < spectrum.modes[i].size(); ++m) {
            const StripMode& mode = spectrum.modes[i][m];
            const char* label = mode.gap < 0 ? "bulk" : (mode.wall < 0 ? "lower" : "upper");
            os << spectrum.kx[i] << ',' << m << ',' << mode.epsilon << ',' << label << ','
               << (mode.gap < 0 ? 0.0 : mode.v_group) << '\n';
        }
    }
}

}  // namespace dtqw
