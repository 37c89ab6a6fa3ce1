#include "dtqw/edge.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "dtqw/errors.hpp"
#include "dtqw/linalg.hpp"

namespace dtqw {

namespace {

double circular_distance(double a, double b, double period) {
    double d = std::fabs(a - b);
    d = std::fmod(d, period);
    return std::min(d, period - d);
}

double gap_distance(double eps, GapCenter gap) {
    const double e = wrap_to_pi(eps);
    return gap == GapCenter::zero ? std::fabs(e) : pi - std::fabs(e);
}

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

struct Localization {
    double center = 0.0;    // centered coordinate, circular mean
    double center_idx = 0;  // site-index coordinate in [0, n)
    double rms = 0.0;
};

Localization localize_on_ring(const std::vector<double>& p, const LatticeGeometry& g) {
    const double n = static_cast<double>(g.n_sites());
    cx z(0.0, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        z += p[i] * std::exp(cx(0.0, 2.0 * pi * static_cast<double>(i) / n));
    Localization loc;
    double idx = std::arg(z) * n / (2.0 * pi);
    if (idx < 0.0) idx += n;
    loc.center_idx = idx;
    loc.center = idx + g.coord_min(0);
    double var = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double dx = static_cast<double>(i) - idx;
        dx -= n * std::round(dx / n);  // minimum image on the ring
        var += p[i] * dx * dx;
    }
    loc.rms = std::sqrt(std::max(0.0, var));
    return loc;
}

/// Reduced spin state of a pure 1D walker: rho_s = sum_x a_x a_x^dag.
void spin_factorization(const SpinorState& psi, Eigen::Vector2cd& factor, double& purity) {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    const auto& a = psi.amplitudes();
    for (std::size_t s = 0; s + 1 < a.size(); s += 2) {
        Eigen::Vector2cd v;
        v << a[s], a[s + 1];
        rho += v * v.adjoint();
    }
    const double tr = rho.trace().real();
    if (tr > 0.0) rho /= tr;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    purity = es.eigenvalues()(1);  // ascending order; (1) is the largest
    factor = es.eigenvectors().col(1);
}

}  // namespace

std::vector<double> wall_positions_1d(const CoinField& field) {
    const LatticeGeometry& g = field.geometry();
    if (g.dimension() != 1)
        throw std::invalid_argument("wall_positions_1d: 1D fields only");
    const std::int64_t n = g.n_sites();
    std::vector<double> crossings;
    for (const std::vector<double>* comp : {&field.theta1(), &field.theta2()}) {
        const auto [lo_it, hi_it] = std::minmax_element(comp->begin(), comp->end());
        if (*hi_it - *lo_it < 1e-9) continue;  // homogeneous component
        const double mid = 0.5 * (*lo_it + *hi_it);
        // A symmetric crossover samples the midpoint exactly at one site; snap
        // rounding-level deviations so that site counts as "left of the wall".
        const double snap = 1e-12 * (*hi_it - *lo_it);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int64_t j = (i + 1) % n;
            double a = (*comp)[i] - mid;
            double b = (*comp)[j] - mid;
            if (std::fabs(a) < snap) a = 0.0;
            if (std::fabs(b) < snap) b = 0.0;
            if ((a <= 0.0 && b > 0.0) || (b <= 0.0 && a > 0.0))
                crossings.push_back(g.site_coord(i).x + 0.5);
        }
    }
    std::sort(crossings.begin(), crossings.end());
    // Merge crossings of the two components at the same physical wall.
    std::vector<double> walls;
    for (double c : crossings) {
        if (!walls.empty() && (c - walls.back() < 1.5 ||
                               circular_distance(c, walls.front(), n) < 1.5))
            continue;
        walls.push_back(c);
    }
    return walls;
}

std::vector<EdgeState> find_edge_states(const WalkProtocol& protocol, const CoinField& field,
                                        GapCenter gap, double tolerance) {
    const LatticeGeometry& g = field.geometry();
    if (g.dimension() != 1)
        throw std::invalid_argument("find_edge_states: 1D lattices only");
    if (g.boundary(0) != Boundary::periodic)
        throw std::invalid_argument("find_edge_states: the lattice must be a ring");
    if (tolerance <= 0.0) throw std::invalid_argument("find_edge_states: tolerance must be > 0");

    const std::vector<double> walls = wall_positions_1d(field);
    if (walls.empty()) return {};
    if (walls.size() % 2 != 0)
        std::cerr << "warning: odd domain-wall count on a ring; field is inconsistent\n";
    const std::int64_t n_sites = g.n_sites();
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const double sep =
            circular_distance(walls[i], walls[(i + 1) % walls.size()], n_sites);
        if (walls.size() > 1 && sep < 40.0)
            std::cerr << "warning: domain walls only " << sep
                      << " sites apart; edge states may hybridize above 1e-8\n";
    }

    const Eigen::MatrixXcd w = dense_step_operator(protocol, field);
    const WalkEigensystem eig = walk_eigensystem(w);
    const Eigen::Index dim = w.rows();

    // In-gap candidates, clustered by their (circular) quasienergy distance.
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double e = eig.quasienergies[static_cast<std::size_t>(j)];
        if (gap_distance(e, gap) <= tolerance)
            cand.push_back({wrap_to_pi(e - (gap == GapCenter::zero ? 0.0 : pi)), j});
    }
    if (cand.empty()) return {};
    std::sort(cand.begin(), cand.end());
    std::vector<std::vector<Eigen::Index>> clusters;
    double prev_d = 0.0;
    for (const auto& [d, j] : cand) {
        if (!clusters.empty() && std::fabs(d - prev_d) < 1e-8)
            clusters.back().push_back(j);
        else
            clusters.push_back({j});
        prev_d = d;
    }

    std::vector<EdgeState> out;
    for (const auto& cluster : clusters) {
        const Eigen::Index m = static_cast<Eigen::Index>(cluster.size());
        Eigen::MatrixXcd v(dim, m);
        for (Eigen::Index c = 0; c < m; ++c)
            v.col(c) = eig.states.col(cluster[static_cast<std::size_t>(c)]);
        if (m > 1) {
            // Near-degenerate wall pair: zgeev returns arbitrary mixtures, so
            // orthonormalize and split along the chiral operator (exact for
            // symmetric frames) or a wall-indicator otherwise.
            const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
            v = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, m);
            Eigen::MatrixXcd split_op;
            if (protocol.chiral_spin_operator) {
                split_op = dense_chiral_operator(protocol, g);
            } else {
                split_op = Eigen::MatrixXcd::Zero(dim, dim);
                for (std::int64_t s = 0; s < n_sites; ++s) {
                    const double x = g.site_coord(s).x;
                    std::size_t nearest = 0;
                    for (std::size_t wi = 1; wi < walls.size(); ++wi)
                        if (circular_distance(x, walls[wi], n_sites) <
                            circular_distance(x, walls[nearest], n_sites))
                            nearest = wi;
                    split_op(2 * s, 2 * s) = split_op(2 * s + 1, 2 * s + 1) =
                        static_cast<double>(nearest);
                }
            }
            Eigen::MatrixXcd proj = v.adjoint() * split_op * v;
            proj = 0.5 * (proj + proj.adjoint().eval());
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(proj);
            v = v * es.eigenvectors();
        }
        for (Eigen::Index c = 0; c < m; ++c) {
            const Eigen::VectorXcd vec = v.col(c).normalized();
            const Eigen::VectorXcd wv = w * vec;
            const cx lambda = vec.dot(wv);  // <vec|W|vec>
            const double residual = (wv - lambda * vec).norm();
            if (residual > 1e-8) {
                std::cerr << "warning: dropping in-gap candidate with eigen-residual "
                          << residual << '\n';
                continue;
            }
            SpinorState psi(g);
            for (Eigen::Index i = 0; i < dim; ++i)
                psi.amplitudes()[static_cast<std::size_t>(i)] = vec(i);
            std::vector<double> p(n_sites);
            for (std::int64_t s = 0; s < n_sites; ++s)
                p[s] = std::norm(vec(2 * s)) + std::norm(vec(2 * s + 1));
            const Localization loc = localize_on_ring(p, g);
            double wall_dist = 1e300;
            for (double wx : walls)
                wall_dist = std::min(wall_dist, circular_distance(loc.center, wx, n_sites));
            if (wall_dist > 5.0) continue;  // in-gap but not wall-bound

            EdgeState e(std::move(psi));
            double eps = -std::arg(lambda);
            if (eps <= -pi) eps += 2.0 * pi;
            e.quasienergy = eps;
            e.gap = gap;
            e.center = loc.center;
            e.rms_size = loc.rms;
            spin_factorization(e.state, e.spin_factor, e.spin_purity);
            e.factorized = e.spin_purity >= 1.0 - 1e-6;
            out.push_back(std::move(e));
        }
    }

    // Two states pinned to one wall means the splitting failed to separate them.
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].gap == out[j].gap &&
                circular_distance(out[i].center, out[j].center, n_sites) < 2.0)
                std::cerr << "warning: hybridized pair sharing a wall near x = "
                          << out[i].center << '\n';
    std::sort(out.begin(), out.end(),
              [](const EdgeState& a, const EdgeState& b) { return a.center < b.center; });
    return out;
}

DecayPrediction decay_rate(const EdgeState& edge, NoiseChannel channel, double p, int n_max) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("decay_rate: probability must lie in [0, 1]");
    const auto& a = edge.state.amplitudes();
    const double total = edge.state.norm_sq();
    DecayPrediction out;
    out.channel = channel;
    if (channel == NoiseChannel::spin) {
        double w_up = 0.0;
        for (std::size_t i = 0; i < a.size(); i += 2) w_up += std::norm(a[i]);
        w_up /= total;
        const double w_dn = 1.0 - w_up;
        out.gamma = p * (1.0 - (w_up * w_up + w_dn * w_dn));
    } else if (channel == NoiseChannel::position) {
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < a.size(); i += 2) {
            const double px = (std::norm(a[i]) + std::norm(a[i + 1])) / total;
            sum_sq += px * px;
        }
        out.gamma = p * (1.0 - sum_sq);
    }
    if (n_max > 0) {
        out.predicted.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            out.predicted[static_cast<std::size_t>(n)] = std::pow(1.0 - out.gamma, n);
    }
    return out;
}

DecayMeasurement measure_decay(const EdgeState& edge, const WalkProtocol& protocol,
                               const CoinField& field, NoiseChannel channel, double p,
                               int n_max, bool kraus_per_primitive) {
    if (n_max < 1) throw std::invalid_argument("measure_decay: n_max must be >= 1");
    const CompiledStep w(protocol, field);
    DensityOperator rho = DensityOperator::pure(edge.state);
    DecoherenceConfig cfg;
    cfg.channel = channel;
    cfg.probability = p;
    cfg.kraus_per_primitive = kraus_per_primitive;

    DecayMeasurement out;
    out.pi_n.reserve(static_cast<std::size_t>(n_max) + 1);
    evolve_dense(rho, w, cfg, n_max, [&](int, const DensityOperator& r) {
        out.pi_n.push_back(r.overlap(edge.state));
    });
    out.predicted_rate = decay_rate(edge, channel, p).gamma;

    std::vector<double> xs, ys;
    for (int n = 5; n <= std::min(50, n_max); ++n) {
        const double v = out.pi_n[static_cast<std::size_t>(n)];
        if (v > 0.0) {
            xs.push_back(n);
            ys.push_back(std::log(v));
        }
    }
    out.fitted_rate = 1.0 - std::exp(ls_slope(xs, ys));
    return out;
}

namespace {

/// Unwrapped arc-length front trajectory: per step, the packet's circular
/// mean plus the 90th-percentile leading offset of its mass distribution.
std::vector<double> front_trajectory(const std::vector<std::vector<double>>& bins, int n_bins) {
    const double b_len = static_cast<double>(n_bins);
    std::vector<double> front(bins.size(), 0.0);
    double prev = 0.0, offset = 0.0;
    bool have_prev = false;
    std::vector<std::pair<double, double>> rel;  // (offset from center, mass)
    for (std::size_t n = 0; n < bins.size(); ++n) {
        const auto& row = bins[n];
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        if (total < 1e-12) {
            front[n] = have_prev ? prev : 0.0;
            continue;
        }
        cx z(0.0, 0.0);
        for (int b = 0; b < n_bins; ++b)
            z += row[static_cast<std::size_t>(b)] * std::exp(cx(0.0, 2.0 * pi * b / b_len));
        double center = std::arg(z) * b_len / (2.0 * pi);
        if (center < 0.0) center += b_len;
        rel.clear();
        for (int b = 0; b < n_bins; ++b) {
            double d = static_cast<double>(b) - center;
            d -= b_len * std::round(d / b_len);
            rel.push_back({d, row[static_cast<std::size_t>(b)]});
        }
        std::sort(rel.begin(), rel.end());
        double cum = 0.0, q90 = rel.back().first;
        for (const auto& [d, mass] : rel) {
            cum += mass;
            if (cum >= 0.9 * total) {
                q90 = d;
                break;
            }
        }
        double f = center + q90;
        if (have_prev) {
            while (f + offset - prev > b_len / 2.0) offset -= b_len;
            while (f + offset - prev < -b_len / 2.0) offset += b_len;
        }
        front[n] = f + offset;
        prev = front[n];
        have_prev = true;
    }
    return front;
}

/// Period of an oscillatory series by autocorrelation of the moving-average
/// detrended signal, searched around `expected` with parabolic refinement.
double series_period(const std::vector<double>& v, double expected, int n0) {
    const int n = static_cast<int>(v.size());
    const int half_win = 10;
    std::vector<double> r(v.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half_win), hi = std::min(n - 1, i + half_win);
        double mean = 0.0;
        for (int j = lo; j <= hi; ++j) mean += v[static_cast<std::size_t>(j)];
        mean /= (hi - lo + 1);
        r[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] - mean;
    }
    const int tau_lo = std::max(2, static_cast<int>(0.4 * expected));
    const int tau_hi = std::min(n - n0 - 10, static_cast<int>(1.6 * expected));
    if (tau_hi <= tau_lo) return 0.0;
    std::vector<double> score(static_cast<std::size_t>(tau_hi) + 1, -1e300);
    int best = tau_lo;
    for (int tau = tau_lo; tau <= tau_hi; ++tau) {
        double num = 0.0, da = 0.0, db = 0.0;
        for (int i = n0; i + tau < n; ++i) {
            const double a = r[static_cast<std::size_t>(i)];
            const double b = r[static_cast<std::size_t>(i + tau)];
            num += a * b;
            da += a * a;
            db += b * b;
        }
        score[static_cast<std::size_t>(tau)] =
            (da > 0.0 && db > 0.0) ? num / std::sqrt(da * db) : -1e300;
        if (score[static_cast<std::size_t>(tau)] > score[static_cast<std::size_t>(best)])
            best = tau;
    }
    double refined = best;
    if (best > tau_lo && best < tau_hi) {
        const double ym = score[static_cast<std::size_t>(best - 1)];
        const double y0 = score[static_cast<std::size_t>(best)];
        const double yp = score[static_cast<std::size_t>(best + 1)];
        const double denom = ym - 2.0 * y0 + yp;
        if (std::fabs(denom) > 1e-12) refined += 0.5 * (ym - yp) / denom;
    }
    return refined;
}

}  // namespace

DropletTransportResult droplet_transport(const DropletTransportConfig& cfg) {
    const LatticeGeometry& g = cfg.geometry;
    if (g.dimension() != 2)
        throw std::invalid_argument("droplet_transport: 2D lattices only");
    cfg.shape.validate();
    cfg.optics.validate();
    cfg.noise.validate();
    if (cfg.n_steps < 1) throw std::invalid_argument("droplet_transport: need n_steps >= 1");
    if (!(cfg.band_lo > 0.0 && cfg.band_lo < cfg.band_hi && cfg.band_hi < 1.0))
        throw std::invalid_argument("droplet_transport: need 0 < band_lo < band_hi < 1");

    const CoinField field =
        island_field(g, cfg.shape, cfg.inside_angles, cfg.outside_angles, cfg.optics);
    const std::vector<double> s = smoothed_indicator(g, cfg.shape, cfg.optics);
    const std::int64_t n_sites = g.n_sites();

    // F: the transition band of the convolved indicator, dilated (Chebyshev).
    std::vector<char> fmask(static_cast<std::size_t>(n_sites), 0);
    for (std::int64_t i = 0; i < n_sites; ++i) {
        if (s[static_cast<std::size_t>(i)] < cfg.band_lo ||
            s[static_cast<std::size_t>(i)] > cfg.band_hi)
            continue;
        const Coord c = g.site_coord(i);
        for (int dx = -cfg.band_dilation; dx <= cfg.band_dilation; ++dx)
            for (int dy = -cfg.band_dilation; dy <= cfg.band_dilation; ++dy) {
                const Coord nb{c.x + dx, c.y + dy};
                if (g.contains(nb))
                    fmask[static_cast<std::size_t>(g.site_index(nb))] = 1;
            }
    }
    std::vector<Coord> f_coords, l_coords;
    for (std::int64_t i = 0; i < n_sites; ++i) {
        if (!fmask[static_cast<std::size_t>(i)]) continue;
        const Coord c = g.site_coord(i);
        f_coords.push_back(c);
        if (c.y < cfg.shape.center_y) l_coords.push_back(c);
    }
    DropletTransportResult out;
    out.f_region = Region(g, f_coords);
    out.l_region = Region(g, l_coords);
    if (out.f_region.empty())
        throw std::invalid_argument("droplet_transport: contour band contains no sites");

    // Arc-length bins along the contour, nearest-vertex assignment.
    const auto poly = cfg.shape.contour_polyline(4096);
    std::vector<double> arc(poly.size(), 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i)
        arc[i] = arc[i - 1] + std::hypot(poly[i].first - poly[i - 1].first,
                                         poly[i].second - poly[i - 1].second);
    const double arc_total =
        arc.back() + std::hypot(poly.front().first - poly.back().first,
                                poly.front().second - poly.back().second);
    out.contour_length = arc_total;
    const int n_bins = static_cast<int>(std::ceil(arc_total));
    std::vector<int> site_bins(static_cast<std::size_t>(n_sites), -1);
    for (const Coord& c : f_coords) {
        double best = 1e300;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const double d = std::hypot(c.x - poly[i].first, c.y - poly[i].second);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        site_bins[static_cast<std::size_t>(g.site_index(c))] =
            std::min(n_bins - 1, static_cast<int>(arc[best_i]));
    }

    const SpinorState initial = SpinorState::basis_state(g, cfg.initial_site, cfg.initial_spin);
    const CompiledStep w(walk_2d(), field);
    const std::size_t len = static_cast<std::size_t>(cfg.n_steps) + 1;
    const bool stochastic =
        cfg.noise.channel != NoiseChannel::none && cfg.noise.probability > 0.0;

    std::vector<double> f_val(len, 0.0), f_err, l_val(len, 0.0), l_err;
    std::vector<std::vector<double>> bins(len,
                                          std::vector<double>(static_cast<std::size_t>(n_bins),
                                                              0.0));
    out.snapshot_steps = cfg.snapshot_steps;
    out.snapshots.assign(cfg.snapshot_steps.size(),
                         std::vector<double>(static_cast<std::size_t>(n_sites), 0.0));

    if (!stochastic) {
        std::vector<int> snap_index(len, -1);
        for (std::size_t i = 0; i < cfg.snapshot_steps.size(); ++i) {
            const int step_n = cfg.snapshot_steps[i];
            if (step_n < 0 || step_n > cfg.n_steps)
                throw std::invalid_argument("snapshot step outside the evolution window");
            snap_index[static_cast<std::size_t>(step_n)] = static_cast<int>(i);
        }
        SpinorState psi = initial;
        evolve_pure(psi, w, cfg.n_steps, [&](int n, const SpinorState& st) {
            const std::size_t un = static_cast<std::size_t>(n);
            f_val[un] = region_probability(st, out.f_region);
            l_val[un] = region_probability(st, out.l_region);
            const auto& amp = st.amplitudes();
            for (std::int64_t i = 0; i < n_sites; ++i) {
                const int b = site_bins[static_cast<std::size_t>(i)];
                if (b >= 0)
                    bins[un][static_cast<std::size_t>(b)] +=
                        std::norm(amp[2 * i]) + std::norm(amp[2 * i + 1]);
            }
            if (snap_index[un] >= 0) {
                auto& row = out.snapshots[static_cast<std::size_t>(snap_index[un])];
                for (std::int64_t i = 0; i < n_sites; ++i)
                    row[static_cast<std::size_t>(i)] =
                        std::norm(amp[2 * i]) + std::norm(amp[2 * i + 1]);
            }
        });
    } else {
        TrajectoryObservables obs;
        obs.regions = {out.f_region, out.l_region};
        obs.projection_bins = site_bins;
        obs.n_bins = n_bins;
        obs.snapshot_steps = cfg.snapshot_steps;
        const TrajectoryEnsembleResult ens =
            run_trajectories(initial, w, cfg.noise, cfg.n_steps, obs, cfg.threads);
        f_val = ens.region_mean[0];
        f_err = ens.region_err[0];
        l_val = ens.region_mean[1];
        l_err = ens.region_err[1];
        bins = ens.bin_mean;
        out.snapshots = ens.snapshot_mean;
    }

    out.f_population = {"P_F", f_val, f_err};
    std::vector<double> ratio(len, 0.0), ratio_err;
    for (std::size_t n = 0; n < len; ++n)
        ratio[n] = f_val[n] > 1e-12 ? l_val[n] / f_val[n] : 0.0;
    if (!f_err.empty()) {
        ratio_err.assign(len, 0.0);
        for (std::size_t n = 0; n < len; ++n)
            if (f_val[n] > 1e-12)
                ratio_err[n] = std::hypot(l_err[n] / f_val[n],
                                          l_val[n] * f_err[n] / (f_val[n] * f_val[n]));
    }
    out.l_ratio = {"P_L_over_P_F", ratio, ratio_err};

    const std::vector<double> front = front_trajectory(bins, n_bins);
    out.front_position = {"front_position", front, {}};
    const int fit_lo = cfg.front_fit_lo;
    const int fit_hi = cfg.front_fit_hi > 0 ? cfg.front_fit_hi : cfg.n_steps - 5;
    std::vector<double> xs, ys;
    for (int n = fit_lo; n <= std::min(fit_hi, cfg.n_steps); ++n) {
        xs.push_back(n);
        ys.push_back(front[static_cast<std::size_t>(n)]);
    }
    out.front_speed = std::fabs(ls_slope(xs, ys));
    out.l_period = series_period(ratio, arc_total, std::min(50, cfg.n_steps / 4));
    return out;
}

std::vector<EdgeSizeEntry> edge_state_size_sweep(const std::vector<double>& ratios,
                                                 int n_sites) {
    const std::pair<double, double> left{-pi / 2.0, pi / 4.0};
    const std::pair<double, double> right{-pi / 2.0, 3.0 * pi / 4.0};
    const LatticeGeometry g = LatticeGeometry::line(n_sites);
    std::vector<EdgeSizeEntry> out;
    for (double q : ratios) {
        const OpticsConfig optics = OpticsConfig::from_ratio(q);
        const CoinField field = wall_field_1d(g, left, right, optics);
        const auto states = find_edge_states(split_step_1d(), field, GapCenter::zero, 0.1);
        // Keep the state bound to the engineered (erf) wall, not the wrap seam.
        const EdgeState* pick = nullptr;
        for (const EdgeState& e : states)
            if (std::fabs(e.center) < n_sites / 4.0 &&
                (!pick || std::fabs(e.center) < std::fabs(pick->center)))
                pick = &e;
        if (!pick) throw std::runtime_error(
            "edge_state_size_sweep: no wall state found at a/R_A = " + std::to_string(q));
        EdgeSizeEntry entry;
        entry.ratio = q;
        entry.rms_size = pick->rms_size;
        const cx a_up = pick->state.amplitude({0, 0}, Spin::up);
        const cx a_dn = pick->state.amplitude({0, 0}, Spin::down);
        entry.p_init =
            std::norm(std::conj(a_up) * pick->spin_factor(0) +
                      std::conj(a_dn) * pick->spin_factor(1));
        out.push_back(entry);
    }
    return out;
}

void write_edge_state_json(std::ostream& os, const EdgeState& edge) {
    nlohmann::json j;
    j["epsilon"] = edge.quasienergy;
    j["gap"] = edge.gap == GapCenter::zero ? "zero" : "pi";
    j["center"] = edge.center;
    j["rms_size"] = edge.rms_size;
    j["spin_purity"] = edge.spin_purity;
    if (edge.factorized) {
        j["spin_factor"] = {{edge.spin_factor(0).real(), edge.spin_factor(0).imag()},
                            {edge.spin_factor(1).real(), edge.spin_factor(1).imag()}};
    } else {
        j["spin_factor"] = nullptr;
    }
    // Rates per unit probability (multiply by p_S / p_P for a given channel).
    j["gamma_spin"] = decay_rate(edge, NoiseChannel::spin, 1.0).gamma;
    j["gamma_position"] = decay_rate(edge, NoiseChannel::position, 1.0).gamma;
    os << j.dump(2) << '\n';
}

}  // namespace dtqw
