#include "dtqw/decoherence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dtqw/errors.hpp"

namespace dtqw {

void DecoherenceConfig::validate() const {
    if (!(probability >= 0.0 && probability <= 1.0))
        throw std::invalid_argument("decoherence probability must lie in [0, 1]");
    if (trajectories < 1) throw std::invalid_argument("trajectory count must be >= 1");
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void warn_large_p(const DecoherenceConfig& cfg) {
    if (cfg.channel != NoiseChannel::none && cfg.probability > 0.2)
        std::cerr << "warning: p = " << cfg.probability
                  << " leaves the small-decoherence validity domain (p << 1); results are "
                     "model-limited\n";
}

void apply_to_columns(Eigen::MatrixXcd& m, const CompiledStep& w, int primitive) {
    const Eigen::Index n = m.rows();
    std::vector<cx> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = m(i, j);
        if (primitive < 0)
            w.apply(col);
        else
            w.apply_primitive(static_cast<std::size_t>(primitive), col);
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
    }
}

/// M -> Op M Op^dag (Op = full step or one primitive).
void conjugate_in_place(Eigen::MatrixXcd& m, const CompiledStep& w, int primitive) {
    apply_to_columns(m, w, primitive);
    m.adjointInPlace();
    apply_to_columns(m, w, primitive);
    m.adjointInPlace();
}

/// Multiplies the measured-away coherences by 1-p: spin channel damps entries
/// whose spins differ, position channel damps entries whose sites differ.
void damp_coherences(Eigen::MatrixXcd& m, NoiseChannel channel, double p) {
    if (channel == NoiseChannel::none || p == 0.0) return;
    const double f = 1.0 - p;
    const Eigen::Index n = m.rows();
    if (channel == NoiseChannel::spin) {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (((i ^ j) & 1) != 0) m(i, j) *= f;
    } else {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if ((i >> 1) != (j >> 1)) m(i, j) *= f;
    }
}

/// Born-samples one projector outcome and projects, rescaling back to the
/// pre-measurement norm (keeps absorbing-guard survival weights intact).
void project_sample(SpinorState& psi, NoiseChannel channel, CounterRng& rng) {
    auto& a = psi.amplitudes();
    const double total = psi.norm_sq();
    if (total <= 1e-300) return;  // trajectory fully absorbed; nothing left to measure
    if (channel == NoiseChannel::spin) {
        double w_up = 0.0;
        for (std::size_t i = 0; i < a.size(); i += 2) w_up += std::norm(a[i]);
        const double w_dn = total - w_up;
        Spin pick = rng.uniform() * total < w_up ? Spin::up : Spin::down;
        if (pick == Spin::up && w_up < 1e-15 * total) pick = Spin::down;
        if (pick == Spin::down && w_dn < 1e-15 * total) pick = Spin::up;
        const double w_sel = pick == Spin::up ? w_up : w_dn;
        const double scale = std::sqrt(total / w_sel);
        const std::size_t keep = pick == Spin::up ? 0 : 1;
        for (std::size_t i = 0; i < a.size(); i += 2) {
            a[i + keep] *= scale;
            a[i + 1 - keep] = cx(0.0);
        }
    } else if (channel == NoiseChannel::position) {
        const std::size_t n_sites = a.size() / 2;
        const double r = rng.uniform() * total;
        double cum = 0.0, best_w = -1.0;
        std::size_t pick = 0, best = 0;
        bool found = false;
        for (std::size_t s = 0; s < n_sites; ++s) {
            const double w = std::norm(a[2 * s]) + std::norm(a[2 * s + 1]);
            if (w > best_w) {
                best_w = w;
                best = s;
            }
            cum += w;
            if (!found && r < cum) {
                pick = s;
                found = true;
            }
        }
        if (!found) pick = best;  // rounding pushed r past the last site
        double w_sel = std::norm(a[2 * pick]) + std::norm(a[2 * pick + 1]);
        if (w_sel < 1e-15 * total) {
            pick = best;
            w_sel = best_w;
        }
        const double scale = std::sqrt(total / w_sel);
        for (std::size_t s = 0; s < n_sites; ++s) {
            if (s == pick) {
                a[2 * s] *= scale;
                a[2 * s + 1] *= scale;
            } else {
                a[2 * s] = cx(0.0);
                a[2 * s + 1] = cx(0.0);
            }
        }
    }
}

}  // namespace

double CounterRng::uniform() {
    std::uint64_t u = splitmix(seed_);
    u = splitmix(u ^ traj_);
    u = splitmix(u ^ step_);
    u = splitmix(u ^ draw_++);
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

DensityOperator channel_step(const DensityOperator& rho, const CompiledStep& w,
                             const DecoherenceConfig& cfg) {
    cfg.validate();
    if (rho.geometry() != w.geometry())
        throw std::invalid_argument("density operator and step live on different lattices");
    DensityOperator out = rho;
    Eigen::MatrixXcd& m = out.matrix();
    if (!cfg.kraus_per_primitive) {
        conjugate_in_place(m, w, -1);
        damp_coherences(m, cfg.channel, cfg.probability);
    } else {
        for (std::size_t i = 0; i < w.primitive_count(); ++i) {
            conjugate_in_place(m, w, static_cast<int>(i));
            damp_coherences(m, cfg.channel, cfg.probability);
        }
    }
    return out;
}

DensityOperator channel_step(const DensityOperator& rho, const WalkProtocol& protocol,
                             const CoinField& field, const DecoherenceConfig& cfg) {
    return channel_step(rho, CompiledStep(protocol, field), cfg);
}

void trajectory_step(SpinorState& psi, const CompiledStep& w, const DecoherenceConfig& cfg,
                     CounterRng& rng) {
    if (psi.geometry() != w.geometry())
        throw std::invalid_argument("state and step live on different lattices");
    const bool noisy = cfg.channel != NoiseChannel::none && cfg.probability > 0.0;
    if (!cfg.kraus_per_primitive) {
        psi.add_leak(w.apply(psi.amplitudes()));
        if (noisy && rng.uniform() < cfg.probability) project_sample(psi, cfg.channel, rng);
    } else {
        for (std::size_t i = 0; i < w.primitive_count(); ++i) {
            psi.add_leak(w.apply_primitive(i, psi.amplitudes()));
            if (noisy && rng.uniform() < cfg.probability) project_sample(psi, cfg.channel, rng);
        }
    }
}

SpinorState trajectory_step(const SpinorState& psi, const WalkProtocol& protocol,
                            const CoinField& field, const DecoherenceConfig& cfg,
                            CounterRng& rng) {
    SpinorState out = psi;
    trajectory_step(out, CompiledStep(protocol, field), cfg, rng);
    return out;
}

void evolve_pure(SpinorState& psi, const CompiledStep& w, int n_steps,
                 const PureObserver& observe) {
    if (n_steps < 0) throw std::invalid_argument("step count must be >= 0");
    if (observe) observe(0, psi);
    for (int n = 1; n <= n_steps; ++n) {
        step(psi, w);
        if (observe) observe(n, psi);
    }
}

void evolve_dense(DensityOperator& rho, const CompiledStep& w, const DecoherenceConfig& cfg,
                  int n_steps, const DenseObserver& observe) {
    cfg.validate();
    if (n_steps < 0) throw std::invalid_argument("step count must be >= 0");
    warn_large_p(cfg);
    const bool absorbing = rho.geometry().any_absorbing();
    if (observe) observe(0, rho);
    for (int n = 1; n <= n_steps; ++n) {
        const double trace_before = rho.trace_real();
        rho = channel_step(rho, w, cfg);
        if (!absorbing) {
            if (std::abs(rho.trace_real() - trace_before) > 1e-10)
                throw InvariantViolation("channel step failed to preserve the trace at step " +
                                         std::to_string(n));
            if (rho.hermiticity_error() > 1e-10)
                throw InvariantViolation("density operator lost Hermiticity at step " +
                                         std::to_string(n));
        }
        if (observe) observe(n, rho);
    }
}

namespace {

struct BlockAccumulator {
    std::vector<std::vector<double>> region_sum, region_sumsq;
    std::vector<double> ov_sum, ov_sumsq;
    std::vector<double> surv_sum;
    std::vector<std::vector<double>> snap_sum;
    std::vector<std::vector<double>> bin_sum;

    void init(std::size_t n_regions, bool overlap, bool survival, std::size_t n_snapshots,
              std::size_t n_sites, int n_bins, int n_steps) {
        const std::size_t len = static_cast<std::size_t>(n_steps) + 1;
        region_sum.assign(n_regions, std::vector<double>(len, 0.0));
        region_sumsq.assign(n_regions, std::vector<double>(len, 0.0));
        if (overlap) {
            ov_sum.assign(len, 0.0);
            ov_sumsq.assign(len, 0.0);
        }
        if (survival) surv_sum.assign(len, 0.0);
        snap_sum.assign(n_snapshots, std::vector<double>(n_sites, 0.0));
        if (n_bins > 0) bin_sum.assign(len, std::vector<double>(n_bins, 0.0));
    }
};

}  // namespace

TrajectoryEnsembleResult run_trajectories(const SpinorState& initial, const CompiledStep& w,
                                          const DecoherenceConfig& cfg, int n_steps,
                                          const TrajectoryObservables& observables,
                                          int threads) {
    cfg.validate();
    if (initial.geometry() != w.geometry())
        throw std::invalid_argument("initial state and step live on different lattices");
    if (n_steps < 0) throw std::invalid_argument("step count must be >= 0");
    warn_large_p(cfg);
    const std::size_t n_sites = static_cast<std::size_t>(initial.geometry().n_sites());
    if (!observables.projection_bins.empty()) {
        if (observables.projection_bins.size() != n_sites)
            throw std::invalid_argument("projection_bins must assign every site");
        if (observables.n_bins <= 0)
            throw std::invalid_argument("projection_bins set but n_bins <= 0");
        for (int b : observables.projection_bins)
            if (b < -1 || b >= observables.n_bins)
                throw std::invalid_argument("projection bin index out of range");
    }
    if (observables.overlap_reference &&
        observables.overlap_reference->geometry() != initial.geometry())
        throw std::invalid_argument("overlap reference lives on a different lattice");

    std::vector<int> snap_index(static_cast<std::size_t>(n_steps) + 1, -1);
    for (std::size_t i = 0; i < observables.snapshot_steps.size(); ++i) {
        const int s = observables.snapshot_steps[i];
        if (s < 0 || s > n_steps)
            throw std::invalid_argument("snapshot step outside the evolution window");
        snap_index[static_cast<std::size_t>(s)] = static_cast<int>(i);
    }
    // Site/bin pairs once, so the per-step binning loop touches only mapped sites.
    std::vector<std::pair<std::size_t, int>> bin_of_site;
    for (std::size_t s = 0; s < observables.projection_bins.size(); ++s)
        if (observables.projection_bins[s] >= 0)
            bin_of_site.emplace_back(s, observables.projection_bins[s]);

    constexpr int n_blocks = 64;
    const int total = cfg.trajectories;
    const std::size_t n_regions = observables.regions.size();
    std::vector<BlockAccumulator> acc(n_blocks);
    for (auto& a : acc)
        a.init(n_regions, observables.overlap_reference != nullptr, observables.track_survival,
               observables.snapshot_steps.size(), n_sites, observables.n_bins, n_steps);

    const auto record = [&](BlockAccumulator& a, int n, const SpinorState& psi) {
        const std::size_t un = static_cast<std::size_t>(n);
        for (std::size_t r = 0; r < n_regions; ++r) {
            const double v = region_probability(psi, observables.regions[r]);
            a.region_sum[r][un] += v;
            a.region_sumsq[r][un] += v * v;
        }
        if (observables.overlap_reference) {
            const double v = overlap_probability(psi, *observables.overlap_reference);
            a.ov_sum[un] += v;
            a.ov_sumsq[un] += v * v;
        }
        if (observables.track_survival) a.surv_sum[un] += 1.0 - psi.leaked_norm();
        if (!bin_of_site.empty()) {
            const auto& amp = psi.amplitudes();
            auto& row = a.bin_sum[un];
            for (const auto& [site, bin] : bin_of_site)
                row[static_cast<std::size_t>(bin)] +=
                    std::norm(amp[2 * site]) + std::norm(amp[2 * site + 1]);
        }
        if (snap_index[un] >= 0) {
            const auto& amp = psi.amplitudes();
            auto& row = a.snap_sum[static_cast<std::size_t>(snap_index[un])];
            for (std::size_t s = 0; s < n_sites; ++s)
                row[s] += std::norm(amp[2 * s]) + std::norm(amp[2 * s + 1]);
        }
    };

    const auto run_block = [&](int block) {
        BlockAccumulator& a = acc[static_cast<std::size_t>(block)];
        for (int t = block; t < total; t += n_blocks) {
            SpinorState psi = initial;
            CounterRng rng(cfg.seed, static_cast<std::uint64_t>(t));
            record(a, 0, psi);
            for (int n = 1; n <= n_steps; ++n) {
                rng.set_step(static_cast<std::uint64_t>(n));
                trajectory_step(psi, w, cfg, rng);
                record(a, n, psi);
            }
        }
    };

    threads = std::clamp(threads, 1, n_blocks);
    if (threads <= 1) {
        for (int b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
                    run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction in block order.
    TrajectoryEnsembleResult out;
    out.n_steps = n_steps;
    out.n_trajectories = total;
    out.snapshot_steps = observables.snapshot_steps;
    const std::size_t len = static_cast<std::size_t>(n_steps) + 1;
    const double t_count = static_cast<double>(total);
    const auto finish = [&](const std::vector<double>& sum, const std::vector<double>& sumsq,
                            std::vector<double>& mean, std::vector<double>& err) {
        mean.assign(len, 0.0);
        err.assign(len, 0.0);
        for (std::size_t n = 0; n < len; ++n) {
            mean[n] = sum[n] / t_count;
            if (total > 1) {
                const double var =
                    std::max(0.0, (sumsq[n] - sum[n] * sum[n] / t_count) / (t_count - 1.0));
                err[n] = std::sqrt(var / t_count);
            }
        }
    };

    out.region_mean.resize(n_regions);
    out.region_err.resize(n_regions);
    for (std::size_t r = 0; r < n_regions; ++r) {
        std::vector<double> sum(len, 0.0), sumsq(len, 0.0);
        for (const auto& a : acc)
            for (std::size_t n = 0; n < len; ++n) {
                sum[n] += a.region_sum[r][n];
                sumsq[n] += a.region_sumsq[r][n];
            }
        finish(sum, sumsq, out.region_mean[r], out.region_err[r]);
    }
    if (observables.overlap_reference) {
        std::vector<double> sum(len, 0.0), sumsq(len, 0.0);
        for (const auto& a : acc)
            for (std::size_t n = 0; n < len; ++n) {
                sum[n] += a.ov_sum[n];
                sumsq[n] += a.ov_sumsq[n];
            }
        finish(sum, sumsq, out.overlap_mean, out.overlap_err);
    }
    if (observables.track_survival) {
        out.survival_mean.assign(len, 0.0);
        for (const auto& a : acc)
            for (std::size_t n = 0; n < len; ++n) out.survival_mean[n] += a.surv_sum[n];
        for (std::size_t n = 0; n < len; ++n) out.survival_mean[n] /= t_count;
    }
    out.snapshot_mean.assign(observables.snapshot_steps.size(),
                             std::vector<double>(n_sites, 0.0));
    for (std::size_t i = 0; i < out.snapshot_mean.size(); ++i) {
        for (const auto& a : acc)
            for (std::size_t s = 0; s < n_sites; ++s) out.snapshot_mean[i][s] += a.snap_sum[i][s];
        for (std::size_t s = 0; s < n_sites; ++s) out.snapshot_mean[i][s] /= t_count;
    }
    if (observables.n_bins > 0 && !bin_of_site.empty()) {
        out.bin_mean.assign(len, std::vector<double>(static_cast<std::size_t>(observables.n_bins),
                                                     0.0));
        for (std::size_t n = 0; n < len; ++n) {
            for (const auto& a : acc)
                for (int b = 0; b < observables.n_bins; ++b)
                    out.bin_mean[n][static_cast<std::size_t>(b)] +=
                        a.bin_sum[n][static_cast<std::size_t>(b)];
            for (int b = 0; b < observables.n_bins; ++b)
                out.bin_mean[n][static_cast<std::size_t>(b)] /= t_count;
        }
    }
    return out;
}

void write_series_csv(std::ostream& os, const std::vector<TimeSeries>& series) {
    bool any_err = false;
    std::size_t max_len = 0;
    for (const TimeSeries& s : series) {
        if (!s.stderr_.empty()) any_err = true;
        max_len = std::max(max_len, s.value.size());
    }
    os << (any_err ? "n,observable_name,value,stderr" : "n,observable_name,value") << '\n';
    os.precision(17);
    for (std::size_t n = 0; n < max_len; ++n) {
        for (const TimeSeries& s : series) {
            if (n >= s.value.size()) continue;
            os << n << ',' << s.name << ',' << s.value[n];
            if (any_err) {
                os << ',';
                if (n < s.stderr_.size()) os << s.stderr_[n];
            }
            os << '\n';
        }
    }
}

}  // namespace dtqw
