#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dtqw/protocol.hpp"
#include "dtqw/state.hpp"

namespace dtqw {

enum class NoiseChannel { none, spin, position };

/// Stroboscopic decoherence: after each walk step the state is projectively
/// measured with probability p, either in the spin basis (site-resolved spin
/// projectors summed over position) or in the position basis.
struct DecoherenceConfig {
    NoiseChannel channel = NoiseChannel::none;
    double probability = 0.0;  // p per step, in [0, 1]
    std::uint64_t seed = 0;
    int trajectories = 1;
    /// Apply the measurement channel after every primitive instead of once
    /// per full step. Breaks the protection the default placement leaves to
    /// spin-pinned edge states.
    bool kraus_per_primitive = false;

    void validate() const;
};

/// Counter-based generator: every (seed, trajectory, step, draw) tuple maps
/// through a splitmix64 finalizer chain, so trajectories are independent and
/// reproducible regardless of execution order.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t trajectory)
        : seed_(seed), traj_(trajectory) {}
    void set_step(std::uint64_t step) {
        step_ = step;
        draw_ = 0;
    }
    /// Uniform double in [0, 1).
    double uniform();

  private:
    std::uint64_t seed_, traj_, step_ = 0, draw_ = 0;
};

/// rho' = (1-p) W rho W^dag + p sum_i P_i (W rho W^dag) P_i^dag with P_i the
/// spin (or site) projectors; equivalently, damping of the spin-off-diagonal
/// (site-off-diagonal) entries by 1-p.
DensityOperator channel_step(const DensityOperator& rho, const CompiledStep& w,
                             const DecoherenceConfig& cfg);
DensityOperator channel_step(const DensityOperator& rho, const WalkProtocol& protocol,
                             const CoinField& field, const DecoherenceConfig& cfg);

/// One stochastic-unraveling step, in place: apply W, then with probability p
/// sample a projector outcome with Born weights and project. The projected
/// state is rescaled back to its pre-projection norm so absorbing-guard
/// survival weights stay intact.
void trajectory_step(SpinorState& psi, const CompiledStep& w, const DecoherenceConfig& cfg,
                     CounterRng& rng);
SpinorState trajectory_step(const SpinorState& psi, const WalkProtocol& protocol,
                            const CoinField& field, const DecoherenceConfig& cfg,
                            CounterRng& rng);

/// Unitary pure-state evolution; observer runs at n = 0 and after each step.
using PureObserver = std::function<void(int n, const SpinorState&)>;
void evolve_pure(SpinorState& psi, const CompiledStep& w, int n_steps,
                 const PureObserver& observe = {});

/// Dense channel evolution; trace and Hermiticity are checked every step
/// (1e-10) on norm-conserving lattices. Observer runs at n = 0 and after
/// each step.
using DenseObserver = std::function<void(int n, const DensityOperator&)>;
void evolve_dense(DensityOperator& rho, const CompiledStep& w, const DecoherenceConfig& cfg,
                  int n_steps, const DenseObserver& observe = {});

/// Observables accumulated over a trajectory ensemble.
struct TrajectoryObservables {
    std::vector<Region> regions;                    // P(region) per step
    const SpinorState* overlap_reference = nullptr;  // |<ref|psi>|^2 per step
    bool track_survival = false;                     // remaining norm per step
    std::vector<int> snapshot_steps;                 // mean distributions here
    /// Optional site -> bin projection (-1 = excluded); accumulates a mean
    /// binned distribution per step (e.g. arc-length histograms).
    std::vector<int> projection_bins;
    int n_bins = 0;
};

struct TrajectoryEnsembleResult {
    int n_steps = 0;
    int n_trajectories = 0;
    std::vector<std::vector<double>> region_mean, region_err;  // [region][0..n]
    std::vector<double> overlap_mean, overlap_err;
    std::vector<double> survival_mean;
    std::vector<int> snapshot_steps;
    std::vector<std::vector<double>> snapshot_mean;  // [snapshot][site]
    std::vector<std::vector<double>> bin_mean;       // [0..n][bin]
};

/// Runs cfg.trajectories independent unravelings of n_steps each. Work is
/// split into 64 fixed blocks (trajectory index mod 64) reduced in block
/// order, so results do not depend on the thread count.
TrajectoryEnsembleResult run_trajectories(const SpinorState& initial, const CompiledStep& w,
                                          const DecoherenceConfig& cfg, int n_steps,
                                          const TrajectoryObservables& observables,
                                          int threads = 1);

/// Long-format CSV "n,observable_name,value[,stderr]".
struct TimeSeries {
    std::string name;
    std::vector<double> value;   // index = step
    std::vector<double> stderr_;  // empty for exact (dense/pure) series
};

void write_series_csv(std::ostream& os, const std::vector<TimeSeries>& series);

}  // namespace dtqw
