#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "dtqw/geometry.hpp"

namespace dtqw {

using cx = std::complex<double>;

/// Pure walker state: one complex amplitude per (site, spin) basis element.
class SpinorState {
  public:
    explicit SpinorState(LatticeGeometry g);
    /// Single-site basis state |c, s>.
    static SpinorState basis_state(const LatticeGeometry& g, Coord c, Spin s);

    const LatticeGeometry& geometry() const { return geom_; }
    std::vector<cx>& amplitudes() { return amp_; }
    const std::vector<cx>& amplitudes() const { return amp_; }

    cx amplitude(Coord c, Spin s) const { return amp_[geom_.basis_index(c, s)]; }
    cx& amplitude(Coord c, Spin s) { return amp_[geom_.basis_index(c, s)]; }

    double norm_sq() const;
    void normalize();

    cx inner(const SpinorState& other) const;  // <this|other>

    /// Norm lost through absorbing-guard boundaries so far.
    double leaked_norm() const { return leaked_; }
    void add_leak(double w) { leaked_ += w; }

  private:
    LatticeGeometry geom_;
    std::vector<cx> amp_;
    double leaked_ = 0.0;
};

/// Mixed walker state over the same basis. Dense storage; construction is
/// rejected above `max_dense_basis` (larger runs must use trajectories).
class DensityOperator {
  public:
    static constexpr std::int64_t max_dense_basis = 4096;

    explicit DensityOperator(LatticeGeometry g);
    static DensityOperator pure(const SpinorState& psi);
    static DensityOperator maximally_mixed(const LatticeGeometry& g);

    const LatticeGeometry& geometry() const { return geom_; }
    Eigen::MatrixXcd& matrix() { return rho_; }
    const Eigen::MatrixXcd& matrix() const { return rho_; }

    double trace_real() const { return rho_.trace().real(); }
    double hermiticity_error() const;  // max |rho - rho^dagger|
    /// Smallest eigenvalue; only evaluated for basis size <= 256.
    double min_eigenvalue() const;

    /// tr(|psi><psi| rho)
    double overlap(const SpinorState& psi) const;

  private:
    LatticeGeometry geom_;
    Eigen::MatrixXcd rho_;
};

/// P(x;n) = sum_s |<x,s|psi>|^2, or the diagonal sums of a density operator.
/// Rejects input whose total norm/trace deviates from 1 by more than 1e-6,
/// except on absorbing-guard geometries where sub-unit norm is expected.
std::vector<double> position_distribution(const SpinorState& state);
std::vector<double> position_distribution(const DensityOperator& state);

/// Distribution keyed by centered coordinates, convenient for small lattices.
std::map<int, double> position_distribution_1d(const SpinorState& state);

double region_probability(const SpinorState& state, const Region& region);
double region_probability(const DensityOperator& state, const Region& region);

/// |<reference|state>|^2; both states must share one geometry.
double overlap_probability(const SpinorState& state, const SpinorState& reference);

/// Columnar snapshot: header "# dim extent... n", then "x [y] s re im" per
/// basis element (s: 0 = up, 1 = down).
void write_state_snapshot(std::ostream& os, const SpinorState& state, int step);
SpinorState read_state_snapshot(std::istream& is);

/// Distribution CSV "x[,y],p".
void write_distribution_csv(std::ostream& os, const LatticeGeometry& g,
                            const std::vector<double>& p);

}  // namespace dtqw
