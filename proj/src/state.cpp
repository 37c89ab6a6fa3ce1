#include "dtqw/state.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dtqw {

namespace {

void check_normalized(double total, const LatticeGeometry& g, const char* who) {
    if (!g.any_absorbing() && std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(who) + ": state is not normalized");
}

}  // namespace

SpinorState::SpinorState(LatticeGeometry g)
    : geom_(std::move(g)), amp_(geom_.basis_size(), cx(0.0, 0.0)) {}

SpinorState SpinorState::basis_state(const LatticeGeometry& g, Coord c, Spin s) {
    SpinorState psi(g);
    psi.amp_[g.basis_index(c, s)] = cx(1.0, 0.0);
    return psi;
}

double SpinorState::norm_sq() const {
    double t = 0.0;
    for (const cx& a : amp_) t += std::norm(a);
    return t;
}

void SpinorState::normalize() {
    double n = std::sqrt(norm_sq());
    if (n == 0.0) throw std::invalid_argument("SpinorState::normalize: zero state");
    for (cx& a : amp_) a /= n;
}

cx SpinorState::inner(const SpinorState& other) const {
    if (geom_ != other.geom_)
        throw std::invalid_argument("SpinorState::inner: geometry mismatch");
    cx acc(0.0, 0.0);
    for (std::size_t i = 0; i < amp_.size(); ++i) acc += std::conj(amp_[i]) * other.amp_[i];
    return acc;
}

DensityOperator::DensityOperator(LatticeGeometry g) : geom_(std::move(g)) {
    if (geom_.basis_size() > max_dense_basis)
        throw std::invalid_argument(
            "DensityOperator: basis size exceeds the dense cap; use trajectory unraveling");
    rho_ = Eigen::MatrixXcd::Zero(geom_.basis_size(), geom_.basis_size());
}

DensityOperator DensityOperator::pure(const SpinorState& psi) {
    DensityOperator rho(psi.geometry());
    Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), psi.geometry().basis_size());
    rho.rho_ = v * v.adjoint();
    return rho;
}

DensityOperator DensityOperator::maximally_mixed(const LatticeGeometry& g) {
    DensityOperator rho(g);
    double d = static_cast<double>(g.basis_size());
    rho.rho_ = Eigen::MatrixXcd::Identity(g.basis_size(), g.basis_size()) / d;
    return rho;
}

double DensityOperator::hermiticity_error() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
    if (geom_.basis_size() > 256)
        throw std::invalid_argument("min_eigenvalue: only checked for basis size <= 256");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho_ + rho_.adjoint()));
    return es.eigenvalues().minCoeff();
}

double DensityOperator::overlap(const SpinorState& psi) const {
    if (geom_ != psi.geometry())
        throw std::invalid_argument("DensityOperator::overlap: geometry mismatch");
    Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), geom_.basis_size());
    return (v.adjoint() * rho_ * v)(0, 0).real();
}

std::vector<double> position_distribution(const SpinorState& state) {
    const auto& g = state.geometry();
    std::vector<double> p(g.n_sites(), 0.0);
    double total = 0.0;
    const auto& a = state.amplitudes();
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        p[s] = std::norm(a[2 * s]) + std::norm(a[2 * s + 1]);
        total += p[s];
    }
    check_normalized(total, g, "position_distribution");
    return p;
}

std::vector<double> position_distribution(const DensityOperator& state) {
    const auto& g = state.geometry();
    std::vector<double> p(g.n_sites(), 0.0);
    double total = 0.0;
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        p[s] = state.matrix()(2 * s, 2 * s).real() + state.matrix()(2 * s + 1, 2 * s + 1).real();
        total += p[s];
    }
    check_normalized(total, g, "position_distribution");
    return p;
}

std::map<int, double> position_distribution_1d(const SpinorState& state) {
    const auto& g = state.geometry();
    if (g.dimension() != 1)
        throw std::invalid_argument("position_distribution_1d: 1D lattices only");
    auto p = position_distribution(state);
    std::map<int, double> out;
    for (std::int64_t s = 0; s < g.n_sites(); ++s) out[g.site_coord(s).x] = p[s];
    return out;
}

// Direct sums over the region sites (no normalization gate): these run in
// per-step observer loops where the full distribution would cost O(lattice).
double region_probability(const SpinorState& state, const Region& region) {
    const auto& a = state.amplitudes();
    double acc = 0.0;
    for (std::int64_t idx : region.site_indices())
        acc += std::norm(a[2 * idx]) + std::norm(a[2 * idx + 1]);
    return acc;
}

double region_probability(const DensityOperator& state, const Region& region) {
    const auto& m = state.matrix();
    double acc = 0.0;
    for (std::int64_t idx : region.site_indices())
        acc += m(2 * idx, 2 * idx).real() + m(2 * idx + 1, 2 * idx + 1).real();
    return acc;
}

double overlap_probability(const SpinorState& state, const SpinorState& reference) {
    if (state.geometry() != reference.geometry())
        throw std::invalid_argument("overlap_probability: geometry mismatch");
    check_normalized(state.norm_sq(), state.geometry(), "overlap_probability");
    check_normalized(reference.norm_sq(), reference.geometry(), "overlap_probability");
    return std::norm(reference.inner(state));
}

void write_state_snapshot(std::ostream& os, const SpinorState& state, int step) {
    const auto& g = state.geometry();
    os << "# " << g.dimension();
    for (int d = 0; d < g.dimension(); ++d) os << ' ' << g.extent(d);
    os << ' ' << step << '\n';
    os.precision(17);
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        Coord c = g.site_coord(s);
        for (int sp = 0; sp < 2; ++sp) {
            const cx& a = state.amplitudes()[2 * s + sp];
            os << c.x;
            if (g.dimension() == 2) os << ' ' << c.y;
            os << ' ' << sp << ' ' << a.real() << ' ' << a.imag() << '\n';
        }
    }
}

SpinorState read_state_snapshot(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.empty() || line[0] != '#')
        throw std::runtime_error("state snapshot: missing header");
    std::istringstream hdr(line.substr(1));
    int dim = 0;
    hdr >> dim;
    std::vector<int> extent(dim);
    for (int d = 0; d < dim; ++d) hdr >> extent[d];
    int step = 0;
    hdr >> step;
    (void)step;
    LatticeGeometry g(dim, extent);
    SpinorState psi(g);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        Coord c{};
        int sp = 0;
        double re = 0.0, im = 0.0;
        row >> c.x;
        if (dim == 2) row >> c.y;
        row >> sp >> re >> im;
        psi.amplitude(c, static_cast<Spin>(sp)) = cx(re, im);
    }
    return psi;
}

void write_distribution_csv(std::ostream& os, const LatticeGeometry& g,
                            const std::vector<double>& p) {
    os << (g.dimension() == 1 ? "x,p" : "x,y,p") << '\n';
    os.precision(17);
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        Coord c = g.site_coord(s);
        os << c.x;
        if (g.dimension() == 2) os << ',' << c.y;
        os << ',' << p[s] << '\n';
    }
}

}  // namespace dtqw
