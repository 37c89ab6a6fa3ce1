#include "dtqw/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtqw/errors.hpp"

namespace dtqw {

namespace {

/// Translates one spin component by one site along `axis` (dir = +1 or -1),
/// walking each lattice line in place with a single saved edge element.
/// Returns the probability weight pushed off the lattice (absorbing guards).
double shift_spin_component(const LatticeGeometry& g, std::vector<cx>& a, int axis, Spin spin,
                            int dir) {
    const int dim = g.dimension();
    const std::int64_t length = g.extent(axis);
    std::int64_t site_stride = 1, n_lines = 1, line_stride = 0;
    if (dim == 2) {
        if (axis == 0) {
            site_stride = g.extent(1);  // x neighbours are Ny sites apart
            n_lines = g.extent(1);
            line_stride = 1;
        } else {
            site_stride = 1;
            n_lines = g.extent(0);
            line_stride = g.extent(1);
        }
    }
    const std::int64_t estride = 2 * site_stride;
    const bool absorbing = g.boundary(axis) == Boundary::absorbing_guard;
    const int spin_offset = static_cast<int>(spin);

    double leak = 0.0;
    for (std::int64_t ln = 0; ln < n_lines; ++ln) {
        cx* base = a.data() + 2 * ln * line_stride + spin_offset;
        if (dir > 0) {
            const cx edge = base[(length - 1) * estride];
            for (std::int64_t j = length - 1; j >= 1; --j)
                base[j * estride] = base[(j - 1) * estride];
            if (absorbing) {
                leak += std::norm(edge);
                base[0] = cx(0.0);
            } else {
                base[0] = edge;
            }
        } else {
            const cx edge = base[0];
            for (std::int64_t j = 0; j + 1 < length; ++j)
                base[j * estride] = base[(j + 1) * estride];
            if (absorbing) {
                leak += std::norm(edge);
                base[(length - 1) * estride] = cx(0.0);
            } else {
                base[(length - 1) * estride] = edge;
            }
        }
    }
    return leak;
}

/// In-place spin rotation about sigma_2 with per-site half-angle tables.
void rotate_spins(const std::vector<double>& c, const std::vector<double>& s,
                  std::vector<cx>& a) {
    const std::size_t n = c.size();
    cx* p = a.data();
    for (std::size_t i = 0; i < n; ++i) {
        const cx u = p[2 * i];
        const cx d = p[2 * i + 1];
        const double ci = c[i];
        const double si = s[i];
        p[2 * i] = ci * u - si * d;
        p[2 * i + 1] = si * u + ci * d;
    }
}

Eigen::Matrix2cd sigma_1() {
    Eigen::Matrix2cd m;
    m << cx(0, 0), cx(1, 0), cx(1, 0), cx(0, 0);
    return m;
}

Eigen::Matrix2cd sigma_3() {
    Eigen::Matrix2cd m;
    m << cx(1, 0), cx(0, 0), cx(0, 0), cx(-1, 0);
    return m;
}

}  // namespace

Primitive Primitive::coin(CoinSource src, double scale) {
    Primitive p;
    p.kind = Kind::coin;
    p.source = src;
    p.scale = scale;
    return p;
}

Primitive Primitive::fixed_coin(double angle) {
    Primitive p;
    p.kind = Kind::coin;
    p.source = CoinSource::fixed;
    p.fixed_angle = angle;
    return p;
}

Primitive Primitive::shift_up(int axis) {
    Primitive p;
    p.kind = Kind::shift_up;
    p.axis = axis;
    return p;
}

Primitive Primitive::shift_down(int axis) {
    Primitive p;
    p.kind = Kind::shift_down;
    p.axis = axis;
    return p;
}

WalkProtocol split_step_1d() {
    WalkProtocol w;
    w.name = "split_step_1d";
    w.dimension = 1;
    w.ops = {Primitive::coin(CoinSource::theta1), Primitive::shift_up(0),
             Primitive::coin(CoinSource::theta2), Primitive::shift_down(0)};
    return w;
}

WalkProtocol frame_prime() {
    WalkProtocol w;
    w.name = "frame_prime";
    w.dimension = 1;
    w.ops = {Primitive::coin(CoinSource::theta1, 0.5), Primitive::shift_up(0),
             Primitive::coin(CoinSource::theta2), Primitive::shift_down(0),
             Primitive::coin(CoinSource::theta1, 0.5)};
    w.chiral_spin_operator = sigma_1();
    return w;
}

WalkProtocol frame_double_prime() {
    WalkProtocol w;
    w.name = "frame_double_prime";
    w.dimension = 1;
    w.ops = {Primitive::coin(CoinSource::theta2, 0.5), Primitive::shift_down(0),
             Primitive::coin(CoinSource::theta1), Primitive::shift_up(0),
             Primitive::coin(CoinSource::theta2, 0.5)};
    w.chiral_spin_operator = sigma_1();
    return w;
}

WalkProtocol sigma_z_frame() {
    // Global spin rotation C(pi/2) applied around frame_prime moves the
    // symmetry operator onto the sigma_3 axis, so the protected states carry
    // definite spin along z.
    WalkProtocol inner = frame_prime();
    WalkProtocol w;
    w.name = "sigma_z_frame";
    w.dimension = 1;
    w.ops.push_back(Primitive::fixed_coin(-pi / 2));
    w.ops.insert(w.ops.end(), inner.ops.begin(), inner.ops.end());
    w.ops.push_back(Primitive::fixed_coin(pi / 2));
    w.chiral_spin_operator = sigma_3();
    return w;
}

WalkProtocol walk_2d() {
    WalkProtocol w;
    w.name = "walk_2d";
    w.dimension = 2;
    w.ops = {Primitive::coin(CoinSource::theta1), Primitive::shift_up(0),
             Primitive::shift_down(0),           Primitive::coin(CoinSource::theta2),
             Primitive::shift_up(1),             Primitive::shift_down(1)};
    return w;
}

WalkProtocol named_protocol(const std::string& name) {
    if (name == "split_step_1d") return split_step_1d();
    if (name == "frame_prime") return frame_prime();
    if (name == "frame_double_prime") return frame_double_prime();
    if (name == "sigma_z_frame") return sigma_z_frame();
    if (name == "walk_2d") return walk_2d();
    throw std::invalid_argument(
        "unknown protocol '" + name +
        "' (expected split_step_1d, frame_prime, frame_double_prime, sigma_z_frame, walk_2d)");
}

WalkProtocol frame_operator(ChiralFrame frame, int dimension) {
    if (dimension != 1)
        throw std::invalid_argument("chiral frames are defined for the 1D walk only");
    switch (frame) {
        case ChiralFrame::frame_prime: return frame_prime();
        case ChiralFrame::frame_double_prime: return frame_double_prime();
        case ChiralFrame::sigma_z: return sigma_z_frame();
    }
    throw std::invalid_argument("unhandled chiral frame");
}

CompiledStep::CompiledStep(const WalkProtocol& protocol, const CoinField& field)
    : geom_(field.geometry()), proto_(protocol) {
    if (geom_.dimension() != protocol.dimension)
        throw std::invalid_argument("protocol '" + protocol.name + "' is " +
                                    std::to_string(protocol.dimension) +
                                    "D but the coin field lives on a " +
                                    std::to_string(geom_.dimension()) + "D lattice");
    const std::int64_t n = geom_.n_sites();
    compiled_.reserve(protocol.ops.size());
    for (const Primitive& op : protocol.ops) {
        CompiledPrimitive cp;
        cp.kind = op.kind;
        cp.axis = op.axis;
        if (op.kind == Primitive::Kind::coin) {
            if (op.source != CoinSource::fixed && op.scale != 1.0 && op.scale != 0.5)
                throw std::invalid_argument("coin scale must be 1 or 1/2");
            cp.c.resize(n);
            cp.s.resize(n);
            for (std::int64_t i = 0; i < n; ++i) {
                double theta;
                switch (op.source) {
                    case CoinSource::theta1: theta = op.scale * field.theta1(i); break;
                    case CoinSource::theta2: theta = op.scale * field.theta2(i); break;
                    default: theta = op.fixed_angle; break;
                }
                cp.c[i] = std::cos(theta / 2.0);
                cp.s[i] = std::sin(theta / 2.0);
            }
        } else {
            if (op.axis < 0 || op.axis >= geom_.dimension())
                throw std::invalid_argument("shift axis out of range for this lattice");
        }
        compiled_.push_back(std::move(cp));
    }
}

double CompiledStep::apply(std::vector<cx>& amplitudes) const {
    double leak = 0.0;
    for (std::size_t i = 0; i < compiled_.size(); ++i) leak += apply_primitive(i, amplitudes);
    return leak;
}

double CompiledStep::apply_primitive(std::size_t i, std::vector<cx>& amplitudes) const {
    if (amplitudes.size() != static_cast<std::size_t>(geom_.basis_size()))
        throw std::invalid_argument("amplitude vector does not match the lattice basis");
    const CompiledPrimitive& p = compiled_.at(i);
    switch (p.kind) {
        case Primitive::Kind::coin:
            rotate_spins(p.c, p.s, amplitudes);
            return 0.0;
        case Primitive::Kind::shift_up:
            return shift_spin_component(geom_, amplitudes, p.axis, Spin::up, +1);
        case Primitive::Kind::shift_down:
            return shift_spin_component(geom_, amplitudes, p.axis, Spin::down, -1);
    }
    return 0.0;
}

double CompiledStep::apply_shift(const CompiledPrimitive& p, std::vector<cx>& a) const {
    const bool up = p.kind == Primitive::Kind::shift_up;
    return shift_spin_component(geom_, a, p.axis, up ? Spin::up : Spin::down, up ? +1 : -1);
}

void apply_coin(SpinorState& state, const CoinField& field, CoinSource which, double scale) {
    if (state.geometry() != field.geometry())
        throw std::invalid_argument("state and coin field live on different lattices");
    if (which == CoinSource::fixed)
        throw std::invalid_argument("fixed-angle coins take no field; use apply_fixed_coin");
    const std::int64_t n = state.geometry().n_sites();
    std::vector<double> c(n), s(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double theta =
            scale * (which == CoinSource::theta1 ? field.theta1(i) : field.theta2(i));
        c[i] = std::cos(theta / 2.0);
        s[i] = std::sin(theta / 2.0);
    }
    rotate_spins(c, s, state.amplitudes());
}

void apply_fixed_coin(SpinorState& state, double angle) {
    const std::int64_t n = state.geometry().n_sites();
    std::vector<double> c(n, std::cos(angle / 2.0)), s(n, std::sin(angle / 2.0));
    rotate_spins(c, s, state.amplitudes());
}

void apply_shift(SpinorState& state, int axis, Spin spin) {
    const LatticeGeometry& g = state.geometry();
    if (axis < 0 || axis >= g.dimension())
        throw std::invalid_argument("shift axis out of range for this lattice");
    const int dir = spin == Spin::up ? +1 : -1;
    const double leak = shift_spin_component(g, state.amplitudes(), axis, spin, dir);
    if (leak > 0.0) state.add_leak(leak);
}

void step(SpinorState& state, const CompiledStep& compiled) {
    if (state.geometry() != compiled.geometry())
        throw std::invalid_argument("state and compiled step live on different lattices");
    const bool absorbing = state.geometry().any_absorbing();
    double before = 0.0;
    if (!absorbing) before = state.norm_sq();
    const double leak = compiled.apply(state.amplitudes());
    if (absorbing) {
        state.add_leak(leak);
    } else {
        const double after = state.norm_sq();
        if (std::abs(after - before) > 1e-12 * std::max(1.0, before))
            throw InvariantViolation("walk step failed to conserve norm: |" +
                                     std::to_string(after) + " - " + std::to_string(before) +
                                     "| > 1e-12");
    }
}

void step(SpinorState& state, const WalkProtocol& protocol, const CoinField& field) {
    step(state, CompiledStep(protocol, field));
}

Eigen::MatrixXcd dense_step_operator(const WalkProtocol& protocol, const CoinField& field) {
    const LatticeGeometry& g = field.geometry();
    const std::int64_t n = g.basis_size();
    if (n > DensityOperator::max_dense_basis)
        throw std::invalid_argument("lattice too large for a dense step operator (basis " +
                                    std::to_string(n) + " > " +
                                    std::to_string(DensityOperator::max_dense_basis) + ")");
    CompiledStep compiled(protocol, field);
    Eigen::MatrixXcd w(n, n);
    std::vector<cx> col(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), cx(0.0));
        col[static_cast<std::size_t>(j)] = cx(1.0);
        compiled.apply(col);
        for (std::int64_t i = 0; i < n; ++i) w(i, j) = col[static_cast<std::size_t>(i)];
    }
    return w;
}

Eigen::MatrixXcd dense_chiral_operator(const WalkProtocol& protocol, const LatticeGeometry& g) {
    if (!protocol.chiral_spin_operator)
        throw std::invalid_argument("protocol '" + protocol.name +
                                    "' declares no chiral symmetry operator");
    const Eigen::Matrix2cd& gamma = *protocol.chiral_spin_operator;
    const std::int64_t n = g.basis_size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (std::int64_t site = 0; site < g.n_sites(); ++site)
        out.block<2, 2>(2 * site, 2 * site) = gamma;
    return out;
}

}  // namespace dtqw
