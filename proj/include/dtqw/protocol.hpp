#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtqw/coin_field.hpp"
#include "dtqw/state.hpp"

namespace dtqw {

/// Chiral time frames of the 1D split-step walk, plus the sigma_z-transformed
/// variant whose symmetry operator is sigma_3 instead of sigma_1.
enum class ChiralFrame { frame_prime, frame_double_prime, sigma_z };

enum class CoinSource { theta1, theta2, fixed };

/// One primitive of a walk step. Coins rotate the spin about sigma_2 by
/// scale * theta(x) (exact rational scale, 1 or 1/2) or by a fixed angle;
/// shifts translate one spin component by one site along an axis.
struct Primitive {
    enum class Kind { coin, shift_up, shift_down };
    Kind kind;
    CoinSource source = CoinSource::theta1;  // coin only
    double scale = 1.0;                      // coin only; 1 or 1/2
    double fixed_angle = 0.0;                // coin with source == fixed
    int axis = 0;                            // shifts only

    static Primitive coin(CoinSource src, double scale = 1.0);
    static Primitive fixed_coin(double angle);
    static Primitive shift_up(int axis);
    static Primitive shift_down(int axis);
};

/// Ordered primitive list making up one Floquet period; ops[0] acts first.
struct WalkProtocol {
    std::string name;
    int dimension = 1;
    std::vector<Primitive> ops;
    /// Spin-space symmetry operator Gamma with Gamma W Gamma^dag = W^dag,
    /// when the frame is chiral-symmetric on homogeneous fields.
    std::optional<Eigen::Matrix2cd> chiral_spin_operator;
};

/// W_1D = S_x^down C(theta2) S_x^up C(theta1)
WalkProtocol split_step_1d();
/// W' = C(theta1/2) S_x^down C(theta2) S_x^up C(theta1/2), Gamma = sigma_1
WalkProtocol frame_prime();
/// W'' = C(theta2/2) S_x^up C(theta1) S_x^down C(theta2/2), Gamma = sigma_1
WalkProtocol frame_double_prime();
/// W~ = C(pi/2) W' C(-pi/2), Gamma = sigma_3
WalkProtocol sigma_z_frame();
/// W_2D = S_y^down S_y^up C(theta2) S_x^down S_x^up C(theta1)
WalkProtocol walk_2d();

WalkProtocol named_protocol(const std::string& name);

/// Chiral-frame protocols (1D only; throws for 2D requests).
WalkProtocol frame_operator(ChiralFrame frame, int dimension = 1);

/// Per-site coin tables resolved against a field, so stepping performs no
/// trigonometry. Immutable and shareable across threads.
class CompiledStep {
  public:
    CompiledStep(const WalkProtocol& protocol, const CoinField& field);

    const LatticeGeometry& geometry() const { return geom_; }
    const WalkProtocol& protocol() const { return proto_; }

    /// Applies one full step in place. Returns norm leaked through absorbing
    /// guards during this step (0 on periodic lattices).
    double apply(std::vector<cx>& amplitudes) const;
    /// Applies primitive `i` only (for per-primitive decoherence placement).
    double apply_primitive(std::size_t i, std::vector<cx>& amplitudes) const;
    std::size_t primitive_count() const { return compiled_.size(); }

  private:
    struct CompiledPrimitive {
        Primitive::Kind kind;
        int axis = 0;
        std::vector<double> c, s;  // cos/sin of theta_eff/2 per site (coins)
    };
    LatticeGeometry geom_;
    WalkProtocol proto_;
    std::vector<CompiledPrimitive> compiled_;

    double apply_shift(const CompiledPrimitive& p, std::vector<cx>& a) const;
};

/// Convenience single operations (validate inputs, used by tests and bindings).
void apply_coin(SpinorState& state, const CoinField& field, CoinSource which, double scale = 1.0);
void apply_fixed_coin(SpinorState& state, double angle);
void apply_shift(SpinorState& state, int axis, Spin spin);

/// One full protocol application; tracks leaked norm on absorbing guards and
/// verifies norm conservation (1e-12) on periodic lattices.
void step(SpinorState& state, const CompiledStep& compiled);
void step(SpinorState& state, const WalkProtocol& protocol, const CoinField& field);

/// Dense one-step operator on the full basis (small lattices only).
Eigen::MatrixXcd dense_step_operator(const WalkProtocol& protocol, const CoinField& field);

/// Dense Gamma on the full basis (identity on position, spin part per frame).
Eigen::MatrixXcd dense_chiral_operator(const WalkProtocol& protocol, const LatticeGeometry& g);

}  // namespace dtqw
