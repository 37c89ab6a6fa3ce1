#pragma once

#include <cmath>
#include <iosfwd>
#include <utility>
#include <vector>

#include "dtqw/geometry.hpp"

namespace dtqw {

inline constexpr double pi = 3.14159265358979323846;

/// Coin angles are physically 4*pi-periodic; wrap into (-2*pi, 2*pi] for
/// comparisons. Interpolated profiles are kept unwrapped.
double wrap_angle_4pi(double theta);

/// Wrap a phase into (-pi, pi].
inline double wrap_to_pi(double x) {
    double y = std::fmod(x + pi, 2.0 * pi);
    if (y <= 0.0) y += 2.0 * pi;
    return y - pi;
}

/// Diffraction parameters of the coin-addressing optics. Lengths share one
/// unit (nm in the presets); only ratios enter the walk.
struct OpticsConfig {
    double numerical_aperture;  // 0 < NA <= 1
    double wavelength_c;        // coin (Raman) laser wavelength
    double lattice_constant;    // site spacing a

    double abbe_radius() const { return wavelength_c / (2.0 * numerical_aperture); }
    /// Gaussian PSF standard deviation, (sqrt(2)/pi) * R_A.
    double psf_sigma() const { return std::sqrt(2.0) / pi * abbe_radius(); }
    void validate() const;

    /// Current 1D apparatus: NA = 0.22, lambda_C = 894 nm, a = 866/2 nm.
    static OpticsConfig setup_1d();
    /// Planned 2D apparatus: NA = 0.92, lambda_C = 894 nm, a = sqrt(2)*866/2 nm.
    static OpticsConfig setup_2d();
    /// Abbe radius ratio_a_over_ra^-1 in units of a; for sweeps over a/R_A.
    static OpticsConfig from_ratio(double a_over_ra);
};

/// R_A / a.
double abbe_ratio(const OpticsConfig& optics);

/// Diffraction-limited crossover of a unit step from theta_l (x<=0) to
/// theta_r (x>0):  theta(x) = theta_l + (theta_r-theta_l)/2 * [1 + erf(a*pi*x / (2*R_A))].
double erf_crossover(double theta_l, double theta_r, const OpticsConfig& optics, double x);

/// Per-site coin-angle pair (theta1, theta2); immutable after construction.
class CoinField {
  public:
    CoinField(LatticeGeometry g, std::vector<double> theta1, std::vector<double> theta2);
    static CoinField homogeneous(const LatticeGeometry& g, double theta1, double theta2);

    const LatticeGeometry& geometry() const { return geom_; }
    double theta1(std::int64_t site) const { return theta1_[site]; }
    double theta2(std::int64_t site) const { return theta2_[site]; }
    const std::vector<double>& theta1() const { return theta1_; }
    const std::vector<double>& theta2() const { return theta2_; }

  private:
    LatticeGeometry geom_;
    std::vector<double> theta1_, theta2_;
};

/// CSV "x[,y],theta1,theta2".
void write_coin_field_csv(std::ostream& os, const CoinField& field);

/// 1D field with an erf wall at x = 0 for each angle component. On a periodic
/// lattice the wrap seam acts as the mandatory second (sharp) domain wall.
CoinField wall_field_1d(const LatticeGeometry& g, std::pair<double, double> left_angles,
                        std::pair<double, double> right_angles, const OpticsConfig& optics);

/// Droplet-shaped island: a disc with an isoceles triangle attached on top,
/// the apex forming the deliberate sharp corner of the contour.
struct DropletShape {
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 12.0;
    double half_width = 6.0;  // triangle base half-width
    double apex_y = 18.0;     // triangle apex above the center

    bool inside(double x, double y) const;
    void validate() const;
    /// Closed contour as a polyline (counterclockwise), for arc-length maps.
    std::vector<std::pair<double, double>> contour_polyline(int arc_samples = 2048) const;
    double contour_length() const;
};

/// Binary inside/outside indicator convolved with the Gaussian PSF, sampled
/// at lattice sites; values in [0, 1]. Supersampled 8x before convolution.
std::vector<double> smoothed_indicator(const LatticeGeometry& g, const DropletShape& shape,
                                       const OpticsConfig& optics);

/// 2D coin field interpolating linearly between outside and inside angle
/// pairs along the straight segment in (theta1, theta2) space:
/// theta_i = outside_i + s * (inside_i - outside_i).
CoinField island_field(const LatticeGeometry& g, const DropletShape& shape,
                       std::pair<double, double> inside_angles,
                       std::pair<double, double> outside_angles, const OpticsConfig& optics);

/// Strip on the y-torus: inside angles over |y - center| < half_height with
/// erf walls, homogeneous in x. Used for the strip-geometry edge spectrum.
std::vector<std::pair<double, double>> strip_profile(int ny_extent, double half_height,
                                                     std::pair<double, double> inside_angles,
                                                     std::pair<double, double> outside_angles,
                                                     const OpticsConfig& optics);

}  // namespace dtqw
