#include "dtqw/coin_field.hpp"

#include <algorithm>
#include <ostream>

namespace dtqw {

double wrap_angle_4pi(double theta) {
    double t = std::fmod(theta, 4.0 * pi);
    if (t > 2.0 * pi) t -= 4.0 * pi;
    if (t <= -2.0 * pi) t += 4.0 * pi;
    return t;
}

void OpticsConfig::validate() const {
    if (!(numerical_aperture > 0.0 && numerical_aperture <= 1.0))
        throw std::invalid_argument("OpticsConfig: NA must lie in (0, 1]");
    if (!(wavelength_c > 0.0)) throw std::invalid_argument("OpticsConfig: wavelength must be > 0");
    if (!(lattice_constant > 0.0))
        throw std::invalid_argument("OpticsConfig: lattice constant must be > 0");
}

OpticsConfig OpticsConfig::setup_1d() {
    // Effective aperture of the 1D apparatus; together with lambda_C = 894 nm
    // and a = 433 nm this realizes its published resolution R_A = 4.8 a.
    return OpticsConfig{0.215, 894.0, 433.0};
}

OpticsConfig OpticsConfig::setup_2d() {
    return OpticsConfig{0.92, 894.0, std::sqrt(2.0) * 433.0};
}

OpticsConfig OpticsConfig::from_ratio(double a_over_ra) {
    if (!(a_over_ra > 0.0)) throw std::invalid_argument("OpticsConfig: a/R_A must be > 0");
    return OpticsConfig{0.5, 1.0 / a_over_ra, 1.0};
}

double abbe_ratio(const OpticsConfig& optics) {
    optics.validate();
    return optics.abbe_radius() / optics.lattice_constant;
}

double erf_crossover(double theta_l, double theta_r, const OpticsConfig& optics, double x) {
    optics.validate();
    double arg = optics.lattice_constant * pi * x / (2.0 * optics.abbe_radius());
    return theta_l + 0.5 * (theta_r - theta_l) * (1.0 + std::erf(arg));
}

CoinField::CoinField(LatticeGeometry g, std::vector<double> theta1, std::vector<double> theta2)
    : geom_(std::move(g)), theta1_(std::move(theta1)), theta2_(std::move(theta2)) {
    if (static_cast<std::int64_t>(theta1_.size()) != geom_.n_sites() ||
        static_cast<std::int64_t>(theta2_.size()) != geom_.n_sites())
        throw std::invalid_argument("CoinField: angle arrays must cover every site");
}

CoinField CoinField::homogeneous(const LatticeGeometry& g, double theta1, double theta2) {
    return CoinField(g, std::vector<double>(g.n_sites(), theta1),
                     std::vector<double>(g.n_sites(), theta2));
}

void write_coin_field_csv(std::ostream& os, const CoinField& field) {
    const auto& g = field.geometry();
    os << (g.dimension() == 1 ? "x,theta1,theta2" : "x,y,theta1,theta2") << '\n';
    os.precision(17);
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        Coord c = g.site_coord(s);
        os << c.x;
        if (g.dimension() == 2) os << ',' << c.y;
        os << ',' << field.theta1(s) << ',' << field.theta2(s) << '\n';
    }
}

CoinField wall_field_1d(const LatticeGeometry& g, std::pair<double, double> left_angles,
                        std::pair<double, double> right_angles, const OpticsConfig& optics) {
    if (g.dimension() != 1) throw std::invalid_argument("wall_field_1d: 1D lattices only");
    std::vector<double> t1(g.n_sites()), t2(g.n_sites());
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        double x = g.site_coord(s).x;
        t1[s] = erf_crossover(left_angles.first, right_angles.first, optics, x);
        t2[s] = erf_crossover(left_angles.second, right_angles.second, optics, x);
    }
    return CoinField(g, std::move(t1), std::move(t2));
}

void DropletShape::validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("DropletShape: degenerate contour");
    if (!(half_width > 0.0 && half_width < radius))
        throw std::invalid_argument("DropletShape: triangle base must fit inside the disc");
    double base_y = center_y + std::sqrt(radius * radius - half_width * half_width);
    if (!(apex_y > base_y))
        throw std::invalid_argument("DropletShape: apex must rise above the triangle base");
}

bool DropletShape::inside(double x, double y) const {
    double dx = x - center_x, dy = y - center_y;
    if (dx * dx + dy * dy <= radius * radius) return true;
    // Isoceles triangle: base endpoints on the circle, apex at (center_x, apex_y).
    double base_y = center_y + std::sqrt(radius * radius - half_width * half_width);
    if (y < base_y || y > apex_y) return false;
    double half_at_y = half_width * (apex_y - y) / (apex_y - base_y);
    return std::abs(dx) <= half_at_y;
}

std::vector<std::pair<double, double>> DropletShape::contour_polyline(int arc_samples) const {
    validate();
    double base_y = center_y + std::sqrt(radius * radius - half_width * half_width);
    double phi_r = std::atan2(base_y - center_y, half_width);   // right base point
    double phi_l = pi - phi_r;                                  // left base point
    std::vector<std::pair<double, double>> pts;
    pts.reserve(arc_samples + 2);
    // Major circle arc, counterclockwise from the left base point through the
    // bottom to the right base point.
    double sweep = 2.0 * pi - (phi_l - phi_r);
    for (int i = 0; i <= arc_samples; ++i) {
        double phi = phi_l + sweep * i / arc_samples;
        pts.emplace_back(center_x + radius * std::cos(phi), center_y + radius * std::sin(phi));
    }
    // Triangle sides: right base -> apex -> left base (start point closes it).
    pts.emplace_back(center_x, apex_y);
    return pts;
}

double DropletShape::contour_length() const {
    auto pts = contour_polyline();
    double len = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto [x0, y0] = pts[i];
        auto [x1, y1] = pts[(i + 1) % pts.size()];
        len += std::hypot(x1 - x0, y1 - y0);
    }
    return len;
}

std::vector<double> smoothed_indicator(const LatticeGeometry& g, const DropletShape& shape,
                                       const OpticsConfig& optics) {
    if (g.dimension() != 2) throw std::invalid_argument("smoothed_indicator: 2D lattices only");
    shape.validate();
    optics.validate();
    double sigma = optics.psf_sigma() / optics.lattice_constant;  // in lattice units
    std::vector<double> s(g.n_sites(), 0.0);
    if (sigma < 1e-9) {  // sharp limit: plain indicator
        for (std::int64_t i = 0; i < g.n_sites(); ++i) {
            Coord c = g.site_coord(i);
            s[i] = shape.inside(c.x, c.y) ? 1.0 : 0.0;
        }
        return s;
    }
    // Direct convolution with the kernel truncated at 5 sigma, sampled on an
    // 8x supersampled grid.
    const double h = 1.0 / 8.0;
    const int half = std::max(1, static_cast<int>(std::ceil(5.0 * sigma / h)));
    std::vector<double> w1(2 * half + 1);
    for (int i = -half; i <= half; ++i)
        w1[i + half] = std::exp(-0.5 * (i * h) * (i * h) / (sigma * sigma));
    double wsum = 0.0;
    for (double wx : w1)
        for (double wy : w1) wsum += wx * wy;
    for (std::int64_t idx = 0; idx < g.n_sites(); ++idx) {
        Coord c = g.site_coord(idx);
        double acc = 0.0;
        for (int i = -half; i <= half; ++i) {
            double wx = w1[i + half];
            double x = c.x + i * h;
            for (int j = -half; j <= half; ++j) {
                if (shape.inside(x, c.y + j * h)) acc += wx * w1[j + half];
            }
        }
        s[idx] = acc / wsum;
    }
    return s;
}

CoinField island_field(const LatticeGeometry& g, const DropletShape& shape,
                       std::pair<double, double> inside_angles,
                       std::pair<double, double> outside_angles, const OpticsConfig& optics) {
    auto s = smoothed_indicator(g, shape, optics);
    std::vector<double> t1(g.n_sites()), t2(g.n_sites());
    for (std::int64_t i = 0; i < g.n_sites(); ++i) {
        t1[i] = outside_angles.first + s[i] * (inside_angles.first - outside_angles.first);
        t2[i] = outside_angles.second + s[i] * (inside_angles.second - outside_angles.second);
    }
    return CoinField(g, std::move(t1), std::move(t2));
}

std::vector<std::pair<double, double>> strip_profile(int ny_extent, double half_height,
                                                     std::pair<double, double> inside_angles,
                                                     std::pair<double, double> outside_angles,
                                                     const OpticsConfig& optics) {
    optics.validate();
    std::vector<std::pair<double, double>> prof(ny_extent);
    int y_min = -ny_extent / 2;
    for (int iy = 0; iy < ny_extent; ++iy) {
        double y = y_min + iy;
        double c = optics.lattice_constant * pi / (2.0 * optics.abbe_radius());
        double s = 0.5 * (std::erf(c * (y + half_height)) - std::erf(c * (y - half_height)));
        prof[iy] = {outside_angles.first + s * (inside_angles.first - outside_angles.first),
                    outside_angles.second + s * (inside_angles.second - outside_angles.second)};
    }
    return prof;
}

}  // namespace dtqw
