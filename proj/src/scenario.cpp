#include "dtqw/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "dtqw/bloch.hpp"
#include "dtqw/coin_field.hpp"
#include "dtqw/decoherence.hpp"
#include "dtqw/edge.hpp"
#include "dtqw/errors.hpp"
#include "dtqw/io.hpp"
#include "dtqw/protocol.hpp"
#include "dtqw/state.hpp"

namespace dtqw {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + path + ": " + msg);
}

void check_object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    check_object(obj, path);
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known) fail(path, "unknown key '" + item.key() + "'");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path, int lo,
           int hi = std::numeric_limits<int>::max()) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto n = v.get<std::int64_t>();
    if (n < lo || n > hi)
        fail(path, "value " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
    return static_cast<int>(n);
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

/// Angles appear as numbers (radians) or rational-pi strings ("3pi/4").
double as_angle(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return parse_angle(v.get<std::string>());
        } catch (const ConfigError& e) {
            fail(path, e.what());
        }
    }
    fail(path, "expected an angle (number or \"a pi/b\" string)");
}

std::pair<double, double> as_angle_pair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected a [theta1, theta2] pair");
    return {as_angle(v[0], path + "[0]"), as_angle(v[1], path + "[1]")};
}

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Block parsers

LatticeGeometry parse_geometry(const json& v, const std::string& path) {
    check_keys(v, path, {"extent", "boundary"});
    const json& ext = require(v, path, "extent");
    if (!ext.is_array() || ext.empty() || ext.size() > 2)
        fail(path + ".extent", "expected an array of 1 or 2 site counts");
    std::vector<int> extent;
    for (std::size_t i = 0; i < ext.size(); ++i)
        extent.push_back(as_int(ext[i], path + ".extent[" + std::to_string(i) + "]", 2));
    Boundary b = Boundary::periodic;
    if (v.contains("boundary")) {
        const std::string s = as_string(v["boundary"], path + ".boundary");
        if (s == "periodic")
            b = Boundary::periodic;
        else if (s == "absorbing")
            b = Boundary::absorbing_guard;
        else
            fail(path + ".boundary", "expected \"periodic\" or \"absorbing\"");
    }
    try {
        return LatticeGeometry(static_cast<int>(extent.size()), extent,
                               std::vector<Boundary>(extent.size(), b));
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

OpticsConfig parse_optics(const json& v, const std::string& path) {
    check_keys(v, path,
               {"preset", "a_over_ra", "numerical_aperture", "wavelength_c", "lattice_constant"});
    OpticsConfig optics{};
    if (v.contains("preset")) {
        if (v.size() != 1) fail(path, "'preset' excludes other optics keys");
        const std::string s = as_string(v["preset"], path + ".preset");
        if (s == "setup_1d")
            optics = OpticsConfig::setup_1d();
        else if (s == "setup_2d")
            optics = OpticsConfig::setup_2d();
        else
            fail(path + ".preset", "expected \"setup_1d\" or \"setup_2d\"");
    } else if (v.contains("a_over_ra")) {
        if (v.size() != 1) fail(path, "'a_over_ra' excludes other optics keys");
        optics = OpticsConfig::from_ratio(as_number(v["a_over_ra"], path + ".a_over_ra"));
    } else {
        optics.numerical_aperture =
            as_number(require(v, path, "numerical_aperture"), path + ".numerical_aperture");
        optics.wavelength_c =
            as_number(require(v, path, "wavelength_c"), path + ".wavelength_c");
        optics.lattice_constant =
            as_number(require(v, path, "lattice_constant"), path + ".lattice_constant");
    }
    try {
        optics.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return optics;
}

DropletShape parse_shape(const json& v, const std::string& path, DropletShape shape = {}) {
    check_keys(v, path, {"center", "radius", "half_width", "apex_y"});
    if (v.contains("center")) {
        const json& c = v["center"];
        if (!c.is_array() || c.size() != 2) fail(path + ".center", "expected [x, y]");
        shape.center_x = as_number(c[0], path + ".center[0]");
        shape.center_y = as_number(c[1], path + ".center[1]");
    }
    if (v.contains("radius")) shape.radius = as_number(v["radius"], path + ".radius");
    if (v.contains("half_width"))
        shape.half_width = as_number(v["half_width"], path + ".half_width");
    if (v.contains("apex_y")) shape.apex_y = as_number(v["apex_y"], path + ".apex_y");
    try {
        shape.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return shape;
}

struct FieldPlan {
    enum class Type { homogeneous, wall_1d, island } type = Type::homogeneous;
    double theta1 = 0.0, theta2 = 0.0;
    std::pair<double, double> left{0.0, 0.0}, right{0.0, 0.0};
    DropletShape shape{};
    std::pair<double, double> inside{0.0, 0.0}, outside{0.0, 0.0};
    OpticsConfig optics = OpticsConfig::setup_2d();
};

FieldPlan parse_field(const json& v, const std::string& path, int dimension) {
    check_object(v, path);
    const std::string type = as_string(require(v, path, "type"), path + ".type");
    FieldPlan f;
    if (type == "homogeneous") {
        check_keys(v, path, {"type", "theta1", "theta2"});
        f.type = FieldPlan::Type::homogeneous;
        f.theta1 = as_angle(require(v, path, "theta1"), path + ".theta1");
        f.theta2 = as_angle(require(v, path, "theta2"), path + ".theta2");
    } else if (type == "wall_1d") {
        if (dimension != 1) fail(path, "field type 'wall_1d' requires a 1D lattice");
        check_keys(v, path, {"type", "left", "right", "optics"});
        f.type = FieldPlan::Type::wall_1d;
        f.left = as_angle_pair(require(v, path, "left"), path + ".left");
        f.right = as_angle_pair(require(v, path, "right"), path + ".right");
        if (v.contains("optics")) f.optics = parse_optics(v["optics"], path + ".optics");
    } else if (type == "island") {
        if (dimension != 2) fail(path, "field type 'island' requires a 2D lattice");
        check_keys(v, path, {"type", "shape", "inside", "outside", "optics"});
        f.type = FieldPlan::Type::island;
        if (v.contains("shape")) f.shape = parse_shape(v["shape"], path + ".shape");
        f.inside = as_angle_pair(require(v, path, "inside"), path + ".inside");
        f.outside = as_angle_pair(require(v, path, "outside"), path + ".outside");
        if (v.contains("optics")) f.optics = parse_optics(v["optics"], path + ".optics");
    } else {
        fail(path + ".type", "expected \"homogeneous\", \"wall_1d\", or \"island\"");
    }
    return f;
}

CoinField build_field(const FieldPlan& f, const LatticeGeometry& g) {
    switch (f.type) {
        case FieldPlan::Type::homogeneous:
            return CoinField::homogeneous(g, f.theta1, f.theta2);
        case FieldPlan::Type::wall_1d:
            return wall_field_1d(g, f.left, f.right, f.optics);
        case FieldPlan::Type::island:
            return island_field(g, f.shape, f.inside, f.outside, f.optics);
    }
    throw std::logic_error("unreachable field type");
}

Coord parse_site(const json& v, const std::string& path, const LatticeGeometry& g) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(g.dimension()))
        fail(path, "expected " + std::to_string(g.dimension()) + " coordinate(s)");
    Coord c{};
    c.x = as_int(v[0], path + "[0]", std::numeric_limits<int>::min());
    if (g.dimension() == 2) c.y = as_int(v[1], path + "[1]", std::numeric_limits<int>::min());
    if (!g.contains(c)) fail(path, "site outside the lattice");
    return c;
}

Spin parse_spin(const json& v, const std::string& path) {
    const std::string s = as_string(v, path);
    if (s == "up") return Spin::up;
    if (s == "down") return Spin::down;
    fail(path, "expected \"up\" or \"down\"");
}

GapCenter parse_gap(const json& v, const std::string& path) {
    const std::string s = as_string(v, path);
    if (s == "zero") return GapCenter::zero;
    if (s == "pi") return GapCenter::pi;
    fail(path, "expected \"zero\" or \"pi\"");
}

NoiseChannel parse_channel(const json& v, const std::string& path) {
    const std::string s = as_string(v, path);
    if (s == "none") return NoiseChannel::none;
    if (s == "spin") return NoiseChannel::spin;
    if (s == "position") return NoiseChannel::position;
    fail(path, "expected \"none\", \"spin\", or \"position\"");
}

const char* channel_name(NoiseChannel c) {
    switch (c) {
        case NoiseChannel::none: return "none";
        case NoiseChannel::spin: return "spin";
        case NoiseChannel::position: return "position";
    }
    return "?";
}

struct InitialPlan {
    bool edge_state = false;
    Coord site{0, 0};
    Spin spin = Spin::down;
    GapCenter gap = GapCenter::zero;
    double tolerance = 0.1;
};

InitialPlan parse_initial(const json& v, const std::string& path, const LatticeGeometry& g) {
    check_keys(v, path, {"site", "spin", "edge_state"});
    InitialPlan init;
    if (v.contains("edge_state")) {
        if (v.contains("site") || v.contains("spin"))
            fail(path, "'edge_state' excludes 'site'/'spin'");
        if (g.dimension() != 1 || g.boundary(0) != Boundary::periodic)
            fail(path + ".edge_state", "edge-state initials require a 1D ring");
        const json& e = v["edge_state"];
        check_keys(e, path + ".edge_state", {"gap", "tolerance"});
        init.edge_state = true;
        if (e.contains("gap")) init.gap = parse_gap(e["gap"], path + ".edge_state.gap");
        if (e.contains("tolerance")) {
            init.tolerance = as_number(e["tolerance"], path + ".edge_state.tolerance");
            if (init.tolerance <= 0.0) fail(path + ".edge_state.tolerance", "must be > 0");
        }
    } else {
        init.site = parse_site(require(v, path, "site"), path + ".site", g);
        if (v.contains("spin")) init.spin = parse_spin(v["spin"], path + ".spin");
    }
    return init;
}

struct DecoPlan {
    std::vector<NoiseChannel> channels{NoiseChannel::none};
    std::vector<double> probabilities{0.0};
    int trajectories = 1000;
    bool kraus_per_primitive = false;
    enum class Method { automatic, dense, trajectories } method = Method::automatic;
};

DecoPlan parse_deco(const json& v, const std::string& path) {
    check_keys(v, path,
               {"channel", "probability", "trajectories", "kraus_per_primitive", "method"});
    DecoPlan d;
    if (v.contains("channel")) {
        const json& c = v["channel"];
        d.channels.clear();
        if (c.is_array()) {
            for (std::size_t i = 0; i < c.size(); ++i)
                d.channels.push_back(
                    parse_channel(c[i], path + ".channel[" + std::to_string(i) + "]"));
        } else {
            d.channels.push_back(parse_channel(c, path + ".channel"));
        }
        if (d.channels.empty()) fail(path + ".channel", "empty channel list");
    }
    if (v.contains("probability")) {
        const json& p = v["probability"];
        d.probabilities.clear();
        const auto one = [&](const json& x, const std::string& px) {
            const double val = as_number(x, px);
            if (val < 0.0 || val > 1.0) fail(px, "probability outside [0, 1]");
            d.probabilities.push_back(val);
        };
        if (p.is_array()) {
            for (std::size_t i = 0; i < p.size(); ++i)
                one(p[i], path + ".probability[" + std::to_string(i) + "]");
        } else {
            one(p, path + ".probability");
        }
        if (d.probabilities.empty()) fail(path + ".probability", "empty probability list");
    }
    if (v.contains("trajectories"))
        d.trajectories = as_int(v["trajectories"], path + ".trajectories", 2);
    if (v.contains("kraus_per_primitive"))
        d.kraus_per_primitive = as_bool(v["kraus_per_primitive"], path + ".kraus_per_primitive");
    if (v.contains("method")) {
        const std::string m = as_string(v["method"], path + ".method");
        if (m == "auto")
            d.method = DecoPlan::Method::automatic;
        else if (m == "dense")
            d.method = DecoPlan::Method::dense;
        else if (m == "trajectories")
            d.method = DecoPlan::Method::trajectories;
        else
            fail(path + ".method", "expected \"auto\", \"dense\", or \"trajectories\"");
    }
    return d;
}

struct RegionPlan {
    std::string name;
    std::array<int, 2> x_range{0, 0};
    bool has_y = false;
    std::array<int, 2> y_range{0, 0};
};

struct ObserverPlan {
    bool field_csv = false;
    int distribution_interval = 0;
    bool survival = false;
    std::optional<Coord> site_probability;
    std::vector<RegionPlan> regions;
    std::optional<GapCenter> edge_overlap_gap;
    std::vector<int> snapshot_steps;

    bool any() const {
        return field_csv || distribution_interval > 0 || survival ||
               site_probability.has_value() || !regions.empty() ||
               edge_overlap_gap.has_value() || !snapshot_steps.empty();
    }
};

ObserverPlan parse_observers(const json& v, const std::string& path, const LatticeGeometry& g,
                             int steps) {
    check_keys(v, path,
               {"field", "distribution_interval", "survival", "site_probability", "regions",
                "edge_overlap", "snapshot_steps"});
    ObserverPlan o;
    if (v.contains("field")) o.field_csv = as_bool(v["field"], path + ".field");
    if (v.contains("distribution_interval"))
        o.distribution_interval = as_int(v["distribution_interval"],
                                         path + ".distribution_interval", 0);
    if (v.contains("survival")) o.survival = as_bool(v["survival"], path + ".survival");
    if (v.contains("site_probability"))
        o.site_probability = parse_site(v["site_probability"], path + ".site_probability", g);
    if (v.contains("regions")) {
        const json& rs = v["regions"];
        if (!rs.is_array()) fail(path + ".regions", "expected an array");
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const std::string rp = path + ".regions[" + std::to_string(i) + "]";
            check_keys(rs[i], rp, {"name", "x_range", "y_range"});
            RegionPlan r;
            r.name = as_string(require(rs[i], rp, "name"), rp + ".name");
            const json& xr = require(rs[i], rp, "x_range");
            if (!xr.is_array() || xr.size() != 2) fail(rp + ".x_range", "expected [lo, hi]");
            r.x_range = {as_int(xr[0], rp + ".x_range[0]", std::numeric_limits<int>::min()),
                         as_int(xr[1], rp + ".x_range[1]", std::numeric_limits<int>::min())};
            if (rs[i].contains("y_range")) {
                if (g.dimension() != 2) fail(rp + ".y_range", "y_range requires a 2D lattice");
                const json& yr = rs[i]["y_range"];
                if (!yr.is_array() || yr.size() != 2) fail(rp + ".y_range", "expected [lo, hi]");
                r.has_y = true;
                r.y_range = {as_int(yr[0], rp + ".y_range[0]", std::numeric_limits<int>::min()),
                             as_int(yr[1], rp + ".y_range[1]", std::numeric_limits<int>::min())};
            }
            o.regions.push_back(r);
        }
    }
    if (v.contains("edge_overlap")) {
        if (g.dimension() != 1 || g.boundary(0) != Boundary::periodic)
            fail(path + ".edge_overlap", "edge overlap requires a 1D ring");
        const json& e = v["edge_overlap"];
        check_keys(e, path + ".edge_overlap", {"gap"});
        o.edge_overlap_gap =
            e.contains("gap") ? parse_gap(e["gap"], path + ".edge_overlap.gap") : GapCenter::zero;
    }
    if (v.contains("snapshot_steps")) {
        const json& ss = v["snapshot_steps"];
        if (!ss.is_array()) fail(path + ".snapshot_steps", "expected an array of steps");
        for (std::size_t i = 0; i < ss.size(); ++i)
            o.snapshot_steps.push_back(
                as_int(ss[i], path + ".snapshot_steps[" + std::to_string(i) + "]", 0, steps));
    }
    return o;
}

// ---------------------------------------------------------------------------
// Task plans

struct WalkPlan {
    LatticeGeometry geometry = LatticeGeometry::line(2);
    FieldPlan field;
    std::string protocol;
    InitialPlan initial;
    int steps = 1;
    DecoPlan deco;
    ObserverPlan observers;
};

struct BandsPlan {
    double theta1 = 0.0, theta2 = 0.0;
    int k_points = 256;
    std::vector<ChiralFrame> frames{ChiralFrame::frame_prime, ChiralFrame::frame_double_prime};
};

struct PhaseDiagramPlan {
    int points = 121;
    double min = -2.0 * pi, max = 2.0 * pi;
    int k_points = 128;
};

struct GapScanPlan {
    int points = 121;
    double min = -2.0 * pi, max = 2.0 * pi;
    int bz_points = 64;
};

struct StripPlan {
    StripConfig cfg;
};

struct DropletPlan {
    DropletTransportConfig cfg;
};

struct DecayPlan {
    LatticeGeometry geometry = LatticeGeometry::line(201);
    FieldPlan field;
    std::string protocol = "split_step_1d";
    GapCenter gap = GapCenter::zero;
    double tolerance = 0.1;
    std::vector<NoiseChannel> channels{NoiseChannel::spin};
    std::vector<double> probabilities;
    int n_max = 100;
    bool kraus_per_primitive = false;
};

struct SizeSweepPlan {
    std::vector<double> ratios;
    int n_sites = 201;
    /// Entries are diffraction ratios or the setup names "setup_1d"/"setup_2d".
    std::vector<std::pair<std::string, OpticsConfig>> profiles;
};

struct Plan {
    std::string task;
    std::uint64_t seed = 1;
    int threads = 1;
    std::optional<std::string> output_dir;
    std::variant<WalkPlan, BandsPlan, PhaseDiagramPlan, GapScanPlan, StripPlan, DropletPlan,
                 DecayPlan, SizeSweepPlan>
        body;
};

ChiralFrame parse_frame(const json& v, const std::string& path) {
    const std::string s = as_string(v, path);
    if (s == "prime") return ChiralFrame::frame_prime;
    if (s == "double_prime") return ChiralFrame::frame_double_prime;
    if (s == "sigma_z") return ChiralFrame::sigma_z;
    fail(path, "expected \"prime\", \"double_prime\", or \"sigma_z\"");
}

const char* frame_name(ChiralFrame f) {
    switch (f) {
        case ChiralFrame::frame_prime: return "prime";
        case ChiralFrame::frame_double_prime: return "double_prime";
        case ChiralFrame::sigma_z: return "sigma_z";
    }
    return "?";
}

FieldPlan default_wall_field() {
    FieldPlan f;
    f.type = FieldPlan::Type::wall_1d;
    f.left = {-pi / 2.0, pi / 4.0};
    f.right = {-pi / 2.0, 3.0 * pi / 4.0};
    f.optics = OpticsConfig::setup_2d();
    return f;
}

WalkPlan parse_walk(const json& cfg) {
    WalkPlan p;
    p.geometry = parse_geometry(require(cfg, "$", "geometry"), "$.geometry");
    p.field = parse_field(require(cfg, "$", "field"), "$.field", p.geometry.dimension());
    p.protocol = as_string(require(cfg, "$", "protocol"), "$.protocol");
    WalkProtocol proto;
    try {
        proto = named_protocol(p.protocol);
    } catch (const std::exception& e) {
        fail("$.protocol", e.what());
    }
    if (proto.dimension != p.geometry.dimension())
        fail("$.protocol", "protocol '" + p.protocol + "' is " +
                               std::to_string(proto.dimension) + "D but the lattice is " +
                               std::to_string(p.geometry.dimension()) + "D");
    p.steps = as_int(require(cfg, "$", "steps"), "$.steps", 1);
    p.initial = parse_initial(require(cfg, "$", "initial"), "$.initial", p.geometry);
    if (cfg.contains("decoherence")) p.deco = parse_deco(cfg["decoherence"], "$.decoherence");
    if (cfg.contains("observers"))
        p.observers = parse_observers(cfg["observers"], "$.observers", p.geometry, p.steps);

    const bool noisy = [&] {
        for (NoiseChannel c : p.deco.channels)
            if (c != NoiseChannel::none)
                for (double pr : p.deco.probabilities)
                    if (pr > 0.0) return true;
        return false;
    }();
    if (noisy && p.deco.method == DecoPlan::Method::dense &&
        p.geometry.basis_size() > DensityOperator::max_dense_basis)
        fail("$.decoherence.method",
             "dense evolution is limited to " + std::to_string(DensityOperator::max_dense_basis) +
                 " basis states; use \"trajectories\"");
    if (noisy && p.observers.distribution_interval > 0 &&
        (p.deco.method == DecoPlan::Method::trajectories ||
         (p.deco.method == DecoPlan::Method::automatic &&
          p.geometry.basis_size() > DensityOperator::max_dense_basis)))
        fail("$.observers.distribution_interval",
             "distribution maps require pure or dense evolution; use snapshot_steps for "
             "trajectory means");
    return p;
}

BandsPlan parse_bands(const json& cfg) {
    BandsPlan p;
    const auto [t1, t2] = as_angle_pair(require(cfg, "$", "angles"), "$.angles");
    p.theta1 = t1;
    p.theta2 = t2;
    if (cfg.contains("k_points")) p.k_points = as_int(cfg["k_points"], "$.k_points", 64, 1 << 20);
    if (cfg.contains("frames")) {
        const json& fs = cfg["frames"];
        if (!fs.is_array() || fs.empty()) fail("$.frames", "expected a nonempty array");
        p.frames.clear();
        for (std::size_t i = 0; i < fs.size(); ++i)
            p.frames.push_back(parse_frame(fs[i], "$.frames[" + std::to_string(i) + "]"));
    }
    return p;
}

PhaseDiagramPlan parse_phase_diagram(const json& cfg) {
    PhaseDiagramPlan p;
    if (cfg.contains("points")) p.points = as_int(cfg["points"], "$.points", 2, 4097);
    if (cfg.contains("min")) p.min = as_angle(cfg["min"], "$.min");
    if (cfg.contains("max")) p.max = as_angle(cfg["max"], "$.max");
    if (p.min >= p.max) fail("$.min", "'min' must be below 'max'");
    if (cfg.contains("k_points")) p.k_points = as_int(cfg["k_points"], "$.k_points", 64, 1 << 20);
    return p;
}

GapScanPlan parse_gap_scan(const json& cfg) {
    GapScanPlan p;
    if (cfg.contains("points")) p.points = as_int(cfg["points"], "$.points", 2, 4097);
    if (cfg.contains("min")) p.min = as_angle(cfg["min"], "$.min");
    if (cfg.contains("max")) p.max = as_angle(cfg["max"], "$.max");
    if (p.min >= p.max) fail("$.min", "'min' must be below 'max'");
    if (cfg.contains("bz_points")) p.bz_points = as_int(cfg["bz_points"], "$.bz_points", 8, 4096);
    return p;
}

StripPlan parse_strip(const json& cfg) {
    StripPlan p;
    if (cfg.contains("ny")) p.cfg.ny = as_int(cfg["ny"], "$.ny", 4, 100000);
    if (cfg.contains("half_height")) {
        p.cfg.half_height = as_number(cfg["half_height"], "$.half_height");
        if (p.cfg.half_height <= 0.0) fail("$.half_height", "must be > 0");
    }
    p.cfg.inside_angles = as_angle_pair(require(cfg, "$", "inside"), "$.inside");
    p.cfg.outside_angles = as_angle_pair(require(cfg, "$", "outside"), "$.outside");
    if (cfg.contains("optics")) p.cfg.optics = parse_optics(cfg["optics"], "$.optics");
    if (cfg.contains("kx_points"))
        p.cfg.kx_points = as_int(cfg["kx_points"], "$.kx_points", 8, 1 << 16);
    if (cfg.contains("bz_points"))
        p.cfg.bz_points = as_int(cfg["bz_points"], "$.bz_points", 8, 1 << 16);
    return p;
}

DropletPlan parse_droplet(const json& cfg, std::uint64_t seed, int threads) {
    DropletPlan p;
    if (cfg.contains("geometry")) {
        p.cfg.geometry = parse_geometry(cfg["geometry"], "$.geometry");
        if (p.cfg.geometry.dimension() != 2) fail("$.geometry", "droplet runs are 2D");
    }
    if (cfg.contains("shape")) p.cfg.shape = parse_shape(cfg["shape"], "$.shape", p.cfg.shape);
    if (cfg.contains("inside")) p.cfg.inside_angles = as_angle_pair(cfg["inside"], "$.inside");
    if (cfg.contains("outside"))
        p.cfg.outside_angles = as_angle_pair(cfg["outside"], "$.outside");
    if (cfg.contains("optics")) p.cfg.optics = parse_optics(cfg["optics"], "$.optics");
    if (cfg.contains("steps")) p.cfg.n_steps = as_int(cfg["steps"], "$.steps", 1);
    if (cfg.contains("initial")) {
        const InitialPlan init =
            parse_initial(cfg["initial"], "$.initial", p.cfg.geometry);
        if (init.edge_state) fail("$.initial", "droplet runs start from a site state");
        p.cfg.initial_site = init.site;
        p.cfg.initial_spin = init.spin;
    }
    if (cfg.contains("noise")) {
        const DecoPlan d = parse_deco(cfg["noise"], "$.noise");
        if (d.channels.size() != 1 || d.probabilities.size() != 1)
            fail("$.noise", "droplet runs take a single channel and probability");
        p.cfg.noise.channel = d.channels[0];
        p.cfg.noise.probability = d.probabilities[0];
        p.cfg.noise.trajectories = d.trajectories;
        p.cfg.noise.kraus_per_primitive = d.kraus_per_primitive;
    }
    p.cfg.noise.seed = seed;
    p.cfg.threads = threads;
    if (cfg.contains("band")) {
        const json& b = cfg["band"];
        if (!b.is_array() || b.size() != 2) fail("$.band", "expected [lo, hi]");
        p.cfg.band_lo = as_number(b[0], "$.band[0]");
        p.cfg.band_hi = as_number(b[1], "$.band[1]");
    }
    if (cfg.contains("band_dilation"))
        p.cfg.band_dilation = as_int(cfg["band_dilation"], "$.band_dilation", 0, 50);
    if (cfg.contains("front_fit")) {
        const json& b = cfg["front_fit"];
        if (!b.is_array() || b.size() != 2) fail("$.front_fit", "expected [lo, hi]");
        p.cfg.front_fit_lo = as_int(b[0], "$.front_fit[0]", 0);
        p.cfg.front_fit_hi = as_int(b[1], "$.front_fit[1]", -1);
    }
    if (cfg.contains("snapshots")) {
        const json& ss = cfg["snapshots"];
        if (!ss.is_array()) fail("$.snapshots", "expected an array of steps");
        for (std::size_t i = 0; i < ss.size(); ++i)
            p.cfg.snapshot_steps.push_back(
                as_int(ss[i], "$.snapshots[" + std::to_string(i) + "]", 0, p.cfg.n_steps));
    }
    return p;
}

DecayPlan parse_decay(const json& cfg) {
    DecayPlan p;
    p.field = default_wall_field();
    if (cfg.contains("geometry")) {
        p.geometry = parse_geometry(cfg["geometry"], "$.geometry");
        if (p.geometry.dimension() != 1 || p.geometry.boundary(0) != Boundary::periodic)
            fail("$.geometry", "edge decay runs on a 1D ring");
    }
    if (cfg.contains("field"))
        p.field = parse_field(cfg["field"], "$.field", p.geometry.dimension());
    if (cfg.contains("protocol")) {
        p.protocol = as_string(cfg["protocol"], "$.protocol");
        try {
            if (named_protocol(p.protocol).dimension != 1)
                fail("$.protocol", "edge decay requires a 1D protocol");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail("$.protocol", e.what());
        }
    }
    if (cfg.contains("gap")) p.gap = parse_gap(cfg["gap"], "$.gap");
    if (cfg.contains("tolerance")) {
        p.tolerance = as_number(cfg["tolerance"], "$.tolerance");
        if (p.tolerance <= 0.0) fail("$.tolerance", "must be > 0");
    }
    if (cfg.contains("channel")) {
        const json& c = cfg["channel"];
        p.channels.clear();
        if (c.is_array()) {
            for (std::size_t i = 0; i < c.size(); ++i)
                p.channels.push_back(
                    parse_channel(c[i], "$.channel[" + std::to_string(i) + "]"));
        } else {
            p.channels.push_back(parse_channel(c, "$.channel"));
        }
        for (NoiseChannel c2 : p.channels)
            if (c2 == NoiseChannel::none) fail("$.channel", "decay needs spin or position");
        if (p.channels.empty()) fail("$.channel", "empty channel list");
    }
    const json& ps = require(cfg, "$", "probabilities");
    if (!ps.is_array() || ps.empty()) fail("$.probabilities", "expected a nonempty array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string pp = "$.probabilities[" + std::to_string(i) + "]";
        const double v = as_number(ps[i], pp);
        if (v < 0.0 || v > 1.0) fail(pp, "probability outside [0, 1]");
        p.probabilities.push_back(v);
    }
    if (cfg.contains("n_max")) p.n_max = as_int(cfg["n_max"], "$.n_max", 1);
    if (cfg.contains("kraus_per_primitive"))
        p.kraus_per_primitive = as_bool(cfg["kraus_per_primitive"], "$.kraus_per_primitive");
    if (p.geometry.basis_size() > DensityOperator::max_dense_basis)
        fail("$.geometry", "edge decay uses dense evolution; lattice too large");
    return p;
}

SizeSweepPlan parse_size_sweep(const json& cfg) {
    SizeSweepPlan p;
    const json& rs = require(cfg, "$", "ratios");
    if (!rs.is_array() || rs.empty()) fail("$.ratios", "expected a nonempty array");
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const std::string rp = "$.ratios[" + std::to_string(i) + "]";
        const double v = as_number(rs[i], rp);
        if (v <= 0.0) fail(rp, "ratio must be > 0");
        p.ratios.push_back(v);
    }
    if (cfg.contains("n_sites")) p.n_sites = as_int(cfg["n_sites"], "$.n_sites", 41);
    if (cfg.contains("profiles")) {
        const json& fs = cfg["profiles"];
        if (!fs.is_array()) fail("$.profiles", "expected an array");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const std::string fp = "$.profiles[" + std::to_string(i) + "]";
            if (fs[i].is_string()) {
                const std::string s = fs[i].get<std::string>();
                if (s == "setup_1d")
                    p.profiles.emplace_back(s, OpticsConfig::setup_1d());
                else if (s == "setup_2d")
                    p.profiles.emplace_back(s, OpticsConfig::setup_2d());
                else
                    fail(fp, "expected a ratio or \"setup_1d\"/\"setup_2d\"");
            } else {
                const double v = as_number(fs[i], fp);
                if (v <= 0.0) fail(fp, "ratio must be > 0");
                p.profiles.emplace_back("r" + format_num(v), OpticsConfig::from_ratio(v));
            }
        }
    }
    return p;
}

Plan parse_scenario(const json& cfg) {
    check_object(cfg, "$");
    Plan plan;
    plan.task = as_string(require(cfg, "$", "task"), "$.task");
    if (cfg.contains("seed")) {
        const json& s = cfg["seed"];
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
            fail("$.seed", "expected a nonnegative integer");
        plan.seed = s.get<std::uint64_t>();
    }
    if (cfg.contains("threads")) plan.threads = as_int(cfg["threads"], "$.threads", 1, 1024);
    if (cfg.contains("output_dir"))
        plan.output_dir = as_string(cfg["output_dir"], "$.output_dir");

    const std::initializer_list<const char*> common = {"task", "description", "seed", "threads",
                                                       "output_dir"};
    const auto keys = [&](std::initializer_list<const char*> extra) {
        std::vector<const char*> all(common);
        all.insert(all.end(), extra);
        for (const auto& item : cfg.items()) {
            bool known = false;
            for (const char* a : all)
                if (item.key() == a) {
                    known = true;
                    break;
                }
            if (!known) fail("$", "unknown key '" + item.key() + "'");
        }
    };

    if (plan.task == "walk") {
        keys({"geometry", "field", "protocol", "initial", "steps", "decoherence", "observers"});
        plan.body = parse_walk(cfg);
    } else if (plan.task == "bands") {
        keys({"angles", "k_points", "frames"});
        plan.body = parse_bands(cfg);
    } else if (plan.task == "phase_diagram_1d") {
        keys({"points", "min", "max", "k_points"});
        plan.body = parse_phase_diagram(cfg);
    } else if (plan.task == "gap_scan_2d") {
        keys({"points", "min", "max", "bz_points"});
        plan.body = parse_gap_scan(cfg);
    } else if (plan.task == "strip_spectrum") {
        keys({"ny", "half_height", "inside", "outside", "optics", "kx_points", "bz_points"});
        plan.body = parse_strip(cfg);
    } else if (plan.task == "droplet") {
        keys({"geometry", "shape", "inside", "outside", "optics", "initial", "steps", "noise",
              "band", "band_dilation", "front_fit", "snapshots"});
        plan.body = parse_droplet(cfg, plan.seed, plan.threads);
    } else if (plan.task == "edge_decay") {
        keys({"geometry", "field", "protocol", "gap", "tolerance", "channel", "probabilities",
              "n_max", "kraus_per_primitive"});
        plan.body = parse_decay(cfg);
    } else if (plan.task == "edge_size_sweep") {
        keys({"ratios", "n_sites", "profiles"});
        plan.body = parse_size_sweep(cfg);
    } else {
        fail("$.task",
             "unknown task '" + plan.task +
                 "' (expected walk, bands, phase_diagram_1d, gap_scan_2d, strip_spectrum, "
                 "droplet, edge_decay, edge_size_sweep)");
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Execution

struct RunContext {
    std::filesystem::path dir;
    std::vector<std::string> outputs;

    std::ofstream open(const std::string& name) {
        outputs.push_back(name);
        auto os = open_output(dir / name);
        os.precision(12);
        return os;
    }
};

/// The edge state nearest x = 0 (the engineered wall in every bundled field).
EdgeState central_edge_state(const WalkProtocol& proto, const CoinField& field, GapCenter gap,
                             double tolerance) {
    std::vector<EdgeState> states = find_edge_states(proto, field, gap, tolerance);
    if (states.empty())
        throw ConfigError("no edge state found in the requested gap (is the field gapped and "
                          "inhomogeneous?)");
    std::size_t best = 0;
    for (std::size_t i = 1; i < states.size(); ++i)
        if (std::fabs(states[i].center) < std::fabs(states[best].center)) best = i;
    return std::move(states[best]);
}

void write_distribution_rows(std::ofstream& os, const LatticeGeometry& g, int n,
                             const std::vector<double>& p) {
    for (std::int64_t s = 0; s < g.n_sites(); ++s) {
        const Coord c = g.site_coord(s);
        os << n << ',' << c.x;
        if (g.dimension() == 2) os << ',' << c.y;
        os << ',' << p[static_cast<std::size_t>(s)] << '\n';
    }
}

void execute_walk(const WalkPlan& p, const Plan& plan, RunContext& ctx) {
    if (!p.observers.any()) return;  // nothing requested: manifest only

    const CoinField field = build_field(p.field, p.geometry);
    const WalkProtocol proto = named_protocol(p.protocol);
    const CompiledStep w(proto, field);

    if (p.observers.field_csv) {
        auto os = ctx.open("field.csv");
        write_coin_field_csv(os, field);
    }

    std::optional<EdgeState> edge_ref;
    if (p.observers.edge_overlap_gap)
        edge_ref = central_edge_state(proto, field, *p.observers.edge_overlap_gap, 0.1);

    SpinorState initial = p.initial.edge_state
                              ? central_edge_state(proto, field, p.initial.gap,
                                                   p.initial.tolerance)
                                    .state
                              : SpinorState::basis_state(p.geometry, p.initial.site,
                                                         p.initial.spin);

    std::vector<Region> regions;
    for (const RegionPlan& r : p.observers.regions)
        regions.push_back(Region::from_predicate(p.geometry, [&](Coord c) {
            if (c.x < r.x_range[0] || c.x > r.x_range[1]) return false;
            if (r.has_y && (c.y < r.y_range[0] || c.y > r.y_range[1])) return false;
            return true;
        }));

    // One run per (channel, probability) combination; pure when noise-free.
    struct Combo {
        NoiseChannel channel;
        double probability;
    };
    std::vector<Combo> combos;
    for (NoiseChannel c : p.deco.channels) {
        if (c == NoiseChannel::none) {
            combos.push_back({c, 0.0});
            continue;
        }
        for (double pr : p.deco.probabilities) combos.push_back({c, pr});
    }

    for (const Combo& combo : combos) {
        const bool pure = combo.channel == NoiseChannel::none || combo.probability == 0.0;
        std::string suffix;
        if (combos.size() > 1)
            suffix = std::string("_") + channel_name(combo.channel) + "_p" +
                     format_num(combo.probability);

        std::vector<TimeSeries> series;
        const std::size_t len = static_cast<std::size_t>(p.steps) + 1;
        for (const RegionPlan& r : p.observers.regions)
            series.push_back({"P_" + r.name, std::vector<double>(len, 0.0), {}});
        const std::size_t site_idx = series.size();
        if (p.observers.site_probability)
            series.push_back({"P_site", std::vector<double>(len, 0.0), {}});
        const std::size_t ov_idx = series.size();
        if (edge_ref) series.push_back({"edge_overlap", std::vector<double>(len, 0.0), {}});
        const std::size_t surv_idx = series.size();
        if (p.observers.survival) series.push_back({"survival", std::vector<double>(len, 0.0), {}});

        std::optional<std::ofstream> dist_os;
        if (p.observers.distribution_interval > 0) {
            dist_os = ctx.open("distribution" + suffix + ".csv");
            *dist_os << (p.geometry.dimension() == 1 ? "n,x,p" : "n,x,y,p") << '\n';
        }

        std::vector<int> snap_at(len, -1);
        for (std::size_t i = 0; i < p.observers.snapshot_steps.size(); ++i)
            snap_at[static_cast<std::size_t>(p.observers.snapshot_steps[i])] =
                static_cast<int>(i);

        if (pure) {
            SpinorState psi = initial;
            evolve_pure(psi, w, p.steps, [&](int n, const SpinorState& st) {
                const std::size_t un = static_cast<std::size_t>(n);
                for (std::size_t r = 0; r < regions.size(); ++r)
                    series[r].value[un] = region_probability(st, regions[r]);
                if (p.observers.site_probability) {
                    const Coord c = *p.observers.site_probability;
                    series[site_idx].value[un] = std::norm(st.amplitude(c, Spin::up)) +
                                                 std::norm(st.amplitude(c, Spin::down));
                }
                if (edge_ref)
                    series[ov_idx].value[un] = overlap_probability(st, edge_ref->state);
                if (p.observers.survival)
                    series[surv_idx].value[un] = 1.0 - st.leaked_norm();
                if (dist_os && n % p.observers.distribution_interval == 0)
                    write_distribution_rows(*dist_os, p.geometry, n,
                                            position_distribution(st));
                if (snap_at[un] >= 0) {
                    auto os = ctx.open("snapshot" + suffix + "_n" + std::to_string(n) + ".csv");
                    write_state_snapshot(os, st, n);
                }
            });
        } else if (p.deco.method == DecoPlan::Method::dense ||
                   (p.deco.method == DecoPlan::Method::automatic &&
                    p.geometry.basis_size() <= DensityOperator::max_dense_basis)) {
            DecoherenceConfig cfg;
            cfg.channel = combo.channel;
            cfg.probability = combo.probability;
            cfg.kraus_per_primitive = p.deco.kraus_per_primitive;
            DensityOperator rho = DensityOperator::pure(initial);
            evolve_dense(rho, w, cfg, p.steps, [&](int n, const DensityOperator& r) {
                const std::size_t un = static_cast<std::size_t>(n);
                for (std::size_t ri = 0; ri < regions.size(); ++ri)
                    series[ri].value[un] = region_probability(r, regions[ri]);
                if (p.observers.site_probability) {
                    const Coord c = *p.observers.site_probability;
                    const auto iu = p.geometry.basis_index(c, Spin::up);
                    series[site_idx].value[un] = r.matrix()(iu, iu).real() +
                                                 r.matrix()(iu + 1, iu + 1).real();
                }
                if (edge_ref) series[ov_idx].value[un] = r.overlap(edge_ref->state);
                if (p.observers.survival) series[surv_idx].value[un] = r.trace_real();
                if (dist_os && n % p.observers.distribution_interval == 0)
                    write_distribution_rows(*dist_os, p.geometry, n, position_distribution(r));
                if (snap_at[un] >= 0) {
                    auto os = ctx.open("snapshot" + suffix + "_n" + std::to_string(n) + ".csv");
                    write_distribution_csv(os, p.geometry, position_distribution(r));
                }
            });
        } else {
            DecoherenceConfig cfg;
            cfg.channel = combo.channel;
            cfg.probability = combo.probability;
            cfg.seed = plan.seed;
            cfg.trajectories = p.deco.trajectories;
            cfg.kraus_per_primitive = p.deco.kraus_per_primitive;
            TrajectoryObservables obs;
            obs.regions = regions;
            if (p.observers.site_probability)
                obs.regions.push_back(
                    Region(p.geometry, {*p.observers.site_probability}));
            if (edge_ref) obs.overlap_reference = &edge_ref->state;
            obs.track_survival = p.observers.survival;
            obs.snapshot_steps = p.observers.snapshot_steps;
            const TrajectoryEnsembleResult ens =
                run_trajectories(initial, w, cfg, p.steps, obs, plan.threads);
            for (std::size_t r = 0; r < regions.size(); ++r) {
                series[r].value = ens.region_mean[r];
                series[r].stderr_ = ens.region_err[r];
            }
            if (p.observers.site_probability) {
                series[site_idx].value = ens.region_mean[regions.size()];
                series[site_idx].stderr_ = ens.region_err[regions.size()];
            }
            if (edge_ref) {
                series[ov_idx].value = ens.overlap_mean;
                series[ov_idx].stderr_ = ens.overlap_err;
            }
            if (p.observers.survival) series[surv_idx].value = ens.survival_mean;
            for (std::size_t i = 0; i < ens.snapshot_mean.size(); ++i) {
                auto os = ctx.open("snapshot" + suffix + "_n" +
                                   std::to_string(ens.snapshot_steps[i]) + ".csv");
                write_distribution_csv(os, p.geometry, ens.snapshot_mean[i]);
            }
        }

        if (!series.empty()) {
            auto os = ctx.open("series" + suffix + ".csv");
            write_series_csv(os, series);
        }
    }
}

void execute_bands(const BandsPlan& p, RunContext& ctx) {
    {
        const QuasienergySpectrum spec =
            bloch_bands(split_step_1d(), p.theta1, p.theta2, p.k_points);
        auto os = ctx.open("bands.csv");
        write_bands_csv(os, spec);
    }
    json winding = json::object();
    for (ChiralFrame f : p.frames) {
        const QuasienergySpectrum spec =
            bloch_bands(frame_operator(f), p.theta1, p.theta2, p.k_points);
        auto os = ctx.open(std::string("spinors_") + frame_name(f) + ".csv");
        os << "k,nx,ny,nz\n";
        for (std::size_t i = 0; i < spec.k.size(); ++i)
            os << spec.k[i] << ',' << spec.axis[i][0] << ',' << spec.axis[i][1] << ','
               << spec.axis[i][2] << '\n';
        if (f != ChiralFrame::sigma_z)
            winding[std::string("nu_") + frame_name(f)] =
                winding_number(f, p.theta1, p.theta2, p.k_points);
    }
    const TopologicalClassification cls = classify_1d(p.theta1, p.theta2, p.k_points);
    winding["nu_0"] = cls.nu_0;
    winding["nu_pi"] = cls.nu_pi;
    auto os = ctx.open("winding.json");
    os << winding.dump(2) << '\n';
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

void execute_phase_diagram(const PhaseDiagramPlan& p, RunContext& ctx) {
    const std::vector<double> grid = linspace(p.min, p.max, p.points);
    auto os = ctx.open("phase_diagram.csv");
    os << "theta1,theta2,gap0,gappi,nu0,nupi\n";
    for (double t1 : grid)
        for (double t2 : grid) {
            const QuasienergySpectrum spec = bloch_bands(split_step_1d(), t1, t2, p.k_points);
            os << t1 << ',' << t2 << ',' << spec.gap0 << ',' << spec.gap_pi << ',';
            try {
                const auto [nu0, nupi] = invariants_1d(t1, t2, p.k_points);
                os << nu0 << ',' << nupi << '\n';
            } catch (const GapClosedError&) {
                os << ",\n";  // phase boundary: invariants undefined
            }
        }
}

void execute_gap_scan(const GapScanPlan& p, RunContext& ctx) {
    const std::vector<double> grid = linspace(p.min, p.max, p.points);
    const std::vector<GapScanEntry> scan = gap_scan_2d(grid, grid, p.bz_points);
    auto os = ctx.open("gap_scan.csv");
    write_gap_scan_csv(os, scan);
}

void execute_strip(const StripPlan& p, RunContext& ctx) {
    const StripSpectrum spec = strip_spectrum(p.cfg);
    {
        auto os = ctx.open("strip_spectrum.csv");
        write_strip_csv(os, spec);
    }
    json modes;
    const EdgeModeCount c0 = edge_mode_count(spec, GapCenter::zero);
    const EdgeModeCount cpi = edge_mode_count(spec, GapCenter::pi);
    modes["gap0"] = {{"lower", c0.lower}, {"upper", c0.upper}};
    modes["gap_pi"] = {{"lower", cpi.lower}, {"upper", cpi.upper}};
    auto os = ctx.open("edge_modes.json");
    os << modes.dump(2) << '\n';
}

void execute_droplet(const DropletPlan& p, RunContext& ctx) {
    const DropletTransportResult result = droplet_transport(p.cfg);
    {
        auto os = ctx.open("series.csv");
        write_series_csv(os, {result.f_population, result.l_ratio, result.front_position});
    }
    {
        const CoinField field = island_field(p.cfg.geometry, p.cfg.shape, p.cfg.inside_angles,
                                             p.cfg.outside_angles, p.cfg.optics);
        auto os = ctx.open("field.csv");
        write_coin_field_csv(os, field);
    }
    for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
        auto os = ctx.open("dist_n" + std::to_string(result.snapshot_steps[i]) + ".csv");
        write_distribution_csv(os, p.cfg.geometry, result.snapshots[i]);
    }
    json summary;
    summary["contour_length"] = result.contour_length;
    summary["front_speed"] = result.front_speed;
    summary["l_period"] = result.l_period;
    summary["f_region_sites"] = result.f_region.size();
    summary["l_region_sites"] = result.l_region.size();
    // Long-time F-population mean over the window the plateau settles into.
    const int lo = std::min(200, p.cfg.n_steps / 2);
    double acc = 0.0;
    int cnt = 0;
    for (int n = lo; n <= p.cfg.n_steps; ++n, ++cnt)
        acc += result.f_population.value[static_cast<std::size_t>(n)];
    summary["f_late_mean"] = cnt > 0 ? acc / cnt : 0.0;
    auto os = ctx.open("summary.json");
    os << summary.dump(2) << '\n';
}

void execute_decay(const DecayPlan& p, RunContext& ctx) {
    const CoinField field = build_field(p.field, p.geometry);
    const WalkProtocol proto = named_protocol(p.protocol);
    const EdgeState edge = central_edge_state(proto, field, p.gap, p.tolerance);
    {
        auto os = ctx.open("edge_state.json");
        write_edge_state_json(os, edge);
    }
    std::vector<TimeSeries> series;
    json summary = json::array();
    for (NoiseChannel ch : p.channels)
        for (double prob : p.probabilities) {
            const DecayMeasurement m = measure_decay(edge, proto, field, ch, prob, p.n_max,
                                                     p.kraus_per_primitive);
            const std::string tag =
                std::string("_") + channel_name(ch) + "_p" + format_num(prob);
            series.push_back({"pi" + tag, m.pi_n, {}});
            const DecayPrediction pred = decay_rate(edge, ch, prob, p.n_max);
            series.push_back({"pred" + tag, pred.predicted, {}});
            summary.push_back({{"channel", channel_name(ch)},
                               {"p", prob},
                               {"gamma_model", pred.gamma},
                               {"gamma_fitted", m.fitted_rate}});
        }
    {
        auto os = ctx.open("decay.csv");
        write_series_csv(os, series);
    }
    auto os = ctx.open("summary.json");
    os << summary.dump(2) << '\n';
}

void execute_size_sweep(const SizeSweepPlan& p, RunContext& ctx) {
    const std::vector<EdgeSizeEntry> sweep = edge_state_size_sweep(p.ratios, p.n_sites);
    {
        auto os = ctx.open("size_sweep.csv");
        os << "ratio,rms_size,p_init\n";
        for (const EdgeSizeEntry& e : sweep)
            os << e.ratio << ',' << e.rms_size << ',' << e.p_init << '\n';
    }
    const LatticeGeometry g = LatticeGeometry::line(p.n_sites);
    for (const auto& [label, optics] : p.profiles) {
        const CoinField field =
            wall_field_1d(g, {-pi / 2.0, pi / 4.0}, {-pi / 2.0, 3.0 * pi / 4.0}, optics);
        const EdgeState edge = central_edge_state(split_step_1d(), field, GapCenter::zero, 0.1);
        const std::vector<double> dist = position_distribution(edge.state);
        auto os = ctx.open("profile_" + label + ".csv");
        os << "x,theta1,theta2,p\n";
        for (std::int64_t s = 0; s < g.n_sites(); ++s)
            os << g.site_coord(s).x << ',' << field.theta1(s) << ',' << field.theta2(s) << ','
               << dist[static_cast<std::size_t>(s)] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Presets

struct PresetEntry {
    const char* name;
    const char* description;
    const char* config;
};

const PresetEntry kPresets[] = {
    {"fig1",
     "Hadamard-walk quasienergy bands and eigenspinor winding in both chiral time frames",
     R"({
       "task": "bands",
       "description": "Hadamard walk (pi/2, 0): bands and frame eigenspinors",
       "angles": ["pi/2", "0"],
       "k_points": 256,
       "frames": ["prime", "double_prime"]
     })"},
    {"fig2a",
     "1D split-step phase diagram: gap widths and invariants (nu_0, nu_pi) over the "
     "coin-angle plane",
     R"({
       "task": "phase_diagram_1d",
       "description": "1D invariants over the 4pi-periodic coin-angle cell",
       "points": 121,
       "min": "-2pi",
       "max": "2pi",
       "k_points": 128
     })"},
    {"fig2b",
     "2D protocol phase boundaries: minimal quasienergy gaps at 0 and pi over the "
     "coin-angle plane",
     R"({
       "task": "gap_scan_2d",
       "description": "2D gap-closing scan over the 4pi-periodic coin-angle cell",
       "points": 121,
       "min": "-2pi",
       "max": "2pi",
       "bz_points": 64
     })"},
    {"fig3b",
     "Decoherence-free 1D domain-wall evolution from |0,down>: distribution map, origin "
     "series, edge overlap",
     R"({
       "task": "walk",
       "description": "1D wall evolution without decoherence",
       "seed": 1,
       "steps": 100,
       "geometry": {"extent": [201], "boundary": "periodic"},
       "protocol": "split_step_1d",
       "field": {"type": "wall_1d", "left": ["-pi/2", "pi/4"], "right": ["-pi/2", "3pi/4"],
                 "optics": {"preset": "setup_2d"}},
       "initial": {"site": [0], "spin": "down"},
       "observers": {"field": true, "distribution_interval": 1, "site_probability": [0],
                     "edge_overlap": {"gap": "zero"}}
     })"},
    {"fig3c",
     "1D domain-wall evolution under stroboscopic spin and position decoherence for a "
     "grid of probabilities",
     R"({
       "task": "walk",
       "description": "1D wall evolution under spin/position decoherence",
       "seed": 1,
       "steps": 100,
       "geometry": {"extent": [201], "boundary": "periodic"},
       "protocol": "split_step_1d",
       "field": {"type": "wall_1d", "left": ["-pi/2", "pi/4"], "right": ["-pi/2", "3pi/4"],
                 "optics": {"preset": "setup_2d"}},
       "initial": {"site": [0], "spin": "down"},
       "decoherence": {"channel": ["spin", "position"], "probability": [0.01, 0.1, 0.5],
                       "method": "dense"},
       "observers": {"field": true, "distribution_interval": 1, "site_probability": [0],
                     "edge_overlap": {"gap": "zero"}}
     })"},
    {"fig4",
     "Strip-geometry quasienergy spectrum with chiral edge modes and group velocities",
     R"({
       "task": "strip_spectrum",
       "description": "100-site y-torus with a 40-site inner domain",
       "ny": 100,
       "half_height": 20,
       "inside": ["pi/5", "4pi/5"],
       "outside": ["4pi/5", "pi/5"],
       "optics": {"preset": "setup_2d"},
       "kx_points": 256
     })"},
    {"fig5a",
     "Decoherence-free droplet-island transport: contour-band population, front "
     "trajectory, snapshots",
     R"({
       "task": "droplet",
       "description": "2D droplet island, unitary evolution",
       "seed": 1,
       "steps": 400,
       "inside": ["pi/5", "4pi/5"],
       "outside": ["4pi/5", "pi/5"],
       "optics": {"preset": "setup_2d"},
       "initial": {"site": [-15, 0], "spin": "down"},
       "noise": {"channel": "none"},
       "snapshots": [100, 200, 300, 400]
     })"},
    {"fig5b",
     "Droplet-island transport under spin decoherence p_S = 0.05 (trajectory ensemble)",
     R"({
       "task": "droplet",
       "description": "2D droplet island under spin decoherence",
       "seed": 1,
       "steps": 400,
       "inside": ["pi/5", "4pi/5"],
       "outside": ["4pi/5", "pi/5"],
       "optics": {"preset": "setup_2d"},
       "initial": {"site": [-15, 0], "spin": "down"},
       "noise": {"channel": "spin", "probability": 0.05, "trajectories": 2000},
       "snapshots": [100, 200, 300, 400]
     })"},
    {"fig6",
     "Edge-state population decay Pi(n) under stroboscopic spin decoherence, measured "
     "against the analytic rate",
     R"({
       "task": "edge_decay",
       "description": "Pi(n) for the 0-gap wall state over a p_S grid",
       "geometry": {"extent": [201], "boundary": "periodic"},
       "field": {"type": "wall_1d", "left": ["-pi/2", "pi/4"], "right": ["-pi/2", "3pi/4"],
                 "optics": {"preset": "setup_2d"}},
       "gap": "zero",
       "channel": "spin",
       "probabilities": [0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
       "n_max": 100
     })"},
    {"fig7",
     "Edge-state RMS size and initial-site overlap versus the diffraction ratio a/R_A",
     R"({
       "task": "edge_size_sweep",
       "description": "wall-state size against optical resolution",
       "ratios": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.25, 1.3,
                  1.4, 1.5, 1.6, 1.8, 2.0, 2.2, 2.5],
       "n_sites": 201,
       "profiles": ["setup_1d", "setup_2d"]
     })"},
};

json load_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + origin + ": " + e.what());
    }
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return load_json_text(ss.str(), "'" + path.string() + "'");
}

std::filesystem::path resolve_output_dir(const Plan& plan, const ScenarioOverrides& overrides,
                                         const std::string& stem) {
    if (overrides.output_dir) return *overrides.output_dir;
    if (plan.output_dir) return *plan.output_dir;
    if (const char* env = std::getenv(output_dir_env); env && *env)
        return std::filesystem::path(env) / stem;
    return std::filesystem::path("dtqw_out") / stem;
}

std::filesystem::path run_parsed(json cfg, const std::string& stem,
                                 const ScenarioOverrides& overrides) {
    if (overrides.seed) cfg["seed"] = *overrides.seed;
    if (overrides.threads) cfg["threads"] = *overrides.threads;
    Plan plan = parse_scenario(cfg);

    RunContext ctx;
    ctx.dir = resolve_output_dir(plan, overrides, stem);
    ensure_directory(ctx.dir);

    const auto t0 = std::chrono::steady_clock::now();
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, WalkPlan>)
                execute_walk(body, plan, ctx);
            else if constexpr (std::is_same_v<T, BandsPlan>)
                execute_bands(body, ctx);
            else if constexpr (std::is_same_v<T, PhaseDiagramPlan>)
                execute_phase_diagram(body, ctx);
            else if constexpr (std::is_same_v<T, GapScanPlan>)
                execute_gap_scan(body, ctx);
            else if constexpr (std::is_same_v<T, StripPlan>)
                execute_strip(body, ctx);
            else if constexpr (std::is_same_v<T, DropletPlan>)
                execute_droplet(body, ctx);
            else if constexpr (std::is_same_v<T, DecayPlan>)
                execute_decay(body, ctx);
            else
                execute_size_sweep(body, ctx);
        },
        plan.body);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    const std::string canonical = cfg.dump();
    manifest["task"] = plan.task;
    manifest["config_hash"] = hex_digest(fnv1a_64(canonical));
    manifest["seed"] = plan.seed;
    manifest["threads"] = plan.threads;
    manifest["versions"] = {{"dtqw", version_string()},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                                  "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"compiler", __VERSION__}};
    manifest["wall_clock_seconds"] = elapsed;
    manifest["outputs"] = ctx.outputs;
    manifest["config"] = cfg;
    auto os = open_output(ctx.dir / "manifest.json");
    os << manifest.dump(2) << '\n';
    return ctx.dir;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const PresetEntry& p : kPresets) out.push_back({p.name, p.description});
    return out;
}

const std::string& preset_config_text(const std::string& name) {
    static const std::map<std::string, std::string> texts = [] {
        std::map<std::string, std::string> m;
        for (const PresetEntry& p : kPresets) m[p.name] = p.config;
        return m;
    }();
    const auto it = texts.find(name);
    if (it == texts.end()) {
        std::string known;
        for (const PresetEntry& e : kPresets) known += std::string(" ") + e.name;
        throw ConfigError("unknown preset '" + name + "' (available:" + known + ")");
    }
    return it->second;
}

std::string validate_scenario_file(const std::filesystem::path& path) {
    const Plan plan = parse_scenario(load_json_file(path));
    return plan.task;
}

std::filesystem::path run_scenario_file(const std::filesystem::path& path,
                                        const ScenarioOverrides& overrides) {
    return run_parsed(load_json_file(path), path.stem().string(), overrides);
}

std::filesystem::path run_scenario_text(const std::string& json_text, const std::string& origin,
                                        const ScenarioOverrides& overrides) {
    return run_parsed(load_json_text(json_text, origin), origin, overrides);
}

std::filesystem::path run_preset(const std::string& name, const ScenarioOverrides& overrides) {
    return run_parsed(load_json_text(preset_config_text(name), "preset '" + name + "'"), name,
                      overrides);
}

}  // namespace dtqw
