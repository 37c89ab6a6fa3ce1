#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <sstream>

#include "dtqw/bloch.hpp"
#include "dtqw/coin_field.hpp"
#include "dtqw/edge.hpp"
#include "dtqw/errors.hpp"
#include "dtqw/io.hpp"
#include "dtqw/scenario.hpp"

namespace py = pybind11;
using namespace dtqw;

namespace {

ScenarioOverrides overrides_from(const py::object& out, const py::object& seed,
                                 const py::object& threads) {
    ScenarioOverrides o;
    if (!out.is_none()) o.output_dir = out.cast<std::string>();
    if (!seed.is_none()) o.seed = seed.cast<std::uint64_t>();
    if (!threads.is_none()) o.threads = threads.cast<int>();
    return o;
}

ChiralFrame frame_from(const std::string& name) {
    if (name == "prime") return ChiralFrame::frame_prime;
    if (name == "double_prime") return ChiralFrame::frame_double_prime;
    if (name == "sigma_z") return ChiralFrame::sigma_z;
    throw ConfigError("unknown chiral frame '" + name +
                      "' (expected prime, double_prime, sigma_z)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "discrete-time quantum walk engine: bands, invariants, edge states, decoherence";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GapClosedError>(m, "GapClosedError", PyExc_ArithmeticError);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

    m.def("version", &version_string, "library version string");
    m.def("parse_angle", &parse_angle, py::arg("text"),
          "parse an angle written as a rational multiple of pi or plain radians");

    // Homogeneous band structure of a named protocol.
    m.def(
        "bands",
        [](double theta1, double theta2, int k_points, const std::string& protocol) {
            const QuasienergySpectrum s =
                bloch_bands(named_protocol(protocol), theta1, theta2, k_points);
            py::dict out;
            out["k"] = s.k;
            out["epsilon"] = s.epsilon;
            out["gap0"] = s.gap0;
            out["gap_pi"] = s.gap_pi;
            return out;
        },
        py::arg("theta1"), py::arg("theta2"), py::arg("k_points") = 256,
        py::arg("protocol") = "split_step_1d");

    m.def(
        "winding",
        [](const std::string& frame, double theta1, double theta2, int k_points) {
            return winding_number(frame_from(frame), theta1, theta2, k_points);
        },
        py::arg("frame"), py::arg("theta1"), py::arg("theta2"), py::arg("k_points") = 256,
        "eigenspinor winding number in a chiral time frame");

    m.def(
        "invariants",
        [](double theta1, double theta2, int k_points) {
            return invariants_1d(theta1, theta2, k_points);
        },
        py::arg("theta1"), py::arg("theta2"), py::arg("k_points") = 256,
        "the invariant pair (nu_0, nu_pi) of the 1D split-step walk");

    m.def(
        "wall_state_json",
        [](int n_sites, const std::string& gap, double a_over_ra) {
            const LatticeGeometry g = LatticeGeometry::line(n_sites);
            const OpticsConfig optics = a_over_ra > 0.0 ? OpticsConfig::from_ratio(a_over_ra)
                                                        : OpticsConfig::setup_2d();
            const CoinField f = wall_field_1d(g, {-pi / 2.0, pi / 4.0},
                                              {-pi / 2.0, 3.0 * pi / 4.0}, optics);
            const GapCenter gc = gap == "pi" ? GapCenter::pi : GapCenter::zero;
            auto states = find_edge_states(split_step_1d(), f, gc);
            if (states.empty()) throw ConfigError("no edge state in the requested gap");
            std::size_t best = 0;
            for (std::size_t i = 1; i < states.size(); ++i)
                if (std::fabs(states[i].center) < std::fabs(states[best].center)) best = i;
            std::ostringstream os;
            write_edge_state_json(os, states[best]);
            return os.str();
        },
        py::arg("n_sites") = 201, py::arg("gap") = "zero", py::arg("a_over_ra") = 0.0,
        "JSON summary of the domain-wall edge state on the standard two-phase ring");

    // Scenario layer: the same entry points the command-line tool uses.
    m.def("list_presets", [] {
        py::list out;
        for (const PresetInfo& p : list_presets()) out.append(py::make_tuple(p.name, p.description));
        return out;
    });
    m.def("preset_config", [](const std::string& name) { return preset_config_text(name); },
          py::arg("name"));
    m.def(
        "validate_file",
        [](const std::filesystem::path& path) { return validate_scenario_file(path); },
        py::arg("path"), "parse and check a scenario file; returns its task name");
    m.def(
        "run_file",
        [](const std::filesystem::path& path, const py::object& out, const py::object& seed,
           const py::object& threads) {
            return run_scenario_file(path, overrides_from(out, seed, threads));
        },
        py::arg("path"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        py::arg("threads") = py::none());
    m.def(
        "run_text",
        [](const std::string& text, const std::string& origin, const py::object& out,
           const py::object& seed, const py::object& threads) {
            return run_scenario_text(text, origin, overrides_from(out, seed, threads));
        },
        py::arg("text"), py::arg("origin") = "inline", py::arg("out") = py::none(),
        py::arg("seed") = py::none(), py::arg("threads") = py::none());
    m.def(
        "run_preset",
        [](const std::string& name, const py::object& out, const py::object& seed,
           const py::object& threads) {
            return run_preset(name, overrides_from(out, seed, threads));
        },
        py::arg("name"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        py::arg("threads") = py::none());
}
