#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dtqw/errors.hpp"
#include "dtqw/io.hpp"
#include "dtqw/scenario.hpp"

namespace {

dtqw::ScenarioOverrides make_overrides(const std::optional<std::string>& out,
                                       const std::optional<std::uint64_t>& seed,
                                       const std::optional<int>& threads) {
    dtqw::ScenarioOverrides o;
    o.output_dir = out;
    o.seed = seed;
    o.threads = threads;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time quantum walk engine: bands, invariants, edge states, "
                 "decoherence"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dtqw ") + dtqw::version_string());

    std::string config_path;
    std::string preset_name;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    CLI::App* run = app.add_subcommand("run", "run a scenario config file");
    run->add_option("config", config_path, "JSON scenario file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config and environment)");
    run->add_option("--seed", seed, "override the trajectory seed");
    run->add_option("--threads", threads, "cap worker threads for trajectory ensembles");

    CLI::App* preset = app.add_subcommand("preset", "run a bundled scenario by name");
    preset->add_option("name", preset_name, "preset name (see list-presets)")->required();
    preset->add_option("--out", out_dir, "output directory");
    preset->add_option("--seed", seed, "override the trajectory seed");
    preset->add_option("--threads", threads, "cap worker threads for trajectory ensembles");

    CLI::App* list = app.add_subcommand("list-presets", "list bundled scenarios");

    CLI::App* validate = app.add_subcommand("validate", "parse and check a config, run nothing");
    validate->add_option("config", config_path, "JSON scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto dir =
                dtqw::run_scenario_file(config_path, make_overrides(out_dir, seed, threads));
            std::cout << "wrote " << dir.string() << "\n";
        } else if (preset->parsed()) {
            const auto dir =
                dtqw::run_preset(preset_name, make_overrides(out_dir, seed, threads));
            std::cout << "wrote " << dir.string() << "\n";
        } else if (list->parsed()) {
            for (const dtqw::PresetInfo& p : dtqw::list_presets())
                std::cout << p.name << "\t" << p.description << "\n";
        } else if (validate->parsed()) {
            const std::string task = dtqw::validate_scenario_file(config_path);
            std::cout << "ok: " << config_path << " (task " << task << ")\n";
        }
    } catch (const dtqw::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const dtqw::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
