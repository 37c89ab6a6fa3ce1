#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dtqw {

/// Environment variable naming the default root for scenario outputs.
inline constexpr const char* output_dir_env = "DTQW_OUTPUT_DIR";

struct PresetInfo {
    std::string name;
    std::string description;
};

/// The bundled figure presets, in canonical order.
std::vector<PresetInfo> list_presets();

/// JSON text of a bundled preset; throws ConfigError for unknown names.
const std::string& preset_config_text(const std::string& name);

/// Command-line overrides applied on top of a parsed config.
struct ScenarioOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

/// Parses and validates a scenario file without running it; returns the task
/// name. Unknown keys anywhere in the tree are errors, not warnings.
std::string validate_scenario_file(const std::filesystem::path& path);

/// Parses, validates, executes, and writes all artifacts (observable CSVs,
/// snapshots, a manifest JSON). Returns the output directory used.
std::filesystem::path run_scenario_file(const std::filesystem::path& path,
                                        const ScenarioOverrides& overrides = {});

/// Same, for in-memory config text; `origin` names the source in diagnostics
/// and output-directory defaults.
std::filesystem::path run_scenario_text(const std::string& json_text, const std::string& origin,
                                        const ScenarioOverrides& overrides = {});

std::filesystem::path run_preset(const std::string& name,
                                 const ScenarioOverrides& overrides = {});

}  // namespace dtqw
