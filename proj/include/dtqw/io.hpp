#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

namespace dtqw {

/// Parses an angle given as a rational multiple of pi ("pi/5", "-3pi/4",
/// "2pi", "0.5pi", "3*pi/4") or as plain radians ("1.5708"). Rational forms
/// avoid decimal drift in configuration files. Throws ConfigError.
double parse_angle(const std::string& text);

/// 64-bit FNV-1a over a byte string; fingerprints canonicalized configs.
std::uint64_t fnv1a_64(std::string_view bytes);

/// Lower-case 16-digit hex rendering of a 64-bit hash.
std::string hex_digest(std::uint64_t h);

/// Library version "major.minor.patch".
std::string version_string();

/// Creates `dir` (with parents) when absent; throws ConfigError on failure.
void ensure_directory(const std::filesystem::path& dir);

/// Opens `path` for writing; throws ConfigError naming the path on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace dtqw
