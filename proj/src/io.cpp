#include "dtqw/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <system_error>

#include "dtqw/coin_field.hpp"
#include "dtqw/errors.hpp"

namespace dtqw {

namespace {

/// Full-string double parse; rejects trailing garbage and non-finite values.
double parse_number(const std::string& s, const std::string& context) {
    if (s.empty()) throw ConfigError("empty number in angle '" + context + "'");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError("malformed number '" + s + "' in angle '" + context + "'");
    return v;
}

}  // namespace

double parse_angle(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ConfigError("empty angle string");

    const std::size_t p = s.find("pi");
    if (p == std::string::npos) return parse_number(s, text);

    std::string coef_part = s.substr(0, p);
    std::string rest = s.substr(p + 2);
    if (!coef_part.empty() && coef_part.back() == '*') coef_part.pop_back();

    double coef = 1.0;
    if (coef_part == "-")
        coef = -1.0;
    else if (!coef_part.empty() && coef_part != "+")
        coef = parse_number(coef_part, text);

    double denom = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/')
            throw ConfigError("malformed angle '" + text + "': expected '/denominator' after pi");
        denom = parse_number(rest.substr(1), text);
        if (denom == 0.0) throw ConfigError("zero denominator in angle '" + text + "'");
    }
    return coef * pi / denom;
}

std::uint64_t fnv1a_64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex_digest(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string version_string() {
#ifdef DTQW_VERSION_STRING
    return DTQW_VERSION_STRING;
#else
    return "0.0.0";
#endif
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file '" + path.string() + "'");
    return os;
}

}  // namespace dtqw
