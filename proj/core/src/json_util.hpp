#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "voltpath/errors.hpp"

namespace voltpath::detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write file: " + path.string());
    }
    out << text;
}

// Round-trip-exact decimal rendering for file output.
inline std::string format_full(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ValidationError(what + ": not valid JSON");
    }
    return doc;
}

inline double require_number(const nlohmann::json& doc, const char* field) {
    if (!doc.contains(field) || !doc[field].is_number()) {
        throw ValidationError(std::string(field) + ": missing or not a number");
    }
    return doc[field].get<double>();
}

inline double number_or(const nlohmann::json& doc, const char* field, double fallback) {
    if (!doc.contains(field)) {
        return fallback;
    }
    if (!doc[field].is_number()) {
        throw ValidationError(std::string(field) + ": not a number");
    }
    return doc[field].get<double>();
}

}  // namespace voltpath::detail
