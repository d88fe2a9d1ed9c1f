#pragma once

#include "json.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace kgce::json_util {

using nlohmann::json;

/// Parses a whole document; syntax errors become ParseError.
json parse(std::istream& in, std::string_view what);
json parse(std::string_view text, std::string_view what);
json read_file(const std::filesystem::path& path);

/// Writes `text` atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view text);

/// Canonical on-disk rendering: two-space indent, trailing newline.
std::string dump(const json& doc);

std::string child(const std::string& path, std::string_view key);
std::string index(const std::string& path, std::size_t i);

void expect_schema(const json& doc, std::string_view schema, const std::string& path = "$");
const json& require(const json& obj, std::string_view key, const std::string& path);
std::string require_string(const json& obj, std::string_view key, const std::string& path);
std::string optional_string(const json& obj, std::string_view key, const std::string& path,
                            std::string fallback = {});
long long require_int(const json& obj, std::string_view key, const std::string& path);
long long optional_int(const json& obj, std::string_view key, const std::string& path, long long fallback);
double require_number(const json& obj, std::string_view key, const std::string& path);
bool optional_bool(const json& obj, std::string_view key, const std::string& path, bool fallback);
const json& require_array(const json& obj, std::string_view key, const std::string& path);
const json& optional_array(const json& obj, std::string_view key, const std::string& path);

} // namespace kgce::json_util
