#include "kgce/json_util.hpp"

#include "kgce/error.hpp"

#include <fstream>
#include <sstream>

namespace kgce::json_util {

json parse(std::istream& in, std::string_view what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

json read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return parse(in, path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string child(const std::string& path, std::string_view key) { return path + "." + std::string(key); }

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_schema(const json& doc, std::string_view schema, const std::string& path) {
    if (!doc.is_object()) throw SchemaViolation(path, "expected an object");
    auto it = doc.find("schema");
    if (it == doc.end() || !it->is_string() || it->get<std::string>() != schema) {
        throw SchemaViolation(child(path, "schema"), "expected \"" + std::string(schema) + "\"");
    }
}

const json& require(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) throw SchemaViolation(path, "expected an object");
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw SchemaViolation(child(path, key), "required field missing");
    return *it;
}

std::string require_string(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) throw SchemaViolation(child(path, key), "expected a string");
    return v.get<std::string>();
}

std::string optional_string(const json& obj, std::string_view key, const std::string& path,
                            std::string fallback) {
    if (!obj.contains(std::string(key))) return fallback;
    return require_string(obj, key, path);
}

long long require_int(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_integer()) throw SchemaViolation(child(path, key), "expected an integer");
    return v.get<long long>();
}

long long optional_int(const json& obj, std::string_view key, const std::string& path, long long fallback) {
    if (!obj.contains(std::string(key))) return fallback;
    return require_int(obj, key, path);
}

double require_number(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) throw SchemaViolation(child(path, key), "expected a number");
    return v.get<double>();
}

bool optional_bool(const json& obj, std::string_view key, const std::string& path, bool fallback) {
    if (!obj.contains(std::string(key))) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_boolean()) throw SchemaViolation(child(path, key), "expected a boolean");
    return v.get<bool>();
}

const json& require_array(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_array()) throw SchemaViolation(child(path, key), "expected an array");
    return v;
}

const json& optional_array(const json& obj, std::string_view key, const std::string& path) {
    static const json empty = json::array();
    if (!obj.is_object() || !obj.contains(std::string(key))) return empty;
    return require_array(obj, key, path);
}

} // namespace kgce::json_util
