#include "kgce/knowledge_base.hpp"

#include "kgce/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace kgce {

using json_util::child;
using json_util::index;
using nlohmann::json;

namespace {

Box box_from_json(const json& doc, const std::string& path) {
    Box b;
    b.x = static_cast<int>(json_util::require_int(doc, "x", path));
    b.y = static_cast<int>(json_util::require_int(doc, "y", path));
    b.width = static_cast<int>(json_util::require_int(doc, "width", path));
    b.height = static_cast<int>(json_util::require_int(doc, "height", path));
    if (b.x < 0) throw SchemaViolation(child(path, "x"), "origin must be non-negative");
    if (b.y < 0) throw SchemaViolation(child(path, "y"), "origin must be non-negative");
    if (b.width <= 0) throw SchemaViolation(child(path, "width"), "width must be positive");
    if (b.height <= 0) throw SchemaViolation(child(path, "height"), "height must be positive");
    return b;
}

json box_to_json(const Box& b) { return {{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}}; }

ElementRecord element_from_json(const json& doc, const std::string& path, std::set<std::string>& page_ids) {
    ElementRecord e;
    e.element_id = json_util::require_string(doc, "element_id", path);
    if (e.element_id.empty()) throw SchemaViolation(child(path, "element_id"), "must be non-empty");
    if (!page_ids.insert(e.element_id).second) {
        throw SchemaViolation(child(path, "element_id"), "duplicate element id '" + e.element_id + "' in page");
    }
    e.position = box_from_json(json_util::require(doc, "position", path), child(path, "position"));
    e.description = json_util::optional_string(doc, "description", path);
    const json& subs = json_util::optional_array(doc, "sub_elements", path);
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto sub_path = index(child(path, "sub_elements"), i);
        auto sub = element_from_json(subs[i], sub_path, page_ids);
        if (!e.position.contains(sub.position)) {
            throw SchemaViolation(child(sub_path, "position"), "sub-element box lies outside its parent");
        }
        e.sub_elements.push_back(std::move(sub));
    }
    return e;
}

json element_to_json(const ElementRecord& e) {
    json doc = {{"element_id", e.element_id}, {"position", box_to_json(e.position)}, {"description", e.description}};
    if (!e.sub_elements.empty()) {
        json subs = json::array();
        for (const auto& s : e.sub_elements) subs.push_back(element_to_json(s));
        doc["sub_elements"] = subs;
    }
    return doc;
}

// Newlines and backslashes would break the line-oriented rendering.
std::string escape_line(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else if (c == '\r') out += "\\r";
        else out.push_back(c);
    }
    return out;
}

void element_units(const ElementRecord& e, int depth, std::vector<std::string>& units) {
    std::ostringstream os;
    os << std::string(static_cast<std::size_t>(4 + 2 * depth), ' ') << "- " << e.element_id << " @ (" << e.position.x
       << "," << e.position.y << "," << e.position.width << "," << e.position.height
       << "): " << escape_line(e.description) << "\n";
    units.push_back(os.str());
    for (const auto& s : e.sub_elements) element_units(s, depth + 1, units);
}

} // namespace

KnowledgeBase kb_from_json(const json& doc) {
    json_util::expect_schema(doc, kKbSchema);
    const json& packages = json_util::require_array(doc, "packages", "$");
    KnowledgeBase kb;
    std::map<std::string, std::string> names_seen;  // normalized name -> owning package
    for (std::size_t i = 0; i < packages.size(); ++i) {
        const auto p_path = index("$.packages", i);
        KnowledgePackage pkg;
        pkg.package_name = json_util::require_string(packages[i], "package_name", p_path);
        if (normalize_for_match(pkg.package_name).empty()) {
            throw SchemaViolation(child(p_path, "package_name"), "must be non-empty");
        }
        auto platform = parse_platform(json_util::require_string(packages[i], "platform", p_path));
        if (!platform) throw SchemaViolation(child(p_path, "platform"), "expected \"desktop\" or \"mobile\"");
        pkg.platform = *platform;

        std::set<std::string> own;
        own.insert(normalize_for_match(pkg.package_name));
        const json& aliases = json_util::optional_array(packages[i], "aliases", p_path);
        for (std::size_t a = 0; a < aliases.size(); ++a) {
            auto a_path = index(child(p_path, "aliases"), a);
            if (!aliases[a].is_string()) throw SchemaViolation(a_path, "expected a string");
            auto alias = aliases[a].get<std::string>();
            if (normalize_for_match(alias).empty()) throw SchemaViolation(a_path, "alias must be non-empty");
            if (std::find(pkg.aliases.begin(), pkg.aliases.end(), alias) != pkg.aliases.end()) {
                throw SchemaViolation(a_path, "duplicate alias '" + alias + "'");
            }
            own.insert(normalize_for_match(alias));
            pkg.aliases.push_back(std::move(alias));
        }
        for (const auto& name : own) {
            auto [it, inserted] = names_seen.emplace(name, pkg.package_name);
            if (!inserted) {
                throw SchemaViolation(child(p_path, "aliases"),
                                      "name '" + name + "' collides with package '" + it->second + "'");
            }
        }

        std::set<std::string> page_ids;
        const json& pages = json_util::optional_array(packages[i], "pages", p_path);
        for (std::size_t pg = 0; pg < pages.size(); ++pg) {
            auto pg_path = index(child(p_path, "pages"), pg);
            PageRecord page;
            page.page_id = json_util::require_string(pages[pg], "page_id", pg_path);
            if (page.page_id.empty()) throw SchemaViolation(child(pg_path, "page_id"), "must be non-empty");
            if (!page_ids.insert(page.page_id).second) {
                throw SchemaViolation(child(pg_path, "page_id"), "duplicate page id '" + page.page_id + "'");
            }
            page.description = json_util::optional_string(pages[pg], "description", pg_path);
            std::set<std::string> element_ids;
            const json& elements = json_util::optional_array(pages[pg], "elements", pg_path);
            for (std::size_t e = 0; e < elements.size(); ++e) {
                page.elements.push_back(
                    element_from_json(elements[e], index(child(pg_path, "elements"), e), element_ids));
            }
            pkg.pages.push_back(std::move(page));
        }
        kb.push_back(std::move(pkg));
    }
    return kb;
}

KnowledgeBase load_kb(std::istream& source) { return kb_from_json(json_util::parse(source, "knowledge base")); }

KnowledgeBase load_kb_file(const std::filesystem::path& file) { return kb_from_json(json_util::read_file(file)); }

json kb_to_json(const KnowledgeBase& kb) {
    json packages = json::array();
    for (const auto& pkg : kb) {
        json pages = json::array();
        for (const auto& page : pkg.pages) {
            json elements = json::array();
            for (const auto& e : page.elements) elements.push_back(element_to_json(e));
            pages.push_back({{"page_id", page.page_id}, {"description", page.description}, {"elements", elements}});
        }
        packages.push_back({{"package_name", pkg.package_name},
                            {"aliases", pkg.aliases},
                            {"platform", std::string(to_string(pkg.platform))},
                            {"pages", pages}});
    }
    return {{"schema", std::string(kKbSchema)}, {"packages", packages}};
}

void save_kb(std::ostream& out, const KnowledgeBase& kb) { out << json_util::dump(kb_to_json(kb)); }

std::string normalize_for_match(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
    return out;
}

std::vector<std::string> decide_invocation(std::string_view task_instruction, const KnowledgeBase& kb) {
    const auto haystack = normalize_for_match(task_instruction);
    std::vector<std::string> matched;
    for (const auto& pkg : kb) {
        bool hit = haystack.find(normalize_for_match(pkg.package_name)) != std::string::npos;
        for (std::size_t i = 0; !hit && i < pkg.aliases.size(); ++i) {
            hit = haystack.find(normalize_for_match(pkg.aliases[i])) != std::string::npos;
        }
        if (hit) matched.push_back(pkg.package_name);
    }
    return matched;
}

KnowledgeBase select_packages(const KnowledgeBase& kb, const std::vector<std::string>& names) {
    KnowledgeBase out;
    for (const auto& pkg : kb) {
        if (std::find(names.begin(), names.end(), pkg.package_name) != names.end()) out.push_back(pkg);
    }
    return out;
}

std::string render_prompt_fragment(const KnowledgeBase& packages, std::size_t budget) {
    // Each unit is emitted whole or not at all.
    std::vector<std::string> units;
    for (const auto& pkg : packages) {
        std::string header = "Application: " + escape_line(pkg.package_name) + "\n";
        header += "  Platform: " + std::string(to_string(pkg.platform)) + "\n";
        for (const auto& alias : pkg.aliases) header += "  Alias: " + escape_line(alias) + "\n";
        units.push_back(std::move(header));
        for (const auto& page : pkg.pages) {
            units.push_back("  Page " + page.page_id + ": " + escape_line(page.description) + "\n");
            for (const auto& e : page.elements) element_units(e, 0, units);
        }
    }

    std::string out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (i > 0 && out.size() + units[i].size() > budget) {
            out += kTruncationMarker;
            return out;
        }
        out += units[i];
    }
    if (out.size() > budget) out += kTruncationMarker;
    return out;
}

} // namespace kgce
