#pragma once

#include "kgce/json_util.hpp"
#include "kgce/task_graph.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kKbSchema = "kgce-kb/1";
inline constexpr std::size_t kDefaultKbBudget = 4000;
inline constexpr std::string_view kTruncationMarker = "[knowledge truncated]\n";

/// Axis-aligned box in the device's abstract pixel space.
struct Box {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(int px, int py) const { return px >= x && py >= y && px < x + width && py < y + height; }
    bool contains(const Box& inner) const {
        return inner.x >= x && inner.y >= y && inner.x + inner.width <= x + width &&
               inner.y + inner.height <= y + height;
    }
    bool operator==(const Box&) const = default;
};

struct ElementRecord {
    std::string element_id;
    Box position;
    std::string description;
    std::vector<ElementRecord> sub_elements;

    bool operator==(const ElementRecord&) const = default;
};

struct PageRecord {
    std::string page_id;
    std::string description;
    std::vector<ElementRecord> elements;

    bool operator==(const PageRecord&) const = default;
};

struct KnowledgePackage {
    std::string package_name;
    std::vector<std::string> aliases;
    Platform platform = Platform::mobile;
    std::vector<PageRecord> pages;

    bool operator==(const KnowledgePackage&) const = default;
};

using KnowledgeBase = std::vector<KnowledgePackage>;

/// Throws ParseError or SchemaViolation (with a path to the field).
KnowledgeBase load_kb(std::istream& source);
KnowledgeBase load_kb_file(const std::filesystem::path& file);
KnowledgeBase kb_from_json(const nlohmann::json& doc);

nlohmann::json kb_to_json(const KnowledgeBase& kb);
void save_kb(std::ostream& out, const KnowledgeBase& kb);

/// Lower-cases ASCII and collapses whitespace runs into one space.
std::string normalize_for_match(std::string_view text);

/// Names of packages whose name or alias occurs in the instruction, in KB
/// order. Empty means no knowledge is injected.
std::vector<std::string> decide_invocation(std::string_view task_instruction, const KnowledgeBase& kb);

/// Packages from `kb` named by `names`, in KB order.
KnowledgeBase select_packages(const KnowledgeBase& kb, const std::vector<std::string>& names);

/// Text rendering for prompt injection. Truncates at element granularity
/// and appends kTruncationMarker when anything was dropped. The first
/// package header is always kept, so output can exceed `budget` only when
/// that header alone does.
std::string render_prompt_fragment(const KnowledgeBase& packages, std::size_t budget = kDefaultKbBudget);

} // namespace kgce
