#pragma once

#include "kgce/json_util.hpp"
#include "kgce/task_graph.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kTemplateSchema = "kgce-template/1";

/// Sub-goal with `{placeholder}` slots in its description and checker args.
struct SubGoalPattern {
    std::string id;
    std::string description;
    bool key_step = true;
    CheckerRef checker;
};

struct TaskTemplate {
    std::string template_id;
    std::string pattern;
    std::vector<SubGoalPattern> subgoals;
    std::set<std::string> placeholder_schema;
    Platform platform = Platform::mobile;
    int max_steps = kDefaultMaxSteps;
};

using BindingSet = std::map<std::string, std::string>;

/// Placeholder names in order of appearance (with repeats). `{{` and `}}`
/// are literal braces. Throws InvalidTemplate on malformed syntax.
std::vector<std::string> placeholders_in(std::string_view pattern);

/// Throws MissingBinding for a placeholder with no binding.
std::string substitute(std::string_view pattern, const BindingSet& bindings);

/// Throws InvalidTemplate.
void validate_template(const TaskTemplate& tmpl);

/// Sub-goals become a chain in declaration order.
TaskSpec instantiate(const TaskTemplate& tmpl, const BindingSet& bindings, const std::string& task_id);

struct NodeRef {
    std::size_t part = 0;
    std::string node_id;
};

struct BridgeEdge {
    NodeRef from;
    NodeRef to;
};

/// Part `i`'s node `n` becomes `p<i>.n`. With no explicit bridges every sink
/// of part i is linked to every source of part i+1. `max_steps` is the sum
/// over the parts.
TaskSpec compose(const std::vector<TaskSpec>& parts, const std::vector<BridgeEdge>& bridges,
                 const std::string& task_id);

std::string namespaced_id(std::size_t part, std::string_view node_id);

nlohmann::json template_to_json(const TaskTemplate& tmpl);
TaskTemplate template_from_json(const nlohmann::json& doc, const std::string& path = "$");

/// Templates keyed by template_id, loaded from every `*.json` in `dir`.
std::map<std::string, TaskTemplate> load_template_dir(const std::filesystem::path& dir);

/// Expands a bindings document (`instances` array of plain or composed
/// instantiations) against `templates`.
std::vector<TaskSpec> synthesize(const std::map<std::string, TaskTemplate>& templates,
                                 const nlohmann::json& bindings_doc);

} // namespace kgce
