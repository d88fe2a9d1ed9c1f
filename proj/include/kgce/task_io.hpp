#pragma once

#include "kgce/json_util.hpp"
#include "kgce/task_graph.hpp"

#include <filesystem>
#include <string_view>

namespace kgce {

inline constexpr std::string_view kTaskSchema = "kgce-task/1";

nlohmann::json checker_to_json(const CheckerRef& checker);
CheckerRef checker_from_json(const nlohmann::json& doc, const std::string& path);

nlohmann::json task_to_json(const TaskSpec& task);

/// Parses and validates (schema, then DAG structure). Structural problems
/// are reported as InvalidTask carrying the validation summary.
TaskSpec task_from_json(const nlohmann::json& doc, const std::string& path = "$");

TaskSpec load_task(const std::filesystem::path& file);
void save_task(const std::filesystem::path& file, const TaskSpec& task);

/// Every `*.json` under `dir`, sorted by file name.
std::vector<TaskSpec> load_task_dir(const std::filesystem::path& dir);

} // namespace kgce
