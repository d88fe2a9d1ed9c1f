#include "kgce/task_io.hpp"

#include "kgce/error.hpp"

#include <algorithm>

namespace kgce {

using json_util::child;
using json_util::index;
using nlohmann::json;

json checker_to_json(const CheckerRef& checker) {
    json args = json::object();
    for (const auto& [k, v] : checker.args) args[k] = v;
    return {{"name", checker.name}, {"args", args}};
}

CheckerRef checker_from_json(const json& doc, const std::string& path) {
    CheckerRef out;
    out.name = json_util::require_string(doc, "name", path);
    if (doc.contains("args")) {
        const json& args = doc.at("args");
        if (!args.is_object()) throw SchemaViolation(child(path, "args"), "expected an object");
        for (const auto& [k, v] : args.items()) {
            if (!v.is_string()) throw SchemaViolation(child(child(path, "args"), k), "expected a string");
            out.args[k] = v.get<std::string>();
        }
    }
    return out;
}

json task_to_json(const TaskSpec& task) {
    json nodes = json::array();
    for (const auto& n : task.nodes) {
        nodes.push_back({{"id", n.id},
                         {"description", n.description},
                         {"key_step", n.key_step},
                         {"checker", checker_to_json(n.checker)}});
    }
    json edges = json::array();
    for (const auto& e : task.edges) edges.push_back({{"from", e.from}, {"to", e.to}});
    json platforms = json::array();
    for (auto p : task.platforms) platforms.push_back(std::string(to_string(p)));

    return {{"schema", std::string(kTaskSchema)},
            {"task_id", task.task_id},
            {"instruction", task.instruction},
            {"platforms", platforms},
            {"max_steps", task.max_steps},
            {"nodes", nodes},
            {"edges", edges}};
}

TaskSpec task_from_json(const json& doc, const std::string& path) {
    json_util::expect_schema(doc, kTaskSchema, path);
    TaskSpec task;
    task.task_id = json_util::require_string(doc, "task_id", path);
    if (task.task_id.empty()) throw SchemaViolation(child(path, "task_id"), "must be non-empty");
    task.instruction = json_util::require_string(doc, "instruction", path);
    task.max_steps = static_cast<int>(json_util::optional_int(doc, "max_steps", path, kDefaultMaxSteps));

    const json& platforms = json_util::require_array(doc, "platforms", path);
    if (platforms.empty()) throw SchemaViolation(child(path, "platforms"), "at least one platform required");
    for (std::size_t i = 0; i < platforms.size(); ++i) {
        const auto p_path = index(child(path, "platforms"), i);
        if (!platforms[i].is_string()) throw SchemaViolation(p_path, "expected a string");
        auto p = parse_platform(platforms[i].get<std::string>());
        if (!p) throw SchemaViolation(p_path, "expected \"desktop\" or \"mobile\"");
        if (std::find(task.platforms.begin(), task.platforms.end(), *p) != task.platforms.end()) {
            throw SchemaViolation(p_path, "duplicate platform");
        }
        task.platforms.push_back(*p);
    }

    const json& nodes = json_util::require_array(doc, "nodes", path);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto n_path = index(child(path, "nodes"), i);
        SubGoalNode node;
        node.id = json_util::require_string(nodes[i], "id", n_path);
        if (node.id.empty()) throw SchemaViolation(child(n_path, "id"), "must be non-empty");
        node.description = json_util::optional_string(nodes[i], "description", n_path);
        node.key_step = json_util::optional_bool(nodes[i], "key_step", n_path, false);
        node.checker = checker_from_json(json_util::require(nodes[i], "checker", n_path), child(n_path, "checker"));
        task.nodes.push_back(std::move(node));
    }

    const json& edges = json_util::optional_array(doc, "edges", path);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto e_path = index(child(path, "edges"), i);
        task.edges.push_back({json_util::require_string(edges[i], "from", e_path),
                              json_util::require_string(edges[i], "to", e_path)});
    }

    auto report = validate_dag(task);
    if (!report.ok()) throw InvalidTask("task '" + task.task_id + "': " + report.summary());
    return task;
}

TaskSpec load_task(const std::filesystem::path& file) {
    return task_from_json(json_util::read_file(file), file.string());
}

void save_task(const std::filesystem::path& file, const TaskSpec& task) {
    json_util::write_file(file, json_util::dump(task_to_json(task)));
}

std::vector<TaskSpec> load_task_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TaskSpec> tasks;
    for (const auto& f : files) tasks.push_back(load_task(f));
    return tasks;
}

} // namespace kgce
