#include "kgce/task_synthesis.hpp"

#include "kgce/error.hpp"
#include "kgce/task_io.hpp"

#include <algorithm>

namespace kgce {

using json_util::child;
using json_util::index;
using nlohmann::json;

namespace {

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Walks `pattern`, calling on_literal(char) and on_placeholder(name).
template <typename Lit, typename Ph>
void scan_pattern(std::string_view pattern, Lit&& on_literal, Ph&& on_placeholder) {
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '{') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '{') {
                on_literal('{');
                ++i;
                continue;
            }
            auto close = pattern.find('}', i + 1);
            if (close == std::string_view::npos) {
                throw InvalidTemplate("unclosed '{' at offset " + std::to_string(i) + " in \"" +
                                      std::string(pattern) + "\"");
            }
            auto name = pattern.substr(i + 1, close - i - 1);
            if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
                throw InvalidTemplate("bad placeholder name '{" + std::string(name) + "}' in \"" +
                                      std::string(pattern) + "\"");
            }
            on_placeholder(std::string(name));
            i = close;
        } else if (c == '}') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '}') {
                on_literal('}');
                ++i;
                continue;
            }
            throw InvalidTemplate("stray '}' at offset " + std::to_string(i) + " in \"" + std::string(pattern) +
                                  "\"");
        } else {
            on_literal(c);
        }
    }
}

std::vector<std::string> template_placeholders(const TaskTemplate& tmpl) {
    std::vector<std::string> all = placeholders_in(tmpl.pattern);
    auto add = [&](std::string_view text) {
        for (auto& p : placeholders_in(text)) all.push_back(std::move(p));
    };
    for (const auto& sg : tmpl.subgoals) {
        add(sg.id);
        add(sg.description);
        for (const auto& [_, v] : sg.checker.args) add(v);
    }
    return all;
}

} // namespace

std::vector<std::string> placeholders_in(std::string_view pattern) {
    std::vector<std::string> out;
    scan_pattern(pattern, [](char) {}, [&](std::string name) { out.push_back(std::move(name)); });
    return out;
}

std::string substitute(std::string_view pattern, const BindingSet& bindings) {
    std::string out;
    out.reserve(pattern.size());
    scan_pattern(
        pattern, [&](char c) { out.push_back(c); },
        [&](const std::string& name) {
            auto it = bindings.find(name);
            if (it == bindings.end()) throw MissingBinding(name);
            out += it->second;
        });
    return out;
}

void validate_template(const TaskTemplate& tmpl) {
    if (tmpl.template_id.empty()) throw InvalidTemplate("template_id must be non-empty");
    if (tmpl.subgoals.empty()) throw InvalidTemplate("template '" + tmpl.template_id + "' has no sub-goals");
    if (tmpl.max_steps < 1) throw InvalidTemplate("template '" + tmpl.template_id + "': max_steps must be >= 1");
    for (const auto& name : tmpl.placeholder_schema) {
        if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
            throw InvalidTemplate("template '" + tmpl.template_id + "': bad placeholder name '" + name + "'");
        }
    }
    for (const auto& name : template_placeholders(tmpl)) {
        if (!tmpl.placeholder_schema.count(name)) {
            throw InvalidTemplate("template '" + tmpl.template_id + "' uses undeclared placeholder '{" + name + "}'");
        }
    }
    std::set<std::string> ids;
    for (const auto& sg : tmpl.subgoals) {
        if (sg.id.empty()) throw InvalidTemplate("template '" + tmpl.template_id + "' has an empty sub-goal id");
        if (!ids.insert(sg.id).second) {
            throw InvalidTemplate("template '" + tmpl.template_id + "' repeats sub-goal id '" + sg.id + "'");
        }
    }
}

TaskSpec instantiate(const TaskTemplate& tmpl, const BindingSet& bindings, const std::string& task_id) {
    validate_template(tmpl);
    for (const auto& name : tmpl.placeholder_schema) {
        auto it = bindings.find(name);
        if (it == bindings.end() || it->second.empty()) throw MissingBinding(name);
    }
    for (const auto& [name, _] : bindings) {
        if (!tmpl.placeholder_schema.count(name)) throw UnknownPlaceholder(name);
    }

    TaskSpec task;
    task.task_id = task_id;
    task.instruction = substitute(tmpl.pattern, bindings);
    task.platforms = {tmpl.platform};
    task.max_steps = tmpl.max_steps;
    for (const auto& sg : tmpl.subgoals) {
        SubGoalNode node;
        node.id = substitute(sg.id, bindings);
        node.description = substitute(sg.description, bindings);
        node.key_step = sg.key_step;
        node.checker.name = sg.checker.name;
        for (const auto& [k, v] : sg.checker.args) node.checker.args[k] = substitute(v, bindings);
        if (!task.nodes.empty()) task.edges.push_back({task.nodes.back().id, node.id});
        task.nodes.push_back(std::move(node));
    }
    auto report = validate_dag(task);
    if (!report.ok()) throw InvalidTask("instantiated task '" + task_id + "': " + report.summary());
    return task;
}

std::string namespaced_id(std::size_t part, std::string_view node_id) {
    return "p" + std::to_string(part) + "." + std::string(node_id);
}

TaskSpec compose(const std::vector<TaskSpec>& parts, const std::vector<BridgeEdge>& bridges,
                 const std::string& task_id) {
    if (parts.empty()) throw InvalidTask("compose needs at least one part");

    TaskSpec out;
    out.task_id = task_id;
    out.max_steps = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const TaskSpec& part = parts[i];
        if (i) out.instruction += "; then ";
        out.instruction += part.instruction;
        out.max_steps += part.max_steps;
        for (auto p : part.platforms) {
            if (std::find(out.platforms.begin(), out.platforms.end(), p) == out.platforms.end()) {
                out.platforms.push_back(p);
            }
        }
        for (const auto& node : part.nodes) {
            SubGoalNode copy = node;
            copy.id = namespaced_id(i, node.id);
            out.nodes.push_back(std::move(copy));
        }
        for (const auto& e : part.edges) out.edges.push_back({namespaced_id(i, e.from), namespaced_id(i, e.to)});
    }

    if (bridges.empty()) {
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            for (const auto& sink : parts[i].sinks()) {
                for (const auto& source : parts[i + 1].sources()) {
                    out.edges.push_back({namespaced_id(i, sink), namespaced_id(i + 1, source)});
                }
            }
        }
    } else {
        auto resolve = [&](const NodeRef& ref) {
            if (ref.part >= parts.size()) {
                throw BadBridgeReference("bridge references part " + std::to_string(ref.part) + " but only " +
                                         std::to_string(parts.size()) + " parts exist");
            }
            if (!parts[ref.part].find_node(ref.node_id)) {
                throw BadBridgeReference("bridge references unknown node '" + ref.node_id + "' in part " +
                                         std::to_string(ref.part));
            }
            return namespaced_id(ref.part, ref.node_id);
        };
        for (const auto& b : bridges) out.edges.push_back({resolve(b.from), resolve(b.to)});
    }

    auto report = validate_dag(out);
    if (!report.ok()) {
        for (const auto& v : report.violations) {
            if (v.kind == Violation::Kind::cycle) throw CycleIntroduced("composed task '" + task_id + "': " + v.message);
        }
        throw InvalidTask("composed task '" + task_id + "': " + report.summary());
    }
    return out;
}

json template_to_json(const TaskTemplate& tmpl) {
    json subgoals = json::array();
    for (const auto& sg : tmpl.subgoals) {
        subgoals.push_back({{"id", sg.id},
                            {"description", sg.description},
                            {"key_step", sg.key_step},
                            {"checker", checker_to_json(sg.checker)}});
    }
    return {{"schema", std::string(kTemplateSchema)},
            {"template_id", tmpl.template_id},
            {"pattern", tmpl.pattern},
            {"platform", std::string(to_string(tmpl.platform))},
            {"max_steps", tmpl.max_steps},
            {"placeholders", json(std::vector<std::string>(tmpl.placeholder_schema.begin(),
                                                           tmpl.placeholder_schema.end()))},
            {"subgoals", subgoals}};
}

TaskTemplate template_from_json(const json& doc, const std::string& path) {
    json_util::expect_schema(doc, kTemplateSchema, path);
    TaskTemplate tmpl;
    tmpl.template_id = json_util::require_string(doc, "template_id", path);
    tmpl.pattern = json_util::require_string(doc, "pattern", path);
    auto platform = parse_platform(json_util::require_string(doc, "platform", path));
    if (!platform) throw SchemaViolation(child(path, "platform"), "expected \"desktop\" or \"mobile\"");
    tmpl.platform = *platform;
    tmpl.max_steps = static_cast<int>(json_util::optional_int(doc, "max_steps", path, kDefaultMaxSteps));

    const json& names = json_util::optional_array(doc, "placeholders", path);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!names[i].is_string()) throw SchemaViolation(index(child(path, "placeholders"), i), "expected a string");
        tmpl.placeholder_schema.insert(names[i].get<std::string>());
    }
    const json& subgoals = json_util::require_array(doc, "subgoals", path);
    for (std::size_t i = 0; i < subgoals.size(); ++i) {
        const auto sg_path = index(child(path, "subgoals"), i);
        SubGoalPattern sg;
        sg.id = json_util::require_string(subgoals[i], "id", sg_path);
        sg.description = json_util::optional_string(subgoals[i], "description", sg_path);
        sg.key_step = json_util::optional_bool(subgoals[i], "key_step", sg_path, true);
        sg.checker = checker_from_json(json_util::require(subgoals[i], "checker", sg_path), child(sg_path, "checker"));
        tmpl.subgoals.push_back(std::move(sg));
    }
    validate_template(tmpl);
    return tmpl;
}

std::map<std::string, TaskTemplate> load_template_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, TaskTemplate> out;
    for (const auto& f : files) {
        auto tmpl = template_from_json(json_util::read_file(f), f.string());
        auto id = tmpl.template_id;
        if (!out.emplace(id, std::move(tmpl)).second) {
            throw InvalidTemplate("duplicate template_id '" + id + "' in " + f.string());
        }
    }
    return out;
}

namespace {

BindingSet bindings_from_json(const json& doc, const std::string& path) {
    BindingSet out;
    if (!doc.is_object()) throw SchemaViolation(path, "expected an object");
    for (const auto& [k, v] : doc.items()) {
        if (!v.is_string()) throw SchemaViolation(child(path, k), "expected a string");
        out[k] = v.get<std::string>();
    }
    return out;
}

TaskSpec instantiate_part(const std::map<std::string, TaskTemplate>& templates, const json& doc,
                          const std::string& path, const std::string& task_id) {
    auto name = json_util::require_string(doc, "template", path);
    auto it = templates.find(name);
    if (it == templates.end()) throw SchemaViolation(child(path, "template"), "unknown template '" + name + "'");
    BindingSet bindings;
    if (doc.contains("bindings")) bindings = bindings_from_json(doc.at("bindings"), child(path, "bindings"));
    return instantiate(it->second, bindings, task_id);
}

NodeRef node_ref_from_json(const json& doc, const std::string& path) {
    auto part = json_util::require_int(doc, "part", path);
    if (part < 0) throw SchemaViolation(child(path, "part"), "must be >= 0");
    return {static_cast<std::size_t>(part), json_util::require_string(doc, "node", path)};
}

} // namespace

std::vector<TaskSpec> synthesize(const std::map<std::string, TaskTemplate>& templates, const json& bindings_doc) {
    json_util::expect_schema(bindings_doc, kTemplateSchema);
    const json& instances = json_util::require_array(bindings_doc, "instances", "$");
    std::vector<TaskSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto path = index("$.instances", i);
        const json& inst = instances[i];
        auto task_id = json_util::require_string(inst, "task_id", path);
        if (!seen.insert(task_id).second) throw SchemaViolation(child(path, "task_id"), "duplicate task_id");

        TaskSpec task;
        if (inst.contains("compose")) {
            const json& parts_doc = json_util::require_array(inst, "compose", path);
            std::vector<TaskSpec> parts;
            for (std::size_t p = 0; p < parts_doc.size(); ++p) {
                auto part_path = index(child(path, "compose"), p);
                parts.push_back(instantiate_part(templates, parts_doc[p], part_path,
                                                 task_id + "#" + std::to_string(p)));
            }
            std::vector<BridgeEdge> bridges;
            const json& bridges_doc = json_util::optional_array(inst, "bridges", path);
            for (std::size_t b = 0; b < bridges_doc.size(); ++b) {
                auto b_path = index(child(path, "bridges"), b);
                bridges.push_back({node_ref_from_json(json_util::require(bridges_doc[b], "from", b_path),
                                                      child(b_path, "from")),
                                   node_ref_from_json(json_util::require(bridges_doc[b], "to", b_path),
                                                      child(b_path, "to"))});
            }
            task = compose(parts, bridges, task_id);
        } else {
            task = instantiate_part(templates, inst, path, task_id);
        }
        if (inst.contains("instruction")) task.instruction = json_util::require_string(inst, "instruction", path);
        if (inst.contains("max_steps")) {
            task.max_steps = static_cast<int>(json_util::require_int(inst, "max_steps", path));
            if (task.max_steps < 1) throw SchemaViolation(child(path, "max_steps"), "must be >= 1");
        }
        out.push_back(std::move(task));
    }
    return out;
}

} // namespace kgce
