#include "kgce/task_graph.hpp"

#include "kgce/error.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace kgce {

std::string_view to_string(Platform platform) {
    switch (platform) {
    case Platform::desktop: return "desktop";
    case Platform::mobile: return "mobile";
    }
    return "unknown";
}

std::optional<Platform> parse_platform(std::string_view text) {
    if (text == "desktop") return Platform::desktop;
    if (text == "mobile") return Platform::mobile;
    return std::nullopt;
}

const SubGoalNode* TaskSpec::find_node(std::string_view id) const {
    for (const auto& node : nodes) {
        if (node.id == id) return &node;
    }
    return nullptr;
}

std::vector<std::string> TaskSpec::predecessors(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& e : edges) {
        if (e.to == id) out.push_back(e.from);
    }
    return out;
}

std::vector<std::string> TaskSpec::successors(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& e : edges) {
        if (e.from == id) out.push_back(e.to);
    }
    return out;
}

std::vector<std::string> TaskSpec::sources() const {
    std::vector<std::string> out;
    for (const auto& node : nodes) {
        if (predecessors(node.id).empty()) out.push_back(node.id);
    }
    return out;
}

std::vector<std::string> TaskSpec::sinks() const {
    std::vector<std::string> out;
    for (const auto& node : nodes) {
        if (successors(node.id).empty()) out.push_back(node.id);
    }
    return out;
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i].message;
    }
    return os.str();
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Finds one cycle by DFS, visiting roots and neighbours in lexicographic
// order. Only edges between known nodes are considered.
std::optional<std::vector<std::string>> find_cycle(const TaskSpec& spec) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& node : spec.nodes) adj[node.id];
    for (const auto& e : spec.edges) {
        if (adj.count(e.from) && adj.count(e.to)) adj[e.from].push_back(e.to);
    }
    for (auto& [_, next] : adj) std::sort(next.begin(), next.end());

    enum class Mark { white, grey, black };
    std::map<std::string, Mark> mark;
    std::vector<std::string> path;
    std::optional<std::vector<std::string>> cycle;

    std::function<bool(const std::string&)> visit = [&](const std::string& u) {
        mark[u] = Mark::grey;
        path.push_back(u);
        for (const auto& v : adj[u]) {
            if (mark[v] == Mark::grey) {
                auto start = std::find(path.begin(), path.end(), v);
                std::vector<std::string> found(start, path.end());
                found.push_back(v);
                cycle = std::move(found);
                return true;
            }
            if (mark[v] == Mark::white && visit(v)) return true;
        }
        path.pop_back();
        mark[u] = Mark::black;
        return false;
    };

    for (const auto& [id, _] : adj) {
        if (mark[id] == Mark::white && visit(id)) break;
    }
    return cycle;
}

} // namespace

ValidationReport validate_dag(const TaskSpec& spec) {
    ValidationReport report;
    if (spec.nodes.empty()) {
        report.violations.push_back({Violation::Kind::empty_graph, {}, "task has no sub-goal nodes"});
    }
    if (spec.max_steps < 1) {
        report.violations.push_back(
            {Violation::Kind::bad_max_steps, {}, "max_steps must be >= 1, got " + std::to_string(spec.max_steps)});
    }

    std::set<std::string> ids;
    for (const auto& node : spec.nodes) {
        if (!ids.insert(node.id).second) {
            report.violations.push_back(
                {Violation::Kind::duplicate_id, {node.id}, "duplicate node id '" + node.id + "'"});
        }
    }
    for (const auto& e : spec.edges) {
        for (const auto* end : {&e.from, &e.to}) {
            if (!ids.count(*end)) {
                report.violations.push_back({Violation::Kind::dangling_edge, {e.from, e.to},
                                             "edge (" + e.from + ", " + e.to + ") references unknown node '" +
                                                 *end + "'"});
            }
        }
    }
    if (auto cycle = find_cycle(spec)) {
        report.violations.push_back({Violation::Kind::cycle, *cycle, "cycle [" + join(*cycle, ", ") + "]"});
    }
    return report;
}

std::vector<std::string> topo_order(const TaskSpec& spec) {
    std::map<std::string, int> indegree;
    for (const auto& node : spec.nodes) indegree[node.id] = 0;
    for (const auto& e : spec.edges) {
        if (!indegree.count(e.from) || !indegree.count(e.to)) {
            throw InvalidTask("edge (" + e.from + ", " + e.to + ") references an unknown node");
        }
        ++indegree[e.to];
    }

    std::set<std::string> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.insert(id);
    }

    std::vector<std::string> order;
    order.reserve(indegree.size());
    while (!ready.empty()) {
        std::string u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        for (const auto& e : spec.edges) {
            if (e.from == u && --indegree[e.to] == 0) ready.insert(e.to);
        }
    }
    if (order.size() != indegree.size()) {
        throw CyclicGraph("task '" + spec.task_id + "' contains a dependency cycle");
    }
    return order;
}

CompletionState::CompletionState(std::shared_ptr<const TaskSpec> task) : task_(std::move(task)) {
    if (!task_) throw InvalidTask("CompletionState requires a task");
}

bool CompletionState::is_complete(std::string_view node_id) const {
    return completed_.find(std::string(node_id)) != completed_.end();
}

CompletionState mark_complete(const CompletionState& state, const std::string& node_id, int step_index) {
    const TaskSpec& task = state.task();
    if (!task.find_node(node_id)) {
        throw UnknownNode("no node '" + node_id + "' in task '" + task.task_id + "'");
    }
    if (state.is_complete(node_id)) return state;

    for (const auto& pred : task.predecessors(node_id)) {
        if (!state.is_complete(pred)) {
            throw PredecessorIncomplete("node '" + node_id + "' depends on incomplete node '" + pred + "'");
        }
    }
    if (!state.order_.empty() && step_index < state.order_.back().step_index) {
        throw InvariantViolation("completion step index " + std::to_string(step_index) +
                                 " precedes earlier completion at step " +
                                 std::to_string(state.order_.back().step_index));
    }

    CompletionState next = state;
    next.completed_.insert(node_id);
    next.order_.push_back({node_id, step_index});
    return next;
}

std::set<std::string> frontier(const CompletionState& state) {
    std::set<std::string> out;
    const TaskSpec& task = state.task();
    for (const auto& node : task.nodes) {
        if (state.is_complete(node.id)) continue;
        auto preds = task.predecessors(node.id);
        bool eligible = std::all_of(preds.begin(), preds.end(),
                                    [&](const std::string& p) { return state.is_complete(p); });
        if (eligible) out.insert(node.id);
    }
    return out;
}

double completion_ratio(const CompletionState& state) {
    const auto total = state.task().nodes.size();
    if (total == 0) return 0.0;
    return static_cast<double>(state.completed().size()) / static_cast<double>(total);
}

} // namespace kgce
