#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

enum class Platform { desktop, mobile };

std::string_view to_string(Platform platform);
std::optional<Platform> parse_platform(std::string_view text);

/// Names a completion predicate plus its arguments, e.g.
/// `on_page{app: "Tasks", page: "task_list"}`. Resolved against a
/// CheckerRegistry when an episode starts.
struct CheckerRef {
    std::string name;
    std::map<std::string, std::string> args;

    bool operator==(const CheckerRef&) const = default;
};

struct SubGoalNode {
    std::string id;
    std::string description;
    bool key_step = false;
    CheckerRef checker;

    bool operator==(const SubGoalNode&) const = default;
};

/// `from` must complete before `to`.
struct Edge {
    std::string from;
    std::string to;

    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
};

inline constexpr int kDefaultMaxSteps = 30;

struct TaskSpec {
    std::string task_id;
    std::string instruction;
    std::vector<SubGoalNode> nodes;
    std::vector<Edge> edges;
    /// Ordered and duplicate-free; the first entry picks the starting device.
    std::vector<Platform> platforms;
    int max_steps = kDefaultMaxSteps;

    const SubGoalNode* find_node(std::string_view id) const;
    std::vector<std::string> predecessors(std::string_view id) const;
    std::vector<std::string> successors(std::string_view id) const;
    std::vector<std::string> sources() const;
    std::vector<std::string> sinks() const;

    bool operator==(const TaskSpec&) const = default;
};

struct Violation {
    enum class Kind { cycle, dangling_edge, duplicate_id, empty_graph, bad_max_steps };

    Kind kind;
    /// For cycles, the closed node sequence (first == last).
    std::vector<std::string> nodes;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Structural checks only; violations are returned as data.
ValidationReport validate_dag(const TaskSpec& spec);

/// Kahn's algorithm with lexicographic tie-breaking. Throws CyclicGraph.
std::vector<std::string> topo_order(const TaskSpec& spec);

struct Completion {
    std::string node_id;
    int step_index = 0;

    bool operator==(const Completion&) const = default;
};

/// Sub-goal completion state for one episode. Completion is sticky and
/// always closed under predecessors.
class CompletionState {
public:
    explicit CompletionState(std::shared_ptr<const TaskSpec> task);

    const TaskSpec& task() const { return *task_; }
    const std::shared_ptr<const TaskSpec>& task_ptr() const { return task_; }
    const std::set<std::string>& completed() const { return completed_; }
    const std::vector<Completion>& completion_order() const { return order_; }
    bool is_complete(std::string_view node_id) const;

private:
    friend CompletionState mark_complete(const CompletionState&, const std::string&, int);

    std::shared_ptr<const TaskSpec> task_;
    std::set<std::string> completed_;
    std::vector<Completion> order_;
};

/// Copy-on-update. Marking an already-completed node returns the state
/// unchanged. Throws UnknownNode, PredecessorIncomplete, or
/// InvariantViolation when `step_index` goes backwards.
CompletionState mark_complete(const CompletionState& state, const std::string& node_id,
                              int step_index);

std::set<std::string> frontier(const CompletionState& state);

/// |completed| / |V|.
double completion_ratio(const CompletionState& state);

} // namespace kgce
