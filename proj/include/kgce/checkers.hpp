#pragma once

#include "kgce/env_sim.hpp"
#include "kgce/task_graph.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace kgce {

using CheckerArgs = std::map<std::string, std::string>;
using CheckerFn = std::function<bool(const SessionState&, const CheckerArgs&)>;

struct CheckerDef {
    std::set<std::string> required;
    std::set<std::string> optional;
    CheckerFn predicate;
};

/// Named completion predicates over simulated state.
///
/// Built-ins (`device` is optional everywhere and matches a device id or a
/// platform name; absent means any device):
///   app_opened{app}                          app is in the foreground
///   on_page{app, page}                       that page is showing
///   element_value_equals{app, page, element, value}
///   note_contains{text, store?}              some store entry contains text
class CheckerRegistry {
public:
    void add(std::string name, CheckerDef def);
    const CheckerDef* find(const std::string& name) const;

    /// Throws UnknownChecker for unknown names, missing or unexpected args.
    void validate(const CheckerRef& ref) const;
    bool evaluate(const CheckerRef& ref, const SessionState& state) const;

    static const CheckerRegistry& builtin();

private:
    std::map<std::string, CheckerDef> defs_;
};

/// Incremental form of attach_checkers used while an episode runs.
class CompletionTracker {
public:
    /// Fails fast with UnknownChecker.
    CompletionTracker(std::shared_ptr<const TaskSpec> task, const CheckerRegistry& registry);

    /// Sweeps incomplete nodes in topo order, completing each whose
    /// predecessors are done and whose predicate holds. A node completed
    /// earlier in the same sweep unlocks its successors for this sweep.
    /// Returns the newly completed ids.
    std::vector<std::string> observe(const SessionState& state, int step_index);

    const CompletionState& state() const { return state_; }

private:
    const CheckerRegistry* registry_;
    std::vector<std::string> order_;
    CompletionState state_;
};

/// `stream[i]` is the session state after step i+1.
CompletionState attach_checkers(std::shared_ptr<const TaskSpec> task, const std::vector<SessionState>& stream,
                                const CheckerRegistry& registry = CheckerRegistry::builtin());

} // namespace kgce
