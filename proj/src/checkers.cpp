#include "kgce/checkers.hpp"

#include "kgce/error.hpp"

#include <algorithm>

namespace kgce {

namespace {

std::string arg(const CheckerArgs& args, const std::string& key) {
    auto it = args.find(key);
    return it == args.end() ? std::string{} : it->second;
}

bool device_matches(const SessionState& s, const std::string& device_id, const CheckerArgs& args) {
    auto it = args.find("device");
    if (it == args.end() || it->second.empty()) return true;
    if (it->second == device_id) return true;
    auto platform = parse_platform(it->second);
    return platform && s.world().devices.at(device_id).platform == *platform;
}

template <typename Pred>
bool any_device(const SessionState& s, const CheckerArgs& args, Pred&& pred) {
    for (const auto& [id, dev] : s.devices()) {
        if (device_matches(s, id, args) && pred(id, dev)) return true;
    }
    return false;
}

CheckerRegistry make_builtin() {
    CheckerRegistry r;
    r.add("app_opened", {{"app"}, {"device"}, [](const SessionState& s, const CheckerArgs& a) {
                             return any_device(s, a, [&](const std::string&, const DeviceState& d) {
                                 return d.location.app == arg(a, "app");
                             });
                         }});
    r.add("on_page", {{"app", "page"}, {"device"}, [](const SessionState& s, const CheckerArgs& a) {
                          return any_device(s, a, [&](const std::string&, const DeviceState& d) {
                              return d.location.app == arg(a, "app") && d.location.page == arg(a, "page");
                          });
                      }});
    r.add("element_value_equals",
          {{"app", "page", "element", "value"}, {"device"}, [](const SessionState& s, const CheckerArgs& a) {
               return any_device(s, a, [&](const std::string& id, const DeviceState&) {
                   auto v = s.field_value(id, arg(a, "app"), arg(a, "page"), arg(a, "element"));
                   return v && *v == arg(a, "value");
               });
           }});
    r.add("note_contains", {{"text"}, {"store"}, [](const SessionState& s, const CheckerArgs& a) {
                                const auto text = arg(a, "text");
                                const auto store = arg(a, "store");
                                for (const auto& [name, entries] : s.stores()) {
                                    if (!store.empty() && name != store) continue;
                                    for (const auto& e : entries) {
                                        if (e.find(text) != std::string::npos) return true;
                                    }
                                }
                                return false;
                            }});
    return r;
}

} // namespace

void CheckerRegistry::add(std::string name, CheckerDef def) { defs_[std::move(name)] = std::move(def); }

const CheckerDef* CheckerRegistry::find(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
}

void CheckerRegistry::validate(const CheckerRef& ref) const {
    const CheckerDef* def = find(ref.name);
    if (!def) throw UnknownChecker("no checker named '" + ref.name + "'");
    for (const auto& req : def->required) {
        if (!ref.args.count(req)) throw UnknownChecker("checker '" + ref.name + "' needs argument '" + req + "'");
    }
    for (const auto& [key, _] : ref.args) {
        if (!def->required.count(key) && !def->optional.count(key)) {
            throw UnknownChecker("checker '" + ref.name + "' has no argument '" + key + "'");
        }
    }
}

bool CheckerRegistry::evaluate(const CheckerRef& ref, const SessionState& state) const {
    const CheckerDef* def = find(ref.name);
    if (!def) throw UnknownChecker("no checker named '" + ref.name + "'");
    return def->predicate(state, ref.args);
}

const CheckerRegistry& CheckerRegistry::builtin() {
    static const CheckerRegistry registry = make_builtin();
    return registry;
}

CompletionTracker::CompletionTracker(std::shared_ptr<const TaskSpec> task, const CheckerRegistry& registry)
    : registry_(&registry), order_(topo_order(*task)), state_(task) {
    for (const auto& node : task->nodes) {
        try {
            registry.validate(node.checker);
        } catch (const UnknownChecker& e) {
            throw UnknownChecker("task '" + task->task_id + "', node '" + node.id + "': " + e.what());
        }
    }
}

std::vector<std::string> CompletionTracker::observe(const SessionState& session, int step_index) {
    std::vector<std::string> fired;
    const TaskSpec& task = state_.task();
    for (const auto& id : order_) {
        if (state_.is_complete(id)) continue;
        auto preds = task.predecessors(id);
        bool eligible =
            std::all_of(preds.begin(), preds.end(), [&](const std::string& p) { return state_.is_complete(p); });
        if (!eligible) continue;
        if (registry_->evaluate(task.find_node(id)->checker, session)) {
            state_ = mark_complete(state_, id, step_index);
            fired.push_back(id);
        }
    }
    return fired;
}

CompletionState attach_checkers(std::shared_ptr<const TaskSpec> task, const std::vector<SessionState>& stream,
                                const CheckerRegistry& registry) {
    CompletionTracker tracker(std::move(task), registry);
    for (std::size_t i = 0; i < stream.size(); ++i) tracker.observe(stream[i], static_cast<int>(i) + 1);
    return tracker.state();
}

} // namespace kgce
