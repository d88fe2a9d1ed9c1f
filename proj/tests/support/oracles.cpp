#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace kgce::testing {

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::filesystem::path fixtures_dir() { return KGCE_FIXTURES_DIR; }

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(KGCE_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

TaskSpec random_dag(Rng& rng, int max_nodes, double edge_p) {
    TaskSpec t;
    t.task_id = "random";
    t.instruction = "random task";
    t.platforms = {Platform::mobile};
    const int n = uniform(rng, 1, max_nodes);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), rng);
    for (const auto& id : ids) {
        t.nodes.push_back({id, "node " + id, coin(rng), {"app_opened", {{"app", id}}}});
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (coin(rng, edge_p)) t.edges.push_back({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]});
        }
    }
    return t;
}

EpisodeRecord random_episode(Rng& rng, int max_steps, int max_nodes) {
    TaskSpec spec = random_dag(rng, max_nodes);
    const int steps = uniform(rng, 0, max_steps);
    const bool hit_budget = steps > 0 && coin(rng, 0.3);
    spec.max_steps = hit_budget ? steps : steps + uniform(rng, 1, 5);
    auto task = std::make_shared<const TaskSpec>(std::move(spec));

    EpisodeRecord ep{task, {}, CompletionState(task), hit_budget ? TerminalCause::max_steps_reached
                                                                 : TerminalCause::done_signaled};
    for (int s = 1; s <= steps; ++s) {
        StepRecord rec;
        rec.is_back_action = coin(rng, 0.2);
        rec.flags.out_of_range = coin(rng, 0.15);
        rec.flags.invalid_target = !rec.flags.out_of_range && coin(rng, 0.15);
        rec.flags.effect_applied = !rec.flags.out_of_range && !rec.flags.invalid_target && coin(rng, 0.7);
        rec.flags.revisit = coin(rng, 0.25);
        rec.action = rec.is_back_action ? "back()" : "tap(x)";
        ep.steps.push_back(rec);
        // Complete a random slice of the frontier, possibly cascading.
        while (coin(rng, 0.45)) {
            auto f = frontier(ep.completion);
            if (f.empty()) break;
            auto it = f.begin();
            std::advance(it, uniform(rng, 0, static_cast<int>(f.size()) - 1));
            ep.completion = mark_complete(ep.completion, *it, s);
        }
    }
    return ep;
}

MetricsReport brute_force_metrics(const EpisodeRecord& ep, CpaMode mode) {
    const TaskSpec& t = *ep.task;
    MetricsReport r;
    auto& c = r.counts;
    c.nodes = static_cast<int>(t.nodes.size());
    std::vector<bool> step_completed(ep.steps.size() + 1, false);
    for (const auto& node : t.nodes) {
        bool done = false;
        for (const auto& comp : ep.completion.completion_order()) {
            if (comp.node_id == node.id) {
                done = true;
                step_completed[static_cast<std::size_t>(comp.step_index)] = true;
            }
        }
        c.completed_nodes += done ? 1 : 0;
        if (node.key_step) {
            c.key_steps += 1;
            c.covered_key_steps += done ? 1 : 0;
        }
    }
    c.completing_actions = static_cast<int>(std::count(step_completed.begin(), step_completed.end(), true));
    c.operations = static_cast<int>(ep.steps.size());
    for (const auto& s : ep.steps) {
        c.completed_actions += s.flags.effect_applied ? 1 : 0;
        c.backtracks += (s.is_back_action || s.flags.revisit) ? 1 : 0;
        c.out_of_range += s.flags.out_of_range ? 1 : 0;
    }
    auto div = [](int a, int b) { return b > 0 ? double(a) / double(b) : 0.0; };
    r.cr = div(c.completed_nodes, c.nodes);
    r.cpa = div(mode == CpaMode::literal ? c.completed_actions : c.completing_actions, c.operations);
    r.precision = div(c.completed_actions, c.operations);
    r.recall = c.key_steps > 0 ? div(c.covered_key_steps, c.key_steps) : 1.0;
    r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    r.br = div(c.backtracks, c.operations);
    r.oor_rate = div(c.out_of_range, c.operations);
    r.rms = ep.terminal == TerminalCause::max_steps_reached;
    return r;
}

namespace {

std::vector<std::string> preds_of(const TaskSpec& t, const std::string& id) {
    std::vector<std::string> out;
    for (const auto& e : t.edges) {
        if (e.to == id) out.push_back(e.from);
    }
    return out;
}

} // namespace

bool downward_closed(const TaskSpec& task, const std::set<std::string>& done) {
    for (const auto& id : done) {
        for (const auto& p : preds_of(task, id)) {
            if (!done.count(p)) return false;
        }
    }
    return true;
}

std::set<std::string> brute_frontier(const TaskSpec& task, const std::set<std::string>& done) {
    std::set<std::string> out;
    for (const auto& n : task.nodes) {
        if (done.count(n.id)) continue;
        auto ps = preds_of(task, n.id);
        if (std::all_of(ps.begin(), ps.end(), [&](const std::string& p) { return done.count(p) > 0; })) out.insert(n.id);
    }
    return out;
}

bool is_topological(const TaskSpec& task, const std::vector<std::string>& order) {
    if (order.size() != task.nodes.size()) return false;
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!pos.emplace(order[i], i).second) return false;
    }
    for (const auto& n : task.nodes) {
        if (!pos.count(n.id)) return false;
    }
    for (const auto& e : task.edges) {
        if (pos.at(e.from) >= pos.at(e.to)) return false;
    }
    return true;
}

std::vector<std::vector<std::string>> all_topological_orders(const TaskSpec& task) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> current;
    std::set<std::string> done;
    std::function<void()> rec = [&] {
        if (current.size() == task.nodes.size()) {
            out.push_back(current);
            return;
        }
        for (const auto& id : brute_frontier(task, done)) {
            current.push_back(id);
            done.insert(id);
            rec();
            done.erase(id);
            current.pop_back();
        }
    };
    rec();
    return out;
}

std::string random_escape_heavy_string(Rng& rng, int max_len) {
    static const std::string alphabet = "ab Z09\"\\\\\"()_,.;-\t\xc3\xa9";
    std::string s;
    const int len = uniform(rng, 1, max_len);
    while (static_cast<int>(s.size()) < len) {
        char c = alphabet[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(alphabet.size()) - 1))];
        if (static_cast<unsigned char>(c) >= 0x80) {
            s += "\xc3\xa9";  // keep multi-byte sequences whole
        } else {
            s.push_back(c);
        }
    }
    return s;
}

Action random_action(Rng& rng) {
    static const std::string id_chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-";
    auto random_id = [&] {
        std::string id;
        const int len = uniform(rng, 1, 12);
        for (int i = 0; i < len; ++i) id.push_back(id_chars[static_cast<std::size_t>(uniform(rng, 0, 63))]);
        return id;
    };
    switch (uniform(rng, 0, 6)) {
    case 0: return Tap{random_id()};
    case 1: return TapXY{uniform(rng, -5000, 5000), uniform(rng, -5000, 5000)};
    case 2: return TypeText{random_escape_heavy_string(rng)};
    case 3: return OpenApp{random_escape_heavy_string(rng)};
    case 4: return SwitchDevice{random_escape_heavy_string(rng)};
    case 5: return Back{};
    default: return Done{};
    }
}

std::optional<std::string> oracle_unquote(std::string_view quoted) {
    if (quoted.size() < 2 || quoted.front() != '"' || quoted.back() != '"') return std::nullopt;
    std::string out;
    for (std::size_t i = 1; i + 1 < quoted.size(); ++i) {
        char c = quoted[i];
        if (c == '"') return std::nullopt;
        if (c == '\\') {
            if (i + 2 >= quoted.size()) return std::nullopt;
            char next = quoted[++i];
            if (next != '"' && next != '\\') return std::nullopt;
            out.push_back(next);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<FragmentItem> reparse_fragment(std::string_view fragment) {
    std::vector<FragmentItem> items;
    std::size_t pos = 0;
    while (pos < fragment.size()) {
        auto nl = fragment.find('\n', pos);
        std::string_view line = fragment.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? fragment.size() : nl + 1;
        std::size_t indent = 0;
        while (indent < line.size() && line[indent] == ' ') ++indent;
        auto body = line.substr(indent);
        FragmentItem item;
        item.depth = static_cast<int>(indent);
        auto starts = [&](std::string_view p) { return body.substr(0, p.size()) == p; };
        if (body == "[knowledge truncated]") {
            item.kind = "marker";
        } else if (starts("Application: ")) {
            item.kind = "application";
            item.text = std::string(body.substr(13));
        } else if (starts("Platform: ")) {
            item.kind = "platform";
            item.text = std::string(body.substr(10));
        } else if (starts("Alias: ")) {
            item.kind = "alias";
            item.text = std::string(body.substr(7));
        } else if (starts("Page ")) {
            auto colon = body.find(": ");
            item.kind = "page";
            item.id = std::string(body.substr(5, colon - 5));
            item.text = std::string(body.substr(colon + 2));
        } else if (starts("- ")) {
            auto at = body.find(" @ (");
            auto close = body.find("): ", at);
            item.kind = "element";
            item.id = std::string(body.substr(2, at - 2));
            item.text = std::string(body.substr(at + 3, close - at - 2));  // "(x,y,w,h)"
            item.text += "|" + std::string(body.substr(close + 3));
        } else {
            item.kind = "unknown";
            item.text = std::string(body);
        }
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace kgce::testing
