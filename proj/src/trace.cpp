#include "kgce/trace.hpp"

#include "kgce/error.hpp"
#include "kgce/json_util.hpp"

#include <fstream>

namespace kgce {

using nlohmann::json;

namespace {

json flags_to_json(const StepFlags& f) {
    return {{"out_of_range", f.out_of_range},
            {"invalid_target", f.invalid_target},
            {"effect_applied", f.effect_applied},
            {"revisit", f.revisit}};
}

StepFlags flags_from_json(const json& doc, const std::string& path) {
    StepFlags f;
    f.out_of_range = json_util::optional_bool(doc, "out_of_range", path, false);
    f.invalid_target = json_util::optional_bool(doc, "invalid_target", path, false);
    f.effect_applied = json_util::optional_bool(doc, "effect_applied", path, false);
    f.revisit = json_util::optional_bool(doc, "revisit", path, false);
    return f;
}

StateSignature signature_from(const json& doc, std::string_view key, const std::string& path) {
    auto text = json_util::require_string(doc, key, path);
    auto sig = StateSignature::from_hex(text);
    if (!sig) throw SchemaViolation(json_util::child(path, key), "expected 16 lowercase hex digits");
    return *sig;
}

} // namespace

std::string trace_to_jsonl(const Trace& trace) {
    std::string out;
    const auto& h = trace.header;
    out += json{{"schema", std::string(kTraceSchema)},
                {"record", "header"},
                {"task_id", h.task_id},
                {"run", h.run_label},
                {"agent", h.agent},
                {"kb_enabled", h.kb_enabled},
                {"kb_invoked", h.kb_invoked},
                {"max_steps", h.max_steps},
                {"initial_signature", h.initial_signature.hex()}}
               .dump();
    out += "\n";
    for (const auto& s : trace.steps) {
        json rec = {{"record", "step"},
                    {"step", s.step},
                    {"action", s.action.empty() ? json(nullptr) : json(s.action)},
                    {"flags", flags_to_json(s.flags)},
                    {"is_back_action", s.is_back_action},
                    {"pre", s.pre.hex()},
                    {"post", s.post.hex()},
                    {"observation_digest", s.observation_digest},
                    {"completed", s.completed}};
        if (!s.raw_reply.empty()) rec["raw_reply"] = s.raw_reply;
        if (!s.parse_error.empty()) rec["parse_error"] = s.parse_error;
        out += rec.dump();
        out += "\n";
    }
    json end = {{"record", "end"},
                {"terminal", std::string(to_string(trace.end.terminal))},
                {"steps", static_cast<int>(trace.steps.size())}};
    if (!trace.end.error.empty()) end["error"] = trace.end.error;
    out += end.dump();
    out += "\n";
    return out;
}

Trace trace_from_jsonl(std::istream& in) {
    Trace trace;
    bool have_header = false;
    bool have_end = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string path = "line " + std::to_string(line_no);
        if (have_end) throw SchemaViolation(path, "record after end record");
        json doc = json_util::parse(line, path);
        auto kind = json_util::require_string(doc, "record", path);
        if (!have_header) {
            if (kind != "header") throw SchemaViolation(path, "trace must start with a header record");
            json_util::expect_schema(doc, kTraceSchema, path);
            auto& h = trace.header;
            h.task_id = json_util::require_string(doc, "task_id", path);
            h.run_label = json_util::optional_string(doc, "run", path);
            h.agent = json_util::optional_string(doc, "agent", path);
            h.kb_enabled = json_util::optional_bool(doc, "kb_enabled", path, false);
            for (const auto& name : json_util::optional_array(doc, "kb_invoked", path)) {
                h.kb_invoked.push_back(name.get<std::string>());
            }
            h.max_steps = static_cast<int>(json_util::require_int(doc, "max_steps", path));
            h.initial_signature = signature_from(doc, "initial_signature", path);
            have_header = true;
        } else if (kind == "step") {
            TraceStep s;
            s.step = static_cast<int>(json_util::require_int(doc, "step", path));
            if (s.step != static_cast<int>(trace.steps.size()) + 1) {
                throw SchemaViolation(json_util::child(path, "step"), "step indices must be consecutive from 1");
            }
            const json& action = json_util::require(doc, "action", path);
            if (!action.is_null()) {
                if (!action.is_string()) throw SchemaViolation(json_util::child(path, "action"), "expected a string");
                s.action = action.get<std::string>();
            }
            s.raw_reply = json_util::optional_string(doc, "raw_reply", path);
            s.parse_error = json_util::optional_string(doc, "parse_error", path);
            s.flags = flags_from_json(json_util::require(doc, "flags", path), json_util::child(path, "flags"));
            s.is_back_action = json_util::optional_bool(doc, "is_back_action", path, false);
            s.pre = signature_from(doc, "pre", path);
            s.post = signature_from(doc, "post", path);
            s.observation_digest = json_util::optional_string(doc, "observation_digest", path);
            for (const auto& id : json_util::optional_array(doc, "completed", path)) {
                if (!id.is_string()) throw SchemaViolation(json_util::child(path, "completed"), "expected strings");
                s.completed.push_back(id.get<std::string>());
            }
            trace.steps.push_back(std::move(s));
        } else if (kind == "end") {
            auto cause = parse_terminal_cause(json_util::require_string(doc, "terminal", path));
            if (!cause) throw SchemaViolation(json_util::child(path, "terminal"), "unknown terminal cause");
            trace.end.terminal = *cause;
            trace.end.error = json_util::optional_string(doc, "error", path);
            auto steps = json_util::require_int(doc, "steps", path);
            if (steps != static_cast<long long>(trace.steps.size())) {
                throw SchemaViolation(json_util::child(path, "steps"), "step count does not match step records");
            }
            have_end = true;
        } else {
            throw SchemaViolation(json_util::child(path, "record"), "unknown record kind '" + kind + "'");
        }
    }
    if (!have_header) throw ParseError("empty trace");
    if (!have_end) throw ParseError("trace has no end record");
    return trace;
}

Trace load_trace(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot open trace " + file.string());
    try {
        return trace_from_jsonl(in);
    } catch (const SchemaViolation& e) {
        throw SchemaViolation(file.string() + ": " + e.path(), e.what());
    } catch (const ParseError& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
}

EpisodeRecord episode_from_trace(const Trace& trace, std::shared_ptr<const TaskSpec> task) {
    if (!task) throw InvariantViolation("episode_from_trace needs a task");
    if (trace.header.task_id != task->task_id) {
        throw InvariantViolation("trace is for task '" + trace.header.task_id + "', not '" + task->task_id + "'");
    }
    CompletionState completion(task);
    std::vector<StepRecord> steps;
    for (const auto& s : trace.steps) {
        steps.push_back({s.action, s.flags, s.is_back_action});
        for (const auto& id : s.completed) completion = mark_complete(completion, id, s.step);
    }
    EpisodeRecord ep{task, std::move(steps), std::move(completion), trace.end.terminal};
    check_episode(ep);
    return ep;
}

} // namespace kgce
