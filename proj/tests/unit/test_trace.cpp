#include "doctest.h"

#include "kgce/error.hpp"
#include "kgce/trace.hpp"

#include <sstream>

using namespace kgce;

namespace {

std::shared_ptr<const TaskSpec> two_nodes() {
    TaskSpec t;
    t.task_id = "t";
    t.instruction = "x";
    t.platforms = {Platform::mobile};
    t.nodes = {{"a", "", true, {"app_opened", {{"app", "A"}}}}, {"b", "", true, {"app_opened", {{"app", "B"}}}}};
    t.edges = {{"a", "b"}};
    t.max_steps = 5;
    return std::make_shared<const TaskSpec>(t);
}

Trace sample() {
    Trace tr;
    tr.header = {"t", "run", "scripted", true, {"Xiaoya Intelligent Assistant"}, 5, StateSignature{1}};
    TraceStep s1;
    s1.step = 1;
    s1.action = "open_app(\"A\")";
    s1.flags.effect_applied = true;
    s1.pre = StateSignature{1};
    s1.post = StateSignature{2};
    s1.completed = {"a"};
    TraceStep s2;
    s2.step = 2;
    s2.raw_reply = "no idea";
    s2.parse_error = "parse failure at offset 7";
    s2.flags.invalid_target = true;
    s2.flags.revisit = true;
    s2.pre = s2.post = StateSignature{2};
    tr.steps = {s1, s2};
    tr.end.terminal = TerminalCause::done_signaled;
    return tr;
}

Trace reparse(const std::string& text) {
    std::istringstream in(text);
    return trace_from_jsonl(in);
}

} // namespace

TEST_SUITE("trace") {

TEST_CASE("traces round trip byte for byte") {
    auto text = trace_to_jsonl(sample());
    auto back = reparse(text);
    CHECK(trace_to_jsonl(back) == text);
    CHECK(back.steps[1].action.empty());
    CHECK(back.header.kb_invoked == std::vector<std::string>{"Xiaoya Intelligent Assistant"});
}

TEST_CASE("episodes rebuilt from traces honour dependencies") {
    auto ep = episode_from_trace(sample(), two_nodes());
    CHECK(ep.steps.size() == 2);
    CHECK(ep.completion.is_complete("a"));

    auto out_of_order = sample();
    out_of_order.steps[0].completed = {"b"};
    CHECK_THROWS_AS(episode_from_trace(out_of_order, two_nodes()), PredecessorIncomplete);

    auto wrong_task = sample();
    wrong_task.header.task_id = "other";
    CHECK_THROWS_AS(episode_from_trace(wrong_task, two_nodes()), InvariantViolation);
}

TEST_CASE("damaged traces are refused with a line number") {
    auto text = trace_to_jsonl(sample());
    auto lines_of = [](const std::string& t) {
        std::vector<std::string> out;
        std::istringstream in(t);
        for (std::string l; std::getline(in, l);) out.push_back(l);
        return out;
    };
    auto lines = lines_of(text);
    REQUIRE(lines.size() == 4);

    CHECK_THROWS_AS(reparse(lines[0] + "\n" + lines[2] + "\n" + lines[3] + "\n"), SchemaViolation);
    CHECK_THROWS_AS(reparse(lines[0] + "\n" + lines[1] + "\n"), ParseError);
    CHECK_THROWS_AS(reparse(lines[1] + "\n"), SchemaViolation);
    CHECK_THROWS_AS(reparse(""), ParseError);
    try {
        reparse(lines[0] + "\n{oops\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

}
