#include "doctest.h"

#include "kgce/action.hpp"
#include "kgce/action_parser.hpp"
#include "oracles.hpp"

using namespace kgce;
using kgce::testing::Rng;

namespace {

ParseFailure failure_of(const ParseOutcome& out) {
    REQUIRE(std::holds_alternative<ParseFailure>(out));
    return std::get<ParseFailure>(out);
}

ParsedAction success_of(const ParseOutcome& out) {
    REQUIRE(std::holds_alternative<ParsedAction>(out));
    return std::get<ParsedAction>(out);
}

} // namespace

TEST_SUITE("action_parser") {

TEST_CASE("each action form parses") {
    CHECK(success_of(parse_action("tap(course_bd)")).action == Action{Tap{"course_bd"}});
    CHECK(success_of(parse_action("tap_xy(-3, 40)")).action == Action{TapXY{-3, 40}});
    CHECK(success_of(parse_action(R"(type("say \"hi\" \\ bye"))")).action == Action{TypeText{R"(say "hi" \ bye)"}});
    CHECK(success_of(parse_action(R"(open_app("Tasks"))")).action == Action{OpenApp{"Tasks"}});
    CHECK(success_of(parse_action(R"(switch_device("win1"))")).action == Action{SwitchDevice{"win1"}});
    CHECK(success_of(parse_action("back()")).action == Action{Back{}});
    CHECK(success_of(parse_action("done( )")).action == Action{Done{}});
}

TEST_CASE("prose around the action is ignored and spans are reported") {
    const std::string reply = "The course card is visible, so I will tap(course_bd) now.";
    const auto& p = success_of(parse_action(reply));
    CHECK(p.action == Action{Tap{"course_bd"}});
    CHECK(reply.substr(p.begin, p.end - p.begin) == "tap(course_bd)");

    // Action names embedded in longer words are not actions.
    CHECK(failure_of(parse_action("feedback() and typed(x)")).message == "no action expression found");
    // A later well-formed expression wins over an earlier broken one.
    CHECK(success_of(parse_action("tap() oops, back()")).action == Action{Back{}});
}

TEST_CASE("malformed replies fail at the offending offset") {
    struct Case {
        std::string text;
        std::size_t position;
        std::string expected;
    };
    const std::vector<Case> cases = {
        {"tap_xy(12,)", 10, "integer"},
        {"tap()", 4, "element id"},
        {R"(type(""))", 5, "non-empty string literal"},
        {R"(type("abc)", 9, "'\"'"},
        {R"(type("a\n"))", 7, "'\\\"'"},
        {"tap(ok", 6, "')'"},
        {"tap_xy(99999999999, 1)", 7, "integer"},
        {"back(  ", 7, "')'"},
        {"open_app(Tasks)", 9, "string literal"},
        {"tap_xy(1 2)", 9, "','"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.text);
        const auto& f = failure_of(parse_action(c.text));
        CHECK(f.position == c.position);
        REQUIRE_FALSE(f.expected.empty());
        CHECK(f.expected.front() == c.expected);
    }
    const auto& none = failure_of(parse_action("I am not sure what to do."));
    CHECK(none.position == 25);
    CHECK(none.describe().find("offset 25") != std::string::npos);
}

TEST_CASE("render then parse is the identity on random actions") {
    Rng rng(31);
    for (int i = 0; i < 20000; ++i) {
        Action a = kgce::testing::random_action(rng);
        auto text = render_action(a);
        const auto& p = success_of(parse_action(text));
        CHECK(p.action == a);
        CHECK(p.begin == 0);
        CHECK(p.end == text.size());
    }
}

TEST_CASE("string literals agree with an independent unescaper") {
    Rng rng(32);
    for (int i = 0; i < 5000; ++i) {
        auto s = kgce::testing::random_escape_heavy_string(rng);
        auto quoted = quote_string(s);
        CHECK(kgce::testing::oracle_unquote(quoted) == s);
        auto parsed = parse_action("type(" + quoted + ")");
        CHECK(std::get<TypeText>(success_of(parsed).action).text == s);
    }
}

}
