#pragma once

#include "kgce/action.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kgce {

/// Grammar (whitespace allowed between tokens):
///
///   action  := name "(" args ")"
///   tap     := "tap" "(" ID ")"            ID  := [A-Za-z0-9_.-]+
///   tap_xy  := "tap_xy" "(" INT "," INT ")" INT := "-"? [0-9]+
///   type    := "type" "(" STRING ")"        STRING := '"' ( [^"\\] | '\"' | '\\' )* '"'
///   open_app | switch_device := name "(" STRING ")"
///   back | done := name "(" ")"
struct ParsedAction {
    Action action;
    /// Byte span of the expression inside the reply.
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct ParseFailure {
    std::size_t position = 0;
    std::vector<std::string> expected;
    std::string message;

    std::string describe() const;
};

using ParseOutcome = std::variant<ParsedAction, ParseFailure>;

/// Returns the first well-formed action expression in `reply`. Prose around
/// it is ignored. When nothing parses, the failure comes from the first
/// attempted expression (an action name followed by "("), or points at the
/// end of input if no such attempt exists.
ParseOutcome parse_action(std::string_view reply);

inline bool parsed_ok(const ParseOutcome& o) { return std::holds_alternative<ParsedAction>(o); }

} // namespace kgce
