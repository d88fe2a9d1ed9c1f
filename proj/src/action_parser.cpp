#include "kgce/action_parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>

namespace kgce {

std::string ParseFailure::describe() const {
    std::string out = "parse failure at offset " + std::to_string(position);
    if (!message.empty()) out += ": " + message;
    if (!expected.empty()) {
        out += " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) out += " or ";
            out += expected[i];
        }
        out += ")";
    }
    return out;
}

namespace {

constexpr std::array<std::string_view, 7> kActionNames = {"tap",  "tap_xy",        "type", "open_app",
                                                          "back", "switch_device", "done"};

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

struct Failed {
    ParseFailure failure;
};

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }

    [[noreturn]] void fail(std::vector<std::string> expected, std::string message = {}) {
        throw Failed{ParseFailure{pos_, std::move(expected), std::move(message)}};
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) fail({std::string("'") + c + "'"});
        ++pos_;
    }

    std::string id() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_id_char(text_[pos_])) ++pos_;
        if (pos_ == start) fail({"element id"});
        return std::string(text_.substr(start, pos_ - start));
    }

    int integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail({"integer"});
        }
        int value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            pos_ = start;
            fail({"integer"}, "integer out of range");
        }
        return value;
    }

    std::string string_literal() {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '"') fail({"string literal"});
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= text_.size()) fail({"'\"'"}, "unterminated string literal");
            char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                return out;
            }
            if (c == '\\') {
                if (pos_ + 1 >= text_.size()) {
                    ++pos_;
                    fail({"'\\\"'", "'\\\\'"}, "unterminated escape");
                }
                char next = text_[pos_ + 1];
                if (next != '"' && next != '\\') fail({"'\\\"'", "'\\\\'"}, "unsupported escape sequence");
                out.push_back(next);
                pos_ += 2;
                continue;
            }
            out.push_back(c);
            ++pos_;
        }
    }

    std::string non_empty_string() {
        skip_ws();
        std::size_t start = pos_;
        auto s = string_literal();
        if (s.empty()) {
            pos_ = start;
            fail({"non-empty string literal"});
        }
        return s;
    }

    Action arguments(std::string_view name) {
        Action action = Back{};
        if (name == "tap") {
            action = Tap{id()};
        } else if (name == "tap_xy") {
            int x = integer();
            expect(',');
            int y = integer();
            action = TapXY{x, y};
        } else if (name == "type") {
            action = TypeText{non_empty_string()};
        } else if (name == "open_app") {
            action = OpenApp{non_empty_string()};
        } else if (name == "switch_device") {
            action = SwitchDevice{non_empty_string()};
        } else if (name == "done") {
            action = Done{};
        }
        expect(')');
        return action;
    }

private:
    std::string_view text_;
    std::size_t pos_;
};

} // namespace

ParseOutcome parse_action(std::string_view reply) {
    std::optional<ParseFailure> first_failure;
    std::size_t i = 0;
    while (i < reply.size()) {
        if (!is_ident_char(reply[i]) || (i > 0 && is_ident_char(reply[i - 1]))) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < reply.size() && is_ident_char(reply[end])) ++end;
        std::string_view word = reply.substr(i, end - i);
        bool is_action = false;
        for (auto name : kActionNames) is_action = is_action || word == name;
        if (is_action) {
            ExpressionParser p(reply, end);
            if (p.peek('(')) {
                try {
                    p.expect('(');
                    Action action = p.arguments(word);
                    return ParsedAction{std::move(action), i, p.pos()};
                } catch (const Failed& f) {
                    if (!first_failure) first_failure = f.failure;
                }
            }
        }
        i = end;
    }
    if (first_failure) return *first_failure;
    ParseFailure none;
    none.position = reply.size();
    none.message = "no action expression found";
    for (auto name : kActionNames) none.expected.push_back(std::string(name) + "(...)");
    return none;
}

} // namespace kgce
