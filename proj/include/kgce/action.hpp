#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace kgce {

struct Tap {
    std::string element_id;
    bool operator==(const Tap&) const = default;
};
struct TapXY {
    int x = 0;
    int y = 0;
    bool operator==(const TapXY&) const = default;
};
struct TypeText {
    std::string text;
    bool operator==(const TypeText&) const = default;
};
struct OpenApp {
    std::string app_name;
    bool operator==(const OpenApp&) const = default;
};
struct SwitchDevice {
    std::string device_id;
    bool operator==(const SwitchDevice&) const = default;
};
struct Back {
    bool operator==(const Back&) const = default;
};
struct Done {
    bool operator==(const Done&) const = default;
};

using Action = std::variant<Tap, TapXY, TypeText, OpenApp, SwitchDevice, Back, Done>;

/// Canonical grammar text, e.g. `tap_xy(120, 448)` or `type("a \"b\"")`.
std::string render_action(const Action& action);

/// Double-quoted literal with `\"` and `\\` escapes.
std::string quote_string(std::string_view text);

/// Element ids usable as a bare `tap(ID)` argument: [A-Za-z0-9_.-]+.
bool is_valid_element_id(std::string_view id);

inline bool is_back(const Action& a) { return std::holds_alternative<Back>(a); }
inline bool is_done(const Action& a) { return std::holds_alternative<Done>(a); }

} // namespace kgce
