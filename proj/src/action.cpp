#include "kgce/action.hpp"

#include <algorithm>

namespace kgce {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string quote_string(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string render_action(const Action& action) {
    return std::visit(overloaded{
                          [](const Tap& a) { return "tap(" + a.element_id + ")"; },
                          [](const TapXY& a) { return "tap_xy(" + std::to_string(a.x) + ", " + std::to_string(a.y) + ")"; },
                          [](const TypeText& a) { return "type(" + quote_string(a.text) + ")"; },
                          [](const OpenApp& a) { return "open_app(" + quote_string(a.app_name) + ")"; },
                          [](const SwitchDevice& a) { return "switch_device(" + quote_string(a.device_id) + ")"; },
                          [](const Back&) { return std::string("back()"); },
                          [](const Done&) { return std::string("done()"); },
                      },
                      action);
}

bool is_valid_element_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '.' || c == '-';
    });
}

} // namespace kgce
