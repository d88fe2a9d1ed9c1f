#include "kgce/env_sim.hpp"

#include "kgce/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace kgce {

using json_util::child;
using json_util::index;
using nlohmann::json;

std::string_view to_string(ElementKind kind) {
    switch (kind) {
    case ElementKind::button: return "button";
    case ElementKind::text_field: return "text_field";
    case ElementKind::list_item: return "list_item";
    case ElementKind::static_text: return "static_text";
    }
    return "unknown";
}

std::string_view to_string(Terminal terminal) {
    switch (terminal) {
    case Terminal::none: return "none";
    case Terminal::done_signaled: return "done_signaled";
    case Terminal::max_steps_reached: return "max_steps_reached";
    }
    return "unknown";
}

const SimElement* PageModel::find(std::string_view element_id) const {
    for (const auto& e : elements) {
        if (e.element_id == element_id) return &e;
    }
    return nullptr;
}

std::string launcher_id(std::string_view app_name) {
    std::string out = "launch_";
    bool underscore = false;
    for (unsigned char c : app_name) {
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
            underscore = false;
        } else if (!underscore) {
            out.push_back('_');
            underscore = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// World documents

namespace {

std::optional<ElementKind> parse_kind(std::string_view text) {
    if (text == "button") return ElementKind::button;
    if (text == "text_field") return ElementKind::text_field;
    if (text == "list_item") return ElementKind::list_item;
    if (text == "static_text") return ElementKind::static_text;
    return std::nullopt;
}

std::string_view effect_name(Effect::Kind kind) {
    switch (kind) {
    case Effect::Kind::navigate: return "navigate";
    case Effect::Kind::set_field: return "set_field";
    case Effect::Kind::append_to_store: return "append_to_store";
    case Effect::Kind::open_app: return "open_app";
    }
    return "unknown";
}

Effect effect_from_json(const json& doc, const std::string& path) {
    Effect e;
    auto name = json_util::require_string(doc, "effect", path);
    if (name == "navigate") e.kind = Effect::Kind::navigate;
    else if (name == "set_field") e.kind = Effect::Kind::set_field;
    else if (name == "append_to_store") e.kind = Effect::Kind::append_to_store;
    else if (name == "open_app") e.kind = Effect::Kind::open_app;
    else throw SchemaViolation(child(path, "effect"), "unknown effect '" + name + "'");
    e.target = json_util::require_string(doc, "target", path);
    if (doc.contains("value")) e.value = json_util::require_string(doc, "value", path);
    e.from_field = json_util::optional_string(doc, "from_field", path);
    return e;
}

json effect_to_json(const Effect& e) {
    json doc = {{"effect", std::string(effect_name(e.kind))}, {"target", e.target}};
    if (e.value) doc["value"] = *e.value;
    if (!e.from_field.empty()) doc["from_field"] = e.from_field;
    return doc;
}

Box world_box_from_json(const json& doc, const std::string& path) {
    Box b;
    b.x = static_cast<int>(json_util::require_int(doc, "x", path));
    b.y = static_cast<int>(json_util::require_int(doc, "y", path));
    b.width = static_cast<int>(json_util::require_int(doc, "width", path));
    b.height = static_cast<int>(json_util::require_int(doc, "height", path));
    return b;
}

} // namespace

void validate_world(const WorldModel& world) {
    if (world.devices.empty()) throw InvalidWorld("world has no devices");
    for (const auto& [device_id, device] : world.devices) {
        if (device_id.empty()) throw InvalidWorld("empty device id");
        if (device.width <= 0 || device.height <= 0) {
            throw InvalidWorld("device '" + device_id + "' has a non-positive screen size");
        }
        const Box screen{0, 0, device.width, device.height};
        for (const auto& [app_name, app] : device.apps) {
            const std::string where = device_id + "/" + app_name;
            if (app_name.empty()) throw InvalidWorld("device '" + device_id + "' has an app with an empty name");
            if (!app.pages.count(app.initial_page)) {
                throw InvalidWorld(where + ": initial page '" + app.initial_page + "' does not exist");
            }
            for (const auto& [page_id, page] : app.pages) {
                if (page_id == kHomePage) throw InvalidWorld(where + ": page id 'home' is reserved");
                std::set<std::string> ids;
                for (const auto& el : page.elements) {
                    const std::string el_where = where + "/" + page_id + "/" + el.element_id;
                    if (!is_valid_element_id(el.element_id)) throw InvalidWorld(el_where + ": invalid element id");
                    if (!ids.insert(el.element_id).second) throw InvalidWorld(el_where + ": duplicate element id");
                    if (el.box.width <= 0 || el.box.height <= 0 || !screen.contains(el.box)) {
                        throw InvalidWorld(el_where + ": box lies outside the device screen");
                    }
                    for (const auto& [trigger, effects] : el.transitions) {
                        for (const auto& fx : effects) {
                            switch (fx.kind) {
                            case Effect::Kind::navigate:
                                if (!app.pages.count(fx.target)) {
                                    throw InvalidWorld(el_where + ": navigate target '" + fx.target + "' does not exist");
                                }
                                break;
                            case Effect::Kind::set_field: {
                                auto* target = page.find(fx.target);
                                if (!target || target->kind != ElementKind::text_field) {
                                    throw InvalidWorld(el_where + ": set_field target '" + fx.target +
                                                       "' is not a text field on this page");
                                }
                                if (!fx.value) throw InvalidWorld(el_where + ": set_field needs a value");
                                break;
                            }
                            case Effect::Kind::append_to_store:
                                if (fx.target.empty()) throw InvalidWorld(el_where + ": empty store name");
                                if (!fx.from_field.empty()) {
                                    auto* src = page.find(fx.from_field);
                                    if (!src || src->kind != ElementKind::text_field) {
                                        throw InvalidWorld(el_where + ": from_field '" + fx.from_field +
                                                           "' is not a text field on this page");
                                    }
                                } else if (!fx.value && trigger != Trigger::type) {
                                    throw InvalidWorld(el_where + ": append_to_store needs a value or from_field");
                                }
                                break;
                            case Effect::Kind::open_app:
                                if (!device.apps.count(fx.target)) {
                                    throw InvalidWorld(el_where + ": open_app target '" + fx.target + "' not installed");
                                }
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
}

WorldModel world_from_json(const json& doc) {
    json_util::expect_schema(doc, kWorldSchema);
    WorldModel world;
    const json& devices = json_util::require_array(doc, "devices", "$");
    for (std::size_t d = 0; d < devices.size(); ++d) {
        const auto d_path = index("$.devices", d);
        DeviceModel dev;
        auto device_id = json_util::require_string(devices[d], "device_id", d_path);
        auto platform = parse_platform(json_util::require_string(devices[d], "platform", d_path));
        if (!platform) throw SchemaViolation(child(d_path, "platform"), "expected \"desktop\" or \"mobile\"");
        dev.platform = *platform;
        const json& screen = json_util::require(devices[d], "screen", d_path);
        dev.width = static_cast<int>(json_util::require_int(screen, "width", child(d_path, "screen")));
        dev.height = static_cast<int>(json_util::require_int(screen, "height", child(d_path, "screen")));

        const json& apps = json_util::optional_array(devices[d], "apps", d_path);
        for (std::size_t a = 0; a < apps.size(); ++a) {
            const auto a_path = index(child(d_path, "apps"), a);
            AppModel app;
            auto name = json_util::require_string(apps[a], "name", a_path);
            app.initial_page = json_util::require_string(apps[a], "initial_page", a_path);
            const json& pages = json_util::require_array(apps[a], "pages", a_path);
            for (std::size_t p = 0; p < pages.size(); ++p) {
                const auto p_path = index(child(a_path, "pages"), p);
                PageModel page;
                auto page_id = json_util::require_string(pages[p], "page_id", p_path);
                page.description = json_util::optional_string(pages[p], "description", p_path);
                const json& elements = json_util::optional_array(pages[p], "elements", p_path);
                for (std::size_t e = 0; e < elements.size(); ++e) {
                    const auto e_path = index(child(p_path, "elements"), e);
                    SimElement el;
                    el.element_id = json_util::require_string(elements[e], "element_id", e_path);
                    auto kind = parse_kind(json_util::require_string(elements[e], "kind", e_path));
                    if (!kind) throw SchemaViolation(child(e_path, "kind"), "unknown element kind");
                    el.kind = *kind;
                    el.box = world_box_from_json(json_util::require(elements[e], "box", e_path), child(e_path, "box"));
                    el.description = json_util::optional_string(elements[e], "description", e_path);
                    el.initial_value = json_util::optional_string(elements[e], "value", e_path);
                    for (auto [key, trigger] : {std::pair{"on_tap", Trigger::tap}, std::pair{"on_type", Trigger::type}}) {
                        const json& fx = json_util::optional_array(elements[e], key, e_path);
                        for (std::size_t f = 0; f < fx.size(); ++f) {
                            el.transitions[trigger].push_back(effect_from_json(fx[f], index(child(e_path, key), f)));
                        }
                    }
                    page.elements.push_back(std::move(el));
                }
                if (!app.pages.emplace(page_id, std::move(page)).second) {
                    throw SchemaViolation(child(p_path, "page_id"), "duplicate page id '" + page_id + "'");
                }
            }
            if (!dev.apps.emplace(name, std::move(app)).second) {
                throw SchemaViolation(child(a_path, "name"), "duplicate app '" + name + "'");
            }
        }
        if (!world.devices.emplace(device_id, std::move(dev)).second) {
            throw SchemaViolation(child(d_path, "device_id"), "duplicate device '" + device_id + "'");
        }
    }
    validate_world(world);
    return world;
}

json world_to_json(const WorldModel& world) {
    json devices = json::array();
    for (const auto& [device_id, dev] : world.devices) {
        json apps = json::array();
        for (const auto& [name, app] : dev.apps) {
            json pages = json::array();
            for (const auto& [page_id, page] : app.pages) {
                json elements = json::array();
                for (const auto& el : page.elements) {
                    json e = {{"element_id", el.element_id},
                              {"kind", std::string(to_string(el.kind))},
                              {"box", {{"x", el.box.x}, {"y", el.box.y}, {"width", el.box.width}, {"height", el.box.height}}},
                              {"description", el.description}};
                    if (!el.initial_value.empty()) e["value"] = el.initial_value;
                    for (auto [key, trigger] : {std::pair{"on_tap", Trigger::tap}, std::pair{"on_type", Trigger::type}}) {
                        auto it = el.transitions.find(trigger);
                        if (it == el.transitions.end()) continue;
                        json fx = json::array();
                        for (const auto& f : it->second) fx.push_back(effect_to_json(f));
                        e[key] = fx;
                    }
                    elements.push_back(std::move(e));
                }
                pages.push_back({{"page_id", page_id}, {"description", page.description}, {"elements", elements}});
            }
            apps.push_back({{"name", name}, {"initial_page", app.initial_page}, {"pages", pages}});
        }
        devices.push_back({{"device_id", device_id},
                           {"platform", std::string(to_string(dev.platform))},
                           {"screen", {{"width", dev.width}, {"height", dev.height}}},
                           {"apps", apps}});
    }
    return {{"schema", std::string(kWorldSchema)}, {"devices", devices}};
}

WorldModel load_world(const std::filesystem::path& file) { return world_from_json(json_util::read_file(file)); }

// ---------------------------------------------------------------------------
// Signatures

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string StateSignature::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::optional<StateSignature> StateSignature::from_hex(std::string_view text) {
    if (text.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : text) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else return std::nullopt;
    }
    return StateSignature{v};
}

namespace {

// Length-prefixed so component boundaries cannot be forged by content.
void put(std::string& out, std::string_view s) {
    out += std::to_string(s.size());
    out.push_back(':');
    out.append(s);
}

std::string field_key(const std::string& device, const std::string& app, const std::string& page,
                      const std::string& element) {
    std::string key;
    put(key, device);
    put(key, app);
    put(key, page);
    put(key, element);
    return key;
}

} // namespace

StateSignature state_signature(const SessionState& state) {
    std::string canon = "active;";
    put(canon, state.active_device());
    for (const auto& [id, dev] : state.devices()) {
        canon += "dev;";
        put(canon, id);
        put(canon, dev.location.app);
        put(canon, dev.location.page);
        put(canon, dev.focused);
    }
    for (const auto& [key, value] : state.field_overrides()) {
        canon += "field;";
        put(canon, key);
        put(canon, value);
    }
    for (const auto& [name, entries] : state.stores()) {
        canon += "store;";
        put(canon, name);
        canon += std::to_string(entries.size());
        canon.push_back(';');
    }
    return StateSignature{fnv1a64(canon)};
}

// ---------------------------------------------------------------------------
// Session

SessionState::SessionState(std::shared_ptr<const WorldModel> world, int max_steps)
    : world_(std::move(world)), max_steps_(max_steps) {
    if (!world_) throw InvalidWorld("session requires a world");
    if (max_steps_ < 1) throw InvalidTask("max_steps must be >= 1");
    for (const auto& [id, _] : world_->devices) devices_[id] = DeviceState{};
    if (!devices_.empty()) active_device_ = devices_.begin()->first;
}

const DeviceState& SessionState::device_state(const std::string& device_id) const {
    auto it = devices_.find(device_id);
    if (it == devices_.end()) throw InvalidWorld("unknown device '" + device_id + "'");
    return it->second;
}

std::optional<std::string> SessionState::field_value(const std::string& device_id, const std::string& app,
                                                     const std::string& page, const std::string& element_id) const {
    auto dev = world_->devices.find(device_id);
    if (dev == world_->devices.end()) return std::nullopt;
    auto a = dev->second.apps.find(app);
    if (a == dev->second.apps.end()) return std::nullopt;
    auto p = a->second.pages.find(page);
    if (p == a->second.pages.end()) return std::nullopt;
    const SimElement* el = p->second.find(element_id);
    if (!el || el->kind != ElementKind::text_field) return std::nullopt;
    auto it = fields_.find(field_key(device_id, app, page, element_id));
    return it != fields_.end() ? it->second : el->initial_value;
}

bool SessionState::operator==(const SessionState& other) const {
    return world_ == other.world_ && active_device_ == other.active_device_ && devices_ == other.devices_ &&
           fields_ == other.fields_ && stores_ == other.stores_ && step_count_ == other.step_count_ &&
           max_steps_ == other.max_steps_ && terminal_ == other.terminal_ && visited_ == other.visited_;
}

SessionState reset(std::shared_ptr<const WorldModel> world, const TaskSpec& task) {
    if (!world) throw InvalidWorld("reset requires a world");
    for (auto platform : task.platforms) {
        bool available = std::any_of(world->devices.begin(), world->devices.end(),
                                     [&](const auto& kv) { return kv.second.platform == platform; });
        if (!available) {
            throw PlatformUnavailable("task '" + task.task_id + "' needs a " + std::string(to_string(platform)) +
                                      " device but the world has none");
        }
    }
    SessionState state(world, task.max_steps);
    if (!task.platforms.empty()) {
        for (const auto& [id, dev] : world->devices) {
            if (dev.platform == task.platforms.front()) {
                state.active_device_ = id;
                break;
            }
        }
    }
    state.visited_[state_signature(state)] = 1;
    return state;
}

namespace {

const PageModel* current_page(const WorldModel& world, const std::string& device_id, const Location& loc) {
    if (loc.app.empty()) return nullptr;
    const auto& apps = world.devices.at(device_id).apps;
    auto app = apps.find(loc.app);
    if (app == apps.end()) return nullptr;
    auto page = app->second.pages.find(loc.page);
    return page == app->second.pages.end() ? nullptr : &page->second;
}

// Home screen: one launcher button per installed app, four per row.
std::vector<ObservedElement> launcher_elements(const DeviceModel& device) {
    std::vector<ObservedElement> out;
    const int columns = 4;
    const int cell_w = device.width / columns;
    const int cell_h = std::max(1, std::min(220, device.height / 8));
    int i = 0;
    for (const auto& [name, _] : device.apps) {
        const int row = i / columns;
        const int col = i % columns;
        Box box{col * cell_w + cell_w / 10, cell_h / 2 + row * cell_h, cell_w - cell_w / 5, cell_h - cell_h / 10};
        out.push_back({launcher_id(name), box, ElementKind::button, name, std::nullopt});
        ++i;
    }
    return out;
}

} // namespace

Observation observe(const SessionState& state) {
    Observation obs;
    const auto& device = state.world().devices.at(state.active_device());
    const auto& dev_state = state.device_state(state.active_device());
    obs.device_id = state.active_device();
    obs.platform = device.platform;
    obs.app = dev_state.location.app;
    obs.page_id = dev_state.location.page;

    std::vector<std::string> texts;
    if (const PageModel* page = current_page(state.world(), state.active_device(), dev_state.location)) {
        obs.page_description = page->description;
        for (const auto& el : page->elements) {
            ObservedElement oe{el.element_id, el.box, el.kind, el.description, std::nullopt};
            if (el.kind == ElementKind::text_field) {
                oe.value = state.field_value(state.active_device(), obs.app, obs.page_id, el.element_id);
            }
            if (el.kind == ElementKind::static_text) texts.push_back(el.description);
            obs.elements.push_back(std::move(oe));
        }
    } else {
        obs.page_description = "App launcher";
        obs.elements = launcher_elements(device);
        for (const auto& e : obs.elements) texts.push_back(e.description);
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i) obs.ocr_text += " | ";
        obs.ocr_text += texts[i];
    }
    return obs;
}

std::string render_observation(const Observation& obs) {
    std::ostringstream os;
    os << "Device: " << obs.device_id << " (" << to_string(obs.platform) << ")\n";
    os << "App: " << (obs.app.empty() ? "(home screen)" : obs.app) << "\n";
    os << "Page: " << obs.page_id << " - " << obs.page_description << "\n";
    os << "Elements:\n";
    for (const auto& e : obs.elements) {
        os << "- " << e.element_id << " [" << to_string(e.kind) << "] @ (" << e.box.x << "," << e.box.y << ","
           << e.box.width << "," << e.box.height << "): " << e.description;
        if (e.value) os << " = " << quote_string(*e.value);
        os << "\n";
    }
    os << "Screen text: " << obs.ocr_text << "\n";
    return os.str();
}

std::string observation_digest(const Observation& obs) {
    return StateSignature{fnv1a64(render_observation(obs))}.hex();
}

// ---------------------------------------------------------------------------
// Stepping

class SessionMutator {
public:
    explicit SessionMutator(SessionState& s) : s_(s) {}

    DeviceState& dev() { return s_.devices_.at(s_.active_device_); }
    const DeviceModel& model() const { return s_.world_->devices.at(s_.active_device_); }

    void go_to(Location next) {
        DeviceState& d = dev();
        if (d.location == next) return;
        d.nav_stack.push_back(d.location);
        d.location = std::move(next);
        d.focused.clear();
    }

    bool open_app(const std::string& app_name) {
        const auto& apps = model().apps;
        auto it = apps.find(app_name);
        if (it == apps.end()) return false;
        Location next{app_name, it->second.initial_page};
        if (dev().location == next) return false;
        go_to(std::move(next));
        return true;
    }

    void set_field(const std::string& element_id, const std::string& value) {
        const Location& loc = dev().location;
        const PageModel* page = current_page(*s_.world_, s_.active_device_, loc);
        const SimElement* el = page ? page->find(element_id) : nullptr;
        if (!el) return;
        auto key = field_key(s_.active_device_, loc.app, loc.page, element_id);
        if (value == el->initial_value) s_.fields_.erase(key);
        else s_.fields_[key] = value;
    }

    std::string field(const std::string& element_id) const {
        const Location& loc = s_.devices_.at(s_.active_device_).location;
        return s_.field_value(s_.active_device_, loc.app, loc.page, element_id).value_or("");
    }

    void apply(const std::vector<Effect>& effects, const std::string* typed) {
        for (const auto& fx : effects) {
            switch (fx.kind) {
            case Effect::Kind::navigate: {
                Location next{dev().location.app, fx.target};
                go_to(std::move(next));
                break;
            }
            case Effect::Kind::set_field: set_field(fx.target, fx.value.value_or("")); break;
            case Effect::Kind::append_to_store: {
                std::string text;
                if (fx.value) text = *fx.value;
                else if (!fx.from_field.empty()) text = field(fx.from_field);
                else if (typed) text = *typed;
                s_.stores_[fx.target].push_back(std::move(text));
                break;
            }
            case Effect::Kind::open_app: open_app(fx.target); break;
            }
        }
    }

    // Returns whether anything changed.
    bool tap_element(const std::string& element_id, StepFlags& flags) {
        DeviceState& d = dev();
        if (d.location.app.empty()) {
            for (const auto& [name, _] : model().apps) {
                if (launcher_id(name) == element_id) return open_app(name);
            }
            flags.invalid_target = true;
            return false;
        }
        const PageModel* page = current_page(*s_.world_, s_.active_device_, d.location);
        const SimElement* el = page ? page->find(element_id) : nullptr;
        if (!el) {
            flags.invalid_target = true;
            return false;
        }
        auto it = el->transitions.find(Trigger::tap);
        if (it != el->transitions.end() && !it->second.empty()) {
            apply(it->second, nullptr);
            return true;
        }
        if (el->kind == ElementKind::text_field && d.focused != el->element_id) {
            d.focused = el->element_id;
            return true;
        }
        return false;
    }

    bool tap_xy(int x, int y, StepFlags& flags) {
        const DeviceModel& m = model();
        if (x < 0 || y < 0 || x >= m.width || y >= m.height) {
            flags.out_of_range = true;
            return false;
        }
        Observation obs = observe(s_);
        for (const auto& e : obs.elements) {
            if (e.box.contains(x, y)) return tap_element(e.element_id, flags);
        }
        flags.invalid_target = true;
        return false;
    }

    bool type_text(const std::string& text, StepFlags& flags) {
        DeviceState& d = dev();
        const PageModel* page = current_page(*s_.world_, s_.active_device_, d.location);
        const SimElement* target = nullptr;
        if (page) {
            if (!d.focused.empty()) target = page->find(d.focused);
            if (!target) {
                for (const auto& e : page->elements) {
                    if (e.kind == ElementKind::text_field) {
                        target = &e;
                        break;
                    }
                }
            }
        }
        if (!target) {
            flags.invalid_target = true;
            return false;
        }
        set_field(target->element_id, text);
        auto it = target->transitions.find(Trigger::type);
        if (it != target->transitions.end()) apply(it->second, &text);
        return true;
    }

    bool switch_device(const std::string& device_id, StepFlags& flags) {
        if (!s_.world_->devices.count(device_id)) {
            flags.invalid_target = true;
            return false;
        }
        if (s_.active_device_ == device_id) return false;
        s_.active_device_ = device_id;
        return true;
    }

    bool back() {
        DeviceState& d = dev();
        if (!d.nav_stack.empty()) {
            d.location = d.nav_stack.back();
            d.nav_stack.pop_back();
            d.focused.clear();
            return true;
        }
        if (!d.location.app.empty()) {
            d.location = Location{};
            d.focused.clear();
            return true;
        }
        return false;
    }

    StepResult finish(StateSignature pre, StepFlags flags) {
        ++s_.step_count_;
        StepResult result;
        result.pre = pre;
        result.post = state_signature(s_);
        flags.revisit = s_.visited_.count(result.post) > 0;
        ++s_.visited_[result.post];
        if (s_.terminal_ == Terminal::none && s_.step_count_ >= s_.max_steps_) {
            s_.terminal_ = Terminal::max_steps_reached;
        }
        result.flags = flags;
        result.terminal = s_.terminal_;
        result.observation = observe(s_);
        return result;
    }

    SessionState& s_;
};

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

StepResult step(SessionState& state, const Action& action) {
    if (state.terminal_ != Terminal::none) {
        throw SessionTerminated("session already ended (" + std::string(to_string(state.terminal_)) + ")");
    }
    SessionMutator m(state);
    const StateSignature pre = state_signature(state);
    StepFlags flags;
    flags.effect_applied = std::visit(overloaded{
                                          [&](const Tap& a) { return m.tap_element(a.element_id, flags); },
                                          [&](const TapXY& a) { return m.tap_xy(a.x, a.y, flags); },
                                          [&](const TypeText& a) { return m.type_text(a.text, flags); },
                                          [&](const OpenApp& a) {
                                              if (!m.model().apps.count(a.app_name)) {
                                                  flags.invalid_target = true;
                                                  return false;
                                              }
                                              return m.open_app(a.app_name);
                                          },
                                          [&](const SwitchDevice& a) { return m.switch_device(a.device_id, flags); },
                                          [&](const Back&) { return m.back(); },
                                          [&](const Done&) {
                                              state.terminal_ = Terminal::done_signaled;
                                              return false;
                                          },
                                      },
                                      action);
    return m.finish(pre, flags);
}

StepResult consume_unparsed_step(SessionState& state) {
    if (state.terminal_ != Terminal::none) {
        throw SessionTerminated("session already ended (" + std::string(to_string(state.terminal_)) + ")");
    }
    SessionMutator m(state);
    StepFlags flags;
    flags.invalid_target = true;
    return m.finish(state_signature(state), flags);
}

} // namespace kgce
