#pragma once

#include "kgce/action.hpp"
#include "kgce/json_util.hpp"
#include "kgce/knowledge_base.hpp"
#include "kgce/task_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kWorldSchema = "kgce-world/1";
inline constexpr std::string_view kHomePage = "home";

enum class ElementKind { button, text_field, list_item, static_text };
enum class Trigger { tap, type };

std::string_view to_string(ElementKind kind);

struct Effect {
    enum class Kind { navigate, set_field, append_to_store, open_app };

    Kind kind = Kind::navigate;
    /// Page, field element, store name, or app name depending on `kind`.
    std::string target;
    std::optional<std::string> value;
    /// For append_to_store: copy the current value of this field.
    std::string from_field;
};

struct SimElement {
    std::string element_id;
    Box box;
    ElementKind kind = ElementKind::button;
    std::string description;
    std::string initial_value;
    std::map<Trigger, std::vector<Effect>> transitions;
};

struct PageModel {
    std::string description;
    std::vector<SimElement> elements;

    const SimElement* find(std::string_view element_id) const;
};

struct AppModel {
    std::map<std::string, PageModel> pages;
    std::string initial_page;
};

struct DeviceModel {
    Platform platform = Platform::mobile;
    int width = 0;
    int height = 0;
    std::map<std::string, AppModel> apps;
};

struct WorldModel {
    std::map<std::string, DeviceModel> devices;
};

/// Throws InvalidWorld / SchemaViolation.
void validate_world(const WorldModel& world);
WorldModel world_from_json(const nlohmann::json& doc);
nlohmann::json world_to_json(const WorldModel& world);
WorldModel load_world(const std::filesystem::path& file);

/// Launcher element id for `app_name` on the home screen.
std::string launcher_id(std::string_view app_name);

/// 64-bit FNV-1a digest of a canonical state rendering.
struct StateSignature {
    std::uint64_t value = 0;

    std::string hex() const;
    static std::optional<StateSignature> from_hex(std::string_view text);
    auto operator<=>(const StateSignature&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

struct ObservedElement {
    std::string element_id;
    Box box;
    ElementKind kind = ElementKind::button;
    std::string description;
    std::optional<std::string> value;

    bool operator==(const ObservedElement&) const = default;
};

struct Observation {
    std::string device_id;
    Platform platform = Platform::mobile;
    /// Empty on the home screen.
    std::string app;
    std::string page_id;
    std::string page_description;
    std::vector<ObservedElement> elements;
    std::string ocr_text;

    bool operator==(const Observation&) const = default;
};

/// Stable textual rendering, used for prompts and digests.
std::string render_observation(const Observation& obs);
std::string observation_digest(const Observation& obs);

enum class Terminal { none, done_signaled, max_steps_reached };
std::string_view to_string(Terminal terminal);

struct StepFlags {
    bool out_of_range = false;
    bool invalid_target = false;
    bool effect_applied = false;
    bool revisit = false;

    bool operator==(const StepFlags&) const = default;
};

struct StepResult {
    Observation observation;
    StepFlags flags;
    Terminal terminal = Terminal::none;
    StateSignature pre;
    StateSignature post;
};

struct Location {
    std::string app;  // empty = home screen
    std::string page = std::string(kHomePage);

    bool operator==(const Location&) const = default;
};

struct DeviceState {
    Location location;
    std::vector<Location> nav_stack;
    std::string focused;

    bool operator==(const DeviceState&) const = default;
};

/// One episode's simulated state. Single owner; mutate only through step().
class SessionState {
public:
    SessionState(std::shared_ptr<const WorldModel> world, int max_steps);

    const WorldModel& world() const { return *world_; }
    const std::string& active_device() const { return active_device_; }
    const std::map<std::string, DeviceState>& devices() const { return devices_; }
    const DeviceState& device_state(const std::string& device_id) const;
    const std::map<std::string, std::vector<std::string>>& stores() const { return stores_; }
    int step_count() const { return step_count_; }
    int max_steps() const { return max_steps_; }
    Terminal terminal() const { return terminal_; }
    const std::map<StateSignature, int>& visited() const { return visited_; }

    /// Current value of a field, falling back to the element's initial value.
    std::optional<std::string> field_value(const std::string& device_id, const std::string& app,
                                           const std::string& page, const std::string& element_id) const;
    /// Only fields whose value differs from the initial one.
    const std::map<std::string, std::string>& field_overrides() const { return fields_; }

    bool operator==(const SessionState&) const;

private:
    friend SessionState reset(std::shared_ptr<const WorldModel>, const TaskSpec&);
    friend StepResult step(SessionState&, const Action&);
    friend StepResult consume_unparsed_step(SessionState&);
    friend class SessionMutator;

    std::shared_ptr<const WorldModel> world_;
    std::string active_device_;
    std::map<std::string, DeviceState> devices_;
    std::map<std::string, std::string> fields_;
    std::map<std::string, std::vector<std::string>> stores_;
    int step_count_ = 0;
    int max_steps_ = kDefaultMaxSteps;
    Terminal terminal_ = Terminal::none;
    std::map<StateSignature, int> visited_;
};

/// All devices at home, stores empty. The active device is the
/// lexicographically first device of the task's first platform.
/// Throws PlatformUnavailable.
SessionState reset(std::shared_ptr<const WorldModel> world, const TaskSpec& task);

/// Executes one action. Throws SessionTerminated once a terminal state
/// has been reached.
StepResult step(SessionState& state, const Action& action);

/// Burns one step with no effect (an unparseable agent reply); flagged
/// invalid_target.
StepResult consume_unparsed_step(SessionState& state);

StateSignature state_signature(const SessionState& state);

Observation observe(const SessionState& state);

} // namespace kgce
