#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace kgce {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable tag (e.g. "PredecessorIncomplete") used by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define KGCE_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

// task-graph
KGCE_DEFINE_ERROR(UnknownNode);
KGCE_DEFINE_ERROR(PredecessorIncomplete);
KGCE_DEFINE_ERROR(CyclicGraph);
KGCE_DEFINE_ERROR(InvalidTask);

// task-synthesis
KGCE_DEFINE_ERROR(MissingBinding);
KGCE_DEFINE_ERROR(UnknownPlaceholder);
KGCE_DEFINE_ERROR(InvalidTemplate);
KGCE_DEFINE_ERROR(CycleIntroduced);
KGCE_DEFINE_ERROR(BadBridgeReference);

// documents
KGCE_DEFINE_ERROR(ParseError);

// env-sim
KGCE_DEFINE_ERROR(PlatformUnavailable);
KGCE_DEFINE_ERROR(SessionTerminated);
KGCE_DEFINE_ERROR(InvalidWorld);

// agent
KGCE_DEFINE_ERROR(ScriptExhausted);
KGCE_DEFINE_ERROR(TransportError);

// evaluation
KGCE_DEFINE_ERROR(InvariantViolation);
KGCE_DEFINE_ERROR(UnknownChecker);

// analysis
KGCE_DEFINE_ERROR(EmptyRun);
KGCE_DEFINE_ERROR(InsufficientData);
KGCE_DEFINE_ERROR(UnsupportedFormat);

// runner
KGCE_DEFINE_ERROR(ConfigError);

#undef KGCE_DEFINE_ERROR

/// Schema validation failure; `path()` points at the offending field
/// (e.g. "packages[0].pages[1].elements[2].position.width").
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string path, const std::string& message)
        : Error("SchemaViolation", path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace kgce
