#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cyclecirc {

// All library failures carry a stable machine-readable code ("Reducible",
// "UnknownState", ...) next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void raise(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

} // namespace cyclecirc
