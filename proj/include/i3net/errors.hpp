#pragma once

#include <stdexcept>
#include <string>

namespace i3net {

// Exit-code mapping used by the CLI:
//   0 success, 2 config/validation, 3 runtime/numerical, 4 I/O (incl. malformed files).

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const FormatError*>(&e)) return 4;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    return 3;
}

} // namespace i3net
