#pragma once

#include <stdexcept>
#include <string>

namespace fedmr {

enum class ErrorCode {
    invalid_argument,
    shape_mismatch,
    parse_error,
    validation_error,
    io_error,
};

// All engine failures surface as this exception type. The C API layer
// translate these into error codes plus a thread-local message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace fedmr
