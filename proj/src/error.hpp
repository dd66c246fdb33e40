#pragma once
#include <stdexcept>
#include <string>

namespace rlf {

// Bad user input: missing files, malformed data, invalid config. Exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape disagreement between a model and the data offered to it. Exit code 3.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rlf
