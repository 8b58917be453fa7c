#pragma once

#include <stdexcept>
#include <string>

namespace wproj {

// Bad user-supplied data or arguments (CLI exit code 2).
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failures (CLI exit code 4).
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wproj
