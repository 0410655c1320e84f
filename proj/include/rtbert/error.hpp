#pragma once

#include <stdexcept>
#include <string>

namespace rtbert {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown user id, unknown model id and similar lookups.
struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid arguments or data that violate an operation's precondition.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  ConfigError(std::string field_path, const std::string& what)
      : std::runtime_error(field_path + ": " + what), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace rtbert
