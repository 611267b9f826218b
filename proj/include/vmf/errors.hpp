#pragma once

#include <stdexcept>
#include <string>

namespace vmf {

// Three error families. ConfigError covers bad arguments and bad run
// configuration, DataError covers unreadable or inconsistent input files,
// NumericError covers math that cannot proceed (zero-norm vectors,
// non-finite losses, domain violations). The CLI maps them to distinct
// exit codes, everything else reports through what().

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroNormError : NumericError {
  explicit ZeroNormError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace vmf
