#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace ctrb {

// Exit-code contract: usage errors map to 1, data errors to 2,
// verification failures to 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

inline void warn(const std::string& msg) {
  std::cerr << "warning: " << msg << "\n";
}

}  // namespace ctrb
