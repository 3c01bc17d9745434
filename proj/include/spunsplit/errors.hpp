#pragma once

#include <stdexcept>
#include <string>

namespace spunsplit {

// A guarantee of the construction failed. Always a bug.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// An enumeration would exceed its configured cap.
class SizeError : public std::runtime_error {
 public:
  explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

inline void ensure(bool condition, const std::string& what) {
  if (!condition) throw InvariantError(what);
}

}  // namespace spunsplit
