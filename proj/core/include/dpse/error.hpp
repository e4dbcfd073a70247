#pragma once

#include <stdexcept>
#include <string>

namespace dpse {

/// File system or file-format failure (unreadable, truncated, bad magic).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced NaN/Inf or otherwise left its valid domain.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpse
