#pragma once

#include <stdexcept>
#include <string>

namespace cmm {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files or option values.
class parse_error : public error {
 public:
  using error::error;
};

/// Incompatible dimensions or out-of-range indices.
class dim_error : public error {
 public:
  using error::error;
};

/// Filesystem failures (open/read/write).
class io_error : public error {
 public:
  using error::error;
};

/// Operation requested on a sketch of the wrong mode.
class mode_error : public error {
 public:
  using error::error;
};

/// Refusal to materialize something above the configured memory cap.
class cap_error : public error {
 public:
  using error::error;
};

}  // namespace cmm
