#pragma once

#include <stdexcept>
#include <string>

namespace bootagg {

/// Invalid argument values: out-of-domain inputs, bad parameters.
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iteration budget was exhausted. Signals a numerics bug, not user error.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (CSV, PNG, ...). Messages carry the offending location.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Images in a stack (or a mask) do not share dimensions.
class DimensionMismatchError : public std::invalid_argument {
public:
  explicit DimensionMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// External renderer misbehaved: bad exit status, wrong output, protocol breach.
class RendererError : public std::runtime_error {
public:
  explicit RendererError(const std::string& what) : std::runtime_error(what) {}
};

/// External renderer exceeded its time budget.
class RendererTimeout : public RendererError {
public:
  explicit RendererTimeout(const std::string& what) : RendererError(what) {}
};

/// Filesystem-level failure: unreadable input, unwritable output.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bootagg
