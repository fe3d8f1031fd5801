#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sxcad {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a type invariant at construction time.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Geometric kernel failures (degenerate polygons, non-watertight meshes, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Compilation of a program failed; carries the offending part/block.
class CompileError : public Error {
 public:
  CompileError(int part, int block, const std::string& message)
      : Error("part " + std::to_string(part) + ", block " + std::to_string(block) + ": " + message),
        part_(part),
        block_(block) {}

  int part() const { return part_; }
  int block() const { return block_; }

 private:
  int part_;
  int block_;
};

/// Malformed JSON / file content that is not CAD source text.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Fitting and assignment failures (collinear samples, NaN costs, ...).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Provider misconfiguration detected before any network activity.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Provider lookup / response failure (missing fixture, bad status, ...).
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Network failure after all retries; carries one entry per attempt.
class TransportError : public ProviderError {
 public:
  TransportError(const std::string& message, std::vector<std::string> attempts)
      : ProviderError(message), attempts_(std::move(attempts)) {}

  const std::vector<std::string>& attempts() const { return attempts_; }

 private:
  std::vector<std::string> attempts_;
};

}  // namespace sxcad
