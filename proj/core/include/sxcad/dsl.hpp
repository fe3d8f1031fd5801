#pragma once

// Text form of CAD programs, as emitted by vision-language models:
//
//   # seat
//   <SOL>
//   L: (2,0)
//   A: (0,5,120,1)
//   <CUT>
//   R: (1.5,2,1)
//   E: (nx,ny,nz,x,y,z,extent,NewBody,OneSided)
//
// Prose outside command blocks is skipped with a warning; anything
// unrecognized inside a block is an error.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sxcad/ir.hpp"
#include "sxcad/validate.hpp"

namespace sxcad {

struct SourceDiagnostic {
  Severity severity = Severity::Error;
  int line = 1;  ///< 1-based
  std::string message;
  std::string snippet;
};

struct ParseResult {
  std::optional<CadProgram> program;
  std::vector<SourceDiagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
  std::vector<SourceDiagnostic> errors() const;
};

ParseResult parse(std::string_view source);

/// Canonical text: one command per line, `# <label>` before each part,
/// frames in normal form, shortest round-trip decimals.
std::string print(const CadProgram& program);

/// Shortest decimal (never exponent notation) that parses back to `value`.
std::string format_number(double value);

}  // namespace sxcad
