#pragma once

// JSON forms of programs, validation reports, diagnostics and metric reports.

#include <string>
#include <string_view>
#include <vector>

#include "sxcad/dsl.hpp"
#include "sxcad/ir.hpp"
#include "sxcad/metrics.hpp"
#include "sxcad/validate.hpp"

namespace sxcad {

/// `{"format": "sxcad-program/1", "parts": [...], "provenance": ...}`
std::string program_to_json(const CadProgram& program, int indent = 2);
/// Throws FormatError for malformed JSON and InvariantError for invalid values.
CadProgram program_from_json(std::string_view text);

std::string report_to_json(const ValidationReport& report, int indent = 2);
std::string diagnostics_to_json(const std::vector<SourceDiagnostic>& diagnostics, int indent = 2);
std::string metrics_to_json(const MetricsReport& report, int indent = 2);

/// Reads a program from either CAD text or program JSON (detected by a
/// leading '{'). Diagnostics are filled for text input.
ParseResult load_program(std::string_view content);

}  // namespace sxcad
