#pragma once

// Shared fixture programs and file helpers.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sxcad/dsl.hpp"
#include "sxcad/ir.hpp"

namespace sxcad::test {

inline std::filesystem::path data_dir() { return SXCAD_TEST_DATA_DIR; }
inline std::filesystem::path prompt_dir() { return SXCAD_PROMPT_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CadProgram parse_file(const std::filesystem::path& path) {
  ParseResult r = parse(read_file(path));
  if (!r.ok()) throw std::runtime_error("fixture does not parse: " + path.string());
  return *r.program;
}

inline CadProgram three_cubes() { return parse_file(data_dir() / "three_cubes.cad"); }
inline CadProgram backrest() { return parse_file(data_dir() / "backrest.cad"); }

inline Loop unit_square() { return {Line({1, 0}), Line({1, 1}), Line({0, 1}), Line({0, 0})}; }

/// Unit square extruded by 1 along +z with the identity Euler frame: [0,1]^3.
inline CadProgram unit_cube(std::string label = "cube") {
  return CadProgram({Part(label, {Block{Profile(unit_square()), ExtrudeCommand(EulerFrame{}, {0, 0, 0}, 1.0)}})});
}

}  // namespace sxcad::test
