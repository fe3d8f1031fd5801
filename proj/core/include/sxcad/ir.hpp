#pragma once

// In-memory representation of sketch-extrude CAD programs.
//
// A program is an ordered list of semantically labeled parts. Each part owns
// one or more blocks; a block is a 2D profile (outer loop plus optional hole
// loops) and the one-sided extrusion that turns it into a solid. Every type
// validates its invariants on construction and throws InvariantError.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sxcad/vec.hpp"

namespace sxcad {

class Line {
 public:
  explicit Line(Vec2 end);

  Vec2 end() const { return end_; }
  bool operator==(const Line&) const = default;

 private:
  Vec2 end_;
};

/// Circular arc from the current pen position to `end`, sweeping `sweep_deg`
/// degrees counter-clockwise when `ccw_flag` is 1 and clockwise when 0.
class Arc {
 public:
  Arc(Vec2 end, double sweep_deg, int ccw_flag);

  Vec2 end() const { return end_; }
  double sweep_deg() const { return sweep_deg_; }
  int ccw_flag() const { return ccw_flag_; }
  bool ccw() const { return ccw_flag_ == 1; }
  bool operator==(const Arc&) const = default;

 private:
  Vec2 end_;
  double sweep_deg_;
  int ccw_flag_;
};

class Circle {
 public:
  Circle(Vec2 center, double radius);

  Vec2 center() const { return center_; }
  double radius() const { return radius_; }
  bool operator==(const Circle&) const = default;

 private:
  Vec2 center_;
  double radius_;
};

using SketchCommand = std::variant<Line, Arc, Circle>;
using Loop = std::vector<SketchCommand>;

/// True when the loop is a single circle.
bool is_circle_loop(const Loop& loop);

/// Outer loop plus hole loops, all in the sketch plane of the owning block.
///
/// Structural rules only: a loop is either one Circle or a non-empty chain of
/// Lines/Arcs. Closure, orientation and containment are `validate`'s job, so a
/// clockwise or open profile can still be represented and reported.
class Profile {
 public:
  explicit Profile(Loop outer, std::vector<Loop> cuts = {});

  const Loop& outer() const { return outer_; }
  const std::vector<Loop>& cuts() const { return cuts_; }
  bool operator==(const Profile&) const = default;

 private:
  Loop outer_;
  std::vector<Loop> cuts_;
};

/// Extrusion frame given as intrinsic Z-Y-X Euler angles in degrees.
struct EulerFrame {
  double alpha_deg = 0.0;
  double theta_deg = 0.0;
  double gamma_deg = 0.0;
  bool operator==(const EulerFrame&) const = default;
};

/// Extrusion frame given by its plane normal; normalized on construction.
class NormalFrame {
 public:
  explicit NormalFrame(Vec3 normal);

  Vec3 normal() const { return normal_; }
  bool operator==(const NormalFrame&) const = default;

 private:
  Vec3 normal_;
};

using FrameSpec = std::variant<EulerFrame, NormalFrame>;

enum class BooleanOp { NewBody, Cut };
enum class ExtrusionType { OneSided };

std::string_view to_string(BooleanOp op);
std::optional<BooleanOp> boolean_op_from_string(std::string_view text);

class ExtrudeCommand {
 public:
  ExtrudeCommand(FrameSpec frame, Vec3 origin, double extent, BooleanOp op = BooleanOp::NewBody);

  const FrameSpec& frame() const { return frame_; }
  Vec3 origin() const { return origin_; }
  /// Signed distance along the frame normal; never zero.
  double extent() const { return extent_; }
  BooleanOp boolean_op() const { return op_; }
  ExtrusionType extrusion_type() const { return ExtrusionType::OneSided; }
  bool operator==(const ExtrudeCommand&) const = default;

 private:
  FrameSpec frame_;
  Vec3 origin_;
  double extent_;
  BooleanOp op_;
};

struct Block {
  Profile profile;
  ExtrudeCommand extrude;
  bool operator==(const Block&) const = default;
};

/// Lower-cases and collapses runs of whitespace; used for all part labels.
std::string normalize_label(std::string_view label);

class Part {
 public:
  Part(std::string_view label, std::vector<Block> blocks);

  const std::string& label() const { return label_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  bool operator==(const Part&) const = default;

 private:
  std::string label_;
  std::vector<Block> blocks_;
};

class CadProgram {
 public:
  explicit CadProgram(std::vector<Part> parts, std::optional<std::string> provenance = std::nullopt);

  const std::vector<Part>& parts() const { return parts_; }
  /// Hex hash of the source text the program was parsed from, when known.
  const std::optional<std::string>& provenance() const { return provenance_; }

  /// Structural equality; provenance is ignored.
  bool operator==(const CadProgram& other) const { return parts_ == other.parts_; }

 private:
  std::vector<Part> parts_;
  std::optional<std::string> provenance_;
};

/// Per part, the number of sketch commands plus extrude commands.
std::vector<int> command_count(const CadProgram& program);

/// Tight AABB of all NewBody solids, from the compiled mesh. Throws
/// CompileError when compilation fails and GeometryError when the program
/// has no NewBody geometry.
Aabb bounding_box(const CadProgram& program);

/// Attribute-wise comparison with absolute tolerance `tol`.
bool approx_equal(const CadProgram& a, const CadProgram& b, double tol);

}  // namespace sxcad
