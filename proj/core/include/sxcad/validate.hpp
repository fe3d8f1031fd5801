#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sxcad/geom.hpp"
#include "sxcad/ir.hpp"

namespace sxcad {

enum class Severity { Warning, Error };

/// Rule identifiers reported by validate().
namespace rules {
inline constexpr std::string_view kClosure = "closure";
inline constexpr std::string_view kOrientation = "orientation";
inline constexpr std::string_view kSelfIntersection = "self_intersection";
inline constexpr std::string_view kCutContainment = "cut_containment";
inline constexpr std::string_view kCutOverlap = "cut_overlap";
inline constexpr std::string_view kAttributeRange = "attribute_range";
inline constexpr std::string_view kZeroLengthSegment = "zero_length_segment";
inline constexpr std::string_view kDegenerateLoop = "degenerate_loop";
}  // namespace rules

struct Violation {
  int part = 0;
  int block = 0;
  std::string rule;
  Severity severity = Severity::Error;
  std::string message;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;
  /// Present when warning-class repairs (loop reversal, dropping zero-length
  /// segments) were applied and the result has no error-class violations.
  std::optional<CadProgram> repaired;

  bool has_errors() const;
  int error_count() const;
  /// The program compile() should use: the repaired one when available.
  const CadProgram& effective(const CadProgram& original) const { return repaired ? *repaired : original; }
};

ValidationReport validate(const CadProgram& program, const Tolerances& tol = {});
ValidationReport validate(const CadProgram& program, double closure_tol, double tess_tol);

/// Loop with its pen path reversed (commands reversed, arc flags flipped).
/// Only defined for closed Line/Arc chains that start at the origin.
Loop reverse_loop(const Loop& loop);

struct SegmentHit {
  std::size_t first = 0;
  std::size_t second = 0;
  Vec2 point;
};

/// First pair of non-adjacent edges of the closed polyline that touch or
/// cross, plus adjacent edges that fold back onto each other. O(n^2).
std::optional<SegmentHit> find_self_intersection(const Polyline& loop);

/// Even-odd point-in-polygon test.
bool point_in_polygon(Vec2 p, const Polyline& loop);

/// Whether two closed polylines have intersecting edges.
bool loops_intersect(const Polyline& a, const Polyline& b);

}  // namespace sxcad
