#include "sxcad/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sxcad/error.hpp"

namespace sxcad {
namespace {

Vec2 command_end(const SketchCommand& c) {
  if (const auto* line = std::get_if<Line>(&c)) return line->end();
  if (const auto* arc = std::get_if<Arc>(&c)) return arc->end();
  return std::get<Circle>(c).center();
}

double ring_scale(const Polyline& ring) {
  double s = 0.0;
  for (const Vec2& p : ring) s = std::max(s, norm(p - ring.front()));
  return std::max(s, 1e-300);
}

struct SegmentTest {
  double eps;  // tolerance on orientation values (area units)

  double orient(Vec2 a, Vec2 b, Vec2 c) const { return cross(b - a, c - a); }
  int sign(double v) const { return v > eps ? 1 : (v < -eps ? -1 : 0); }

  static bool within(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  }

  /// Touching or crossing; fills `at` with a representative point.
  bool intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d, Vec2* at) const {
    const double d1 = orient(c, d, a);
    const double d2 = orient(c, d, b);
    const double d3 = orient(a, b, c);
    const double d4 = orient(a, b, d);
    const int s1 = sign(d1), s2 = sign(d2), s3 = sign(d3), s4 = sign(d4);
    if (s1 * s2 < 0 && s3 * s4 < 0) {
      if (at) *at = a + (b - a) * (d1 / (d1 - d2));
      return true;
    }
    auto touch = [&](int s, Vec2 p, Vec2 q0, Vec2 q1) {
      if (s == 0 && within(q0, q1, p)) {
        if (at) *at = p;
        return true;
      }
      return false;
    };
    return touch(s1, a, c, d) || touch(s2, b, c, d) || touch(s3, c, a, b) || touch(s4, d, a, b);
  }
};

std::string point_text(Vec2 p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

/// Drops Line commands that do not move the pen. Returns the number dropped.
int drop_zero_length(Loop& loop, Vec2 start, double tol) {
  Loop out;
  Vec2 pen = start;
  int dropped = 0;
  for (const auto& cmd : loop) {
    if (std::holds_alternative<Line>(cmd) && norm(command_end(cmd) - pen) <= tol) {
      ++dropped;
      continue;
    }
    out.push_back(cmd);
    pen = command_end(cmd);
  }
  loop = std::move(out);
  return dropped;
}

class BlockChecker {
 public:
  BlockChecker(int part, int block, std::vector<Violation>& out) : part_(part), block_(block), out_(out) {}

  void add(std::string_view rule, Severity sev, std::string message) {
    out_.push_back({part_, block_, std::string(rule), sev, std::move(message)});
    if (sev == Severity::Error) failed_ = true;
  }
  bool failed() const { return failed_; }

  /// Tessellates one loop into a ring (closing point removed), or reports why not.
  std::optional<Polyline> ring(const Loop& loop, bool is_outer, double tess_tol, const char* what) {
    try {
      Polyline ring;
      if (is_circle_loop(loop)) {
        ring = sample_circle(std::get<Circle>(loop.front()), tess_tol);
      } else {
        ring = tessellate_chain(loop, loop_start(loop, is_outer), tess_tol);
        ring.pop_back();
      }
      // A crossing loop can cancel to zero area; report it as a crossing instead.
      if (ring.size() < 3 || (std::abs(signed_area(ring)) <= 0.0 && !find_self_intersection(ring))) {
        add(rules::kDegenerateLoop, Severity::Error, std::string(what) + " loop encloses no area");
        return std::nullopt;
      }
      return ring;
    } catch (const GeometryError& e) {
      const std::string msg = e.what();
      const bool arc_issue = msg.find("arc") != std::string::npos;
      add(arc_issue ? rules::kAttributeRange : rules::kDegenerateLoop, Severity::Error, std::string(what) + " loop: " + msg);
      return std::nullopt;
    }
  }

 private:
  int part_;
  int block_;
  std::vector<Violation>& out_;
  bool failed_ = false;
};

}  // namespace

bool ValidationReport::has_errors() const { return error_count() > 0; }

int ValidationReport::error_count() const {
  return static_cast<int>(std::count_if(violations.begin(), violations.end(),
                                        [](const Violation& v) { return v.severity == Severity::Error; }));
}

Loop reverse_loop(const Loop& loop) {
  if (is_circle_loop(loop)) return loop;
  std::vector<Vec2> pts{{0.0, 0.0}};
  for (const auto& cmd : loop) pts.push_back(command_end(cmd));
  Loop out;
  out.reserve(loop.size());
  for (std::size_t i = loop.size(); i >= 1; --i) {
    const Vec2 target = pts[i - 1];
    if (const auto* arc = std::get_if<Arc>(&loop[i - 1])) {
      out.emplace_back(Arc(target, arc->sweep_deg(), 1 - arc->ccw_flag()));
    } else {
      out.emplace_back(Line(target));
    }
  }
  return out;
}

std::optional<SegmentHit> find_self_intersection(const Polyline& loop) {
  const std::size_t n = loop.size();
  if (n < 3) return std::nullopt;
  const double scale = ring_scale(loop);
  const SegmentTest test{1e-12 * scale * scale};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = loop[i];
    const Vec2 b = loop[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 c = loop[j];
      const Vec2 d = loop[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared vertex is fine; folding back along the same line is not.
        const Vec2 shared = j == i + 1 ? b : a;
        const Vec2 u = j == i + 1 ? a - shared : b - shared;
        const Vec2 w = j == i + 1 ? d - shared : c - shared;
        if (test.sign(cross(u, w)) == 0 && dot(u, w) > 0.0) return SegmentHit{i, j, shared};
        continue;
      }
      Vec2 at;
      if (test.intersect(a, b, c, d, &at)) return SegmentHit{i, j, at};
    }
  }
  return std::nullopt;
}

bool point_in_polygon(Vec2 p, const Polyline& loop) {
  bool inside = false;
  const std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = loop[i];
    const Vec2 b = loop[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool loops_intersect(const Polyline& a, const Polyline& b) {
  const double scale = std::max(ring_scale(a), ring_scale(b));
  const SegmentTest test{1e-12 * scale * scale};
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (test.intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()], nullptr)) return true;
    }
  }
  return false;
}

ValidationReport validate(const CadProgram& program, const Tolerances& tol) {
  ValidationReport report;
  bool repaired_any = false;
  std::vector<Part> parts;
  parts.reserve(program.parts().size());

  for (std::size_t p = 0; p < program.parts().size(); ++p) {
    const Part& part = program.parts()[p];
    std::vector<Block> blocks;
    for (std::size_t b = 0; b < part.blocks().size(); ++b) {
      const Block& block = part.blocks()[b];
      BlockChecker check(static_cast<int>(p), static_cast<int>(b), report.violations);

      const double diag = loop_diagonal(block.profile.outer(), true);
      const double closure_tol = tol.closure_for(diag);
      const double tess_tol = tol.tess_for(diag);
      if (!(closure_tol > 0.0) || !(tess_tol > 0.0)) {
        check.add(rules::kDegenerateLoop, Severity::Error, "outer loop has zero extent");
        blocks.push_back(block);
        continue;
      }

      Loop outer = block.profile.outer();
      std::vector<Loop> cuts = block.profile.cuts();
      if (!is_circle_loop(outer)) {
        if (int n = drop_zero_length(outer, {0.0, 0.0}, closure_tol); n > 0) {
          check.add(rules::kZeroLengthSegment, Severity::Warning, std::to_string(n) + " zero-length segment(s) dropped");
          repaired_any = true;
        }
      }
      for (auto& cut : cuts) {
        if (is_circle_loop(cut)) continue;
        if (int n = drop_zero_length(cut, loop_start(cut, false), closure_tol); n > 0) {
          check.add(rules::kZeroLengthSegment, Severity::Warning,
                    std::to_string(n) + " zero-length segment(s) dropped from a cut loop");
          repaired_any = true;
        }
      }
      if (outer.empty() || std::any_of(cuts.begin(), cuts.end(), [](const Loop& l) { return l.empty(); })) {
        check.add(rules::kDegenerateLoop, Severity::Error, "loop has no non-degenerate curves");
        blocks.push_back(block);
        continue;
      }

      // (a) closure
      if (!is_circle_loop(outer)) {
        const Vec2 end = command_end(outer.back());
        if (norm(end) > closure_tol) {
          check.add(rules::kClosure, Severity::Error,
                    "outer loop ends at " + point_text(end) + ", not at the origin");
        }
      }

      std::optional<Polyline> outer_ring;
      if (!check.failed()) outer_ring = check.ring(outer, true, tess_tol, "outer");

      if (outer_ring) {
        // (c) self-intersection
        if (auto hit = find_self_intersection(*outer_ring)) {
          check.add(rules::kSelfIntersection, Severity::Error,
                    "outer loop intersects itself at " + point_text(hit->point));
        } else if (signed_area(*outer_ring) < 0.0) {
          // (b) orientation
          check.add(rules::kOrientation, Severity::Warning, "outer loop is clockwise; reversed");
          outer = reverse_loop(outer);
          std::reverse(outer_ring->begin(), outer_ring->end());
          repaired_any = true;
        }
      }

      // (d) cut containment
      std::vector<Polyline> cut_rings;
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        auto ring = check.ring(cuts[c], false, tess_tol, "cut");
        if (!ring) continue;
        if (auto hit = find_self_intersection(*ring)) {
          check.add(rules::kSelfIntersection, Severity::Error,
                    "cut loop " + std::to_string(c) + " intersects itself at " + point_text(hit->point));
          continue;
        }
        if (outer_ring) {
          const bool inside = std::all_of(ring->begin(), ring->end(),
                                          [&](Vec2 v) { return point_in_polygon(v, *outer_ring); });
          if (!inside || loops_intersect(*ring, *outer_ring)) {
            check.add(rules::kCutContainment, Severity::Error,
                      "cut loop " + std::to_string(c) + " is not strictly inside the outer loop");
          }
        }
        for (std::size_t k = 0; k < cut_rings.size(); ++k) {
          if (loops_intersect(*ring, cut_rings[k]) || point_in_polygon(ring->front(), cut_rings[k]) ||
              point_in_polygon(cut_rings[k].front(), *ring)) {
            check.add(rules::kCutOverlap, Severity::Error,
                      "cut loops " + std::to_string(k) + " and " + std::to_string(c) + " overlap");
          }
        }
        cut_rings.push_back(std::move(*ring));
      }

      if (check.failed()) {
        blocks.push_back(block);
      } else {
        blocks.push_back(Block{Profile(std::move(outer), std::move(cuts)), block.extrude});
      }
    }
    parts.emplace_back(part.label(), std::move(blocks));
  }

  report.valid = !report.has_errors();
  if (report.valid && repaired_any) report.repaired = CadProgram(std::move(parts), program.provenance());
  return report;
}

ValidationReport validate(const CadProgram& program, double closure_tol, double tess_tol) {
  if (!(closure_tol > 0.0) || !(tess_tol > 0.0)) throw InvariantError("tolerances must be positive");
  return validate(program, Tolerances::absolute(closure_tol, tess_tol));
}

}  // namespace sxcad
