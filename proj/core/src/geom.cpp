#include "sxcad/geom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "sxcad/error.hpp"
#include "sxcad/rng.hpp"
#include "sxcad/validate.hpp"

namespace sxcad {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Vec2 command_end(const SketchCommand& c) {
  if (const auto* line = std::get_if<Line>(&c)) return line->end();
  if (const auto* arc = std::get_if<Arc>(&c)) return arc->end();
  return std::get<Circle>(c).center();
}

/// Largest chord angle keeping the sagitta r(1 - cos(t/2)) within tol.
double max_chord_angle(double radius, double tess_tol) {
  const double ratio = std::max(0.0, 1.0 - tess_tol / radius);
  return std::min(2.0 * std::acos(ratio), kPi / 4.0);
}

double ring_scale(const Polyline& ring) {
  double lo_x = HUGE_VAL, lo_y = HUGE_VAL, hi_x = -HUGE_VAL, hi_y = -HUGE_VAL;
  for (const Vec2& p : ring) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  return ring.empty() ? 0.0 : std::hypot(hi_x - lo_x, hi_y - lo_y);
}

/// Drops consecutive duplicates (including the wrap-around pair).
void drop_duplicates(Polyline& ring, double eps) {
  Polyline out;
  out.reserve(ring.size());
  for (const Vec2& p : ring) {
    if (out.empty() || norm(p - out.back()) > eps) out.push_back(p);
  }
  while (out.size() > 1 && norm(out.front() - out.back()) <= eps) out.pop_back();
  ring = std::move(out);
}

/// Removes vertices lying on the line through their neighbours.
void drop_collinear(Polyline& ring, double eps) {
  bool changed = true;
  while (changed && ring.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < ring.size() && ring.size() > 3; ++i) {
      const Vec2 a = ring[(i + ring.size() - 1) % ring.size()];
      const Vec2 p = ring[i];
      const Vec2 b = ring[(i + 1) % ring.size()];
      const double len = norm(b - a);
      const double dist = len > 0.0 ? std::abs(cross(b - a, p - a)) / len : norm(p - a);
      if (dist <= eps) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
}

double raw_signed_area(const Polyline& ring) {
  if (ring.size() < 3) return 0.0;
  const Vec2 o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) twice += cross(ring[i] - o, ring[i + 1] - o);
  return 0.5 * twice;
}

// ---------------------------------------------------------------------------
// Ear clipping with hole bridging.

class EarClipper {
 public:
  explicit EarClipper(const std::vector<Vec2>& pts) : pts_(pts) {}

  /// Splices `hole` (a CW index cycle) into `poly` (a CCW index cycle).
  void bridge(std::vector<std::uint32_t>& poly, const std::vector<std::uint32_t>& hole) const {
    std::size_t m_pos = 0;
    for (std::size_t i = 1; i < hole.size(); ++i) {
      const Vec2 a = pts_[hole[i]];
      const Vec2 b = pts_[hole[m_pos]];
      if (a.x > b.x || (a.x == b.x && a.y < b.y)) m_pos = i;
    }
    const Vec2 m = pts_[hole[m_pos]];

    // Nearest edge hit by the ray m + t(1, 0), t >= 0. Edges seen from the
    // interior on their left go upward where the ray leaves the region.
    double best_x = HUGE_VAL;
    std::optional<std::size_t> hit_vertex;
    std::optional<std::size_t> hit_edge;
    Vec2 hit_point;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 a = pts_[poly[i]];
      const Vec2 b = pts_[poly[(i + 1) % poly.size()]];
      if (!(a.y <= m.y && m.y <= b.y && a.y < b.y)) continue;
      const double x = a.x + (m.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < m.x || x >= best_x) continue;
      best_x = x;
      hit_point = {x, m.y};
      hit_edge = i;
      hit_vertex.reset();
      if (a.y == m.y && a.x == x) hit_vertex = i;
      if (b.y == m.y && b.x == x) hit_vertex = (i + 1) % poly.size();
    }
    if (!hit_edge) throw GeometryError("hole is not inside the outer loop");

    std::size_t target;
    if (hit_vertex) {
      target = *hit_vertex;
    } else {
      const std::size_t i = *hit_edge;
      const std::size_t j = (i + 1) % poly.size();
      target = pts_[poly[i]].x > pts_[poly[j]].x ? i : j;
      const Vec2 p = pts_[poly[target]];
      // Reflex vertices inside triangle (m, hit, p) may block the view of p;
      // take the one closest in angle to the ray.
      double best_angle = HUGE_VAL;
      double best_dist = HUGE_VAL;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2 r = pts_[poly[k]];
        if (r == p || !is_reflex(poly, k)) continue;
        if (!in_triangle(m, hit_point, p, r) && !in_triangle(m, p, hit_point, r)) continue;
        const double angle = std::abs(std::atan2(r.y - m.y, r.x - m.x));
        const double dist = norm(r - m);
        if (angle < best_angle || (angle == best_angle && dist < best_dist)) {
          best_angle = angle;
          best_dist = dist;
          target = k;
        }
      }
    }

    // The chosen vertex may occur several times after earlier bridges; use
    // the occurrence whose interior cone contains m.
    const std::uint32_t target_id = poly[target];
    for (std::size_t k = 0; k < poly.size(); ++k) {
      if (poly[k] != target_id) continue;
      if (in_cone(poly, k, m)) {
        target = k;
        break;
      }
    }

    std::vector<std::uint32_t> splice;
    splice.reserve(hole.size() + 2);
    for (std::size_t k = 0; k <= hole.size(); ++k) splice.push_back(hole[(m_pos + k) % hole.size()]);
    splice.push_back(poly[target]);
    poly.insert(poly.begin() + static_cast<std::ptrdiff_t>(target) + 1, splice.begin(), splice.end());
  }

  std::vector<std::array<std::uint32_t, 3>> clip(const std::vector<std::uint32_t>& poly) const {
    std::vector<std::array<std::uint32_t, 3>> tris;
    const std::size_t n = poly.size();
    if (n < 3) throw GeometryError("polygon has fewer than 3 vertices");
    std::vector<std::size_t> prev(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
      prev[i] = (i + n - 1) % n;
      next[i] = (i + 1) % n;
    }
    std::size_t remaining = n;
    std::size_t cur = 0;
    std::size_t stall = 0;
    while (remaining > 3) {
      const std::size_t a = prev[cur];
      const std::size_t c = next[cur];
      if (is_ear(poly, next, a, cur, c)) {
        tris.push_back({poly[a], poly[cur], poly[c]});
        next[a] = c;
        prev[c] = a;
        --remaining;
        cur = c;
        stall = 0;
        continue;
      }
      cur = c;
      if (++stall > remaining) {
        // Numerical dead end: clip the most convex vertex.
        std::size_t best = cur;
        double best_turn = -HUGE_VAL;
        std::size_t k = cur;
        for (std::size_t step = 0; step < remaining; ++step, k = next[k]) {
          const double t = turn(pts_[poly[prev[k]]], pts_[poly[k]], pts_[poly[next[k]]]);
          if (t > best_turn) {
            best_turn = t;
            best = k;
          }
        }
        if (!(best_turn > 0.0)) throw GeometryError("degenerate polygon: no convex vertex left");
        tris.push_back({poly[prev[best]], poly[best], poly[next[best]]});
        next[prev[best]] = next[best];
        prev[next[best]] = prev[best];
        cur = next[best];
        --remaining;
        stall = 0;
      }
    }
    const std::size_t a = prev[cur];
    const std::size_t c = next[cur];
    if (turn(pts_[poly[a]], pts_[poly[cur]], pts_[poly[c]]) > 0.0) tris.push_back({poly[a], poly[cur], poly[c]});
    return tris;
  }

 private:
  static double turn(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - b); }

  bool convex(Vec2 a, Vec2 b, Vec2 c) const {
    return turn(a, b, c) > 1e-14 * norm(b - a) * norm(c - b);
  }

  bool is_reflex(const std::vector<std::uint32_t>& poly, std::size_t k) const {
    const std::size_t n = poly.size();
    return turn(pts_[poly[(k + n - 1) % n]], pts_[poly[k]], pts_[poly[(k + 1) % n]]) < 0.0;
  }

  static bool in_triangle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
  }

  bool in_cone(const std::vector<std::uint32_t>& poly, std::size_t k, Vec2 q) const {
    const std::size_t n = poly.size();
    const Vec2 a = pts_[poly[(k + n - 1) % n]];
    const Vec2 v = pts_[poly[k]];
    const Vec2 b = pts_[poly[(k + 1) % n]];
    const bool left_in = cross(v - a, q - v) > 0.0;
    const bool left_out = cross(b - v, q - v) > 0.0;
    return turn(a, v, b) >= 0.0 ? (left_in && left_out) : (left_in || left_out);
  }

  bool is_ear(const std::vector<std::uint32_t>& poly, const std::vector<std::size_t>& next, std::size_t ia,
              std::size_t ib, std::size_t ic) const {
    const Vec2 a = pts_[poly[ia]];
    const Vec2 b = pts_[poly[ib]];
    const Vec2 c = pts_[poly[ic]];
    if (!convex(a, b, c)) return false;
    for (std::size_t k = next[ic]; k != ia; k = next[k]) {
      const Vec2 r = pts_[poly[k]];
      if (r == a || r == b || r == c) continue;
      if (in_triangle(a, b, c, r)) return false;
    }
    return true;
  }

  const std::vector<Vec2>& pts_;
};

// Rotation matrices as row-major 3x3.
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Vec3 column(const Mat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

struct EdgeKey {
  std::uint32_t a, b;
  bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

double tri_signed_volume(const Vec3& o, const Vec3& a, const Vec3& b, const Vec3& c) {
  return dot(a - o, cross(b - o, c - o)) / 6.0;
}

bool ray_hits_triangle(const Vec3& orig, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = cross(dir, e2);
  const double det = dot(e1, p);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  const Vec3 s = orig - a;
  const double u = dot(s, p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = cross(s, e1);
  const double v = dot(dir, q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  return dot(e2, q) * inv > 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------

ArcGeometry arc_center(Vec2 start, Vec2 end, double sweep_deg, int ccw_flag) {
  if (!(sweep_deg > 0.0 && sweep_deg < 360.0)) throw GeometryError("arc sweep must lie in (0, 360)");
  const Vec2 chord = end - start;
  const double c = norm(chord);
  const double scale = std::max({1.0, norm(start), norm(end)});
  if (c <= 1e-14 * scale) throw GeometryError("arc has coincident endpoints");
  const double half = 0.5 * sweep_deg * kDeg;
  double d = (0.5 * c) / std::tan(half);
  if (ccw_flag == 0) d = -d;
  const Vec2 mid = (start + end) * 0.5;
  return {mid + perp_ccw(chord / c) * d, c / (2.0 * std::sin(half))};
}

std::vector<Vec2> sample_arc(Vec2 start, const Arc& arc, double tess_tol) {
  const ArcGeometry g = arc_center(start, arc.end(), arc.sweep_deg(), arc.ccw_flag());
  const double sweep = arc.sweep_deg() * kDeg;
  const int steps = std::max(1, static_cast<int>(std::ceil(sweep / max_chord_angle(g.radius, tess_tol))));
  const double dir = arc.ccw() ? 1.0 : -1.0;
  const Vec2 rel = start - g.center;
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 1; k < steps; ++k) {
    out.push_back(g.center + rotate(rel, dir * sweep * k / steps));
  }
  out.push_back(arc.end());
  return out;
}

Polyline sample_circle(const Circle& circle, double tess_tol) {
  const int n = std::max(16, static_cast<int>(std::ceil(2.0 * kPi / max_chord_angle(circle.radius(), tess_tol))));
  Polyline out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * k / n;
    out.push_back(circle.center() + Vec2{std::cos(t), std::sin(t)} * circle.radius());
  }
  return out;
}

std::vector<Vec2> tessellate_chain(const Loop& loop, Vec2 start, double tess_tol) {
  std::vector<Vec2> out{start};
  Vec2 pen = start;
  for (const auto& cmd : loop) {
    if (const auto* line = std::get_if<Line>(&cmd)) {
      out.push_back(line->end());
    } else if (const auto* arc = std::get_if<Arc>(&cmd)) {
      const auto samples = sample_arc(pen, *arc, tess_tol);
      out.insert(out.end(), samples.begin(), samples.end());
    } else {
      throw GeometryError("circle inside a line/arc chain");
    }
    pen = command_end(cmd);
  }
  return out;
}

Vec2 loop_start(const Loop& loop, bool is_outer) {
  if (is_outer || loop.empty()) return {0.0, 0.0};
  return command_end(loop.back());
}

double loop_diagonal(const Loop& loop, bool is_outer) {
  double lo_x = HUGE_VAL, lo_y = HUGE_VAL, hi_x = -HUGE_VAL, hi_y = -HUGE_VAL;
  auto add = [&](Vec2 p) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  };
  if (is_circle_loop(loop)) {
    const auto& c = std::get<Circle>(loop.front());
    add(c.center() - Vec2{c.radius(), c.radius()});
    add(c.center() + Vec2{c.radius(), c.radius()});
  } else {
    add(loop_start(loop, is_outer));
    for (const auto& cmd : loop) add(command_end(cmd));
  }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

TessellatedProfile tessellate_profile(const Profile& profile, double tess_tol) {
  if (!(tess_tol > 0.0)) throw GeometryError("tessellation tolerance must be positive");
  auto ring_of = [tess_tol](const Loop& loop, bool is_outer) {
    Polyline ring;
    if (is_circle_loop(loop)) {
      ring = sample_circle(std::get<Circle>(loop.front()), tess_tol);
    } else {
      ring = tessellate_chain(loop, loop_start(loop, is_outer), tess_tol);
      ring.pop_back();  // the chain's end is its start
    }
    drop_duplicates(ring, 1e-12 * std::max(1.0, ring_scale(ring)));
    const double area = ring.size() >= 3 ? raw_signed_area(ring) : 0.0;
    if ((is_outer && area < 0.0) || (!is_outer && area > 0.0)) std::reverse(ring.begin(), ring.end());
    return ring;
  };
  TessellatedProfile out;
  out.outer = ring_of(profile.outer(), true);
  for (const auto& cut : profile.cuts()) out.holes.push_back(ring_of(cut, false));
  return out;
}

double signed_area(const Polyline& loop) {
  std::set<std::pair<double, double>> distinct;
  for (const Vec2& p : loop) distinct.insert({p.x, p.y});
  if (distinct.size() < 3) throw GeometryError("degenerate loop: fewer than 3 distinct vertices");
  return raw_signed_area(loop);
}

double Triangulation::area() const {
  double total = 0.0;
  for (const auto& t : triangles) total += 0.5 * cross(points[t[1]] - points[t[0]], points[t[2]] - points[t[0]]);
  return total;
}

Triangulation triangulate(const Polyline& outer, const std::vector<Polyline>& holes) {
  const double scale = ring_scale(outer);
  if (!(scale > 0.0)) throw GeometryError("degenerate polygon");
  const double eps = 1e-11 * scale;

  auto prepare = [eps](Polyline ring, bool ccw) {
    drop_duplicates(ring, eps);
    drop_collinear(ring, eps);
    if (ring.size() < 3 || std::abs(raw_signed_area(ring)) <= eps * eps) {
      throw GeometryError("degenerate polygon loop");
    }
    if ((raw_signed_area(ring) > 0.0) != ccw) std::reverse(ring.begin(), ring.end());
    return ring;
  };

  Triangulation out;
  std::vector<Polyline> rings{prepare(outer, true)};
  for (const auto& h : holes) rings.push_back(prepare(h, false));
  for (const auto& ring : rings) {
    out.loops.emplace_back(static_cast<std::uint32_t>(out.points.size()), static_cast<std::uint32_t>(ring.size()));
    out.points.insert(out.points.end(), ring.begin(), ring.end());
  }

  EarClipper clipper(out.points);
  std::vector<std::uint32_t> poly(out.loops[0].second);
  for (std::uint32_t i = 0; i < poly.size(); ++i) poly[i] = i;

  // Bridge holes right-to-left so earlier bridges never cross later rays.
  std::vector<std::size_t> order(holes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
  auto max_x = [&](std::size_t loop) {
    double m = -HUGE_VAL;
    for (std::uint32_t k = 0; k < out.loops[loop].second; ++k) m = std::max(m, out.points[out.loops[loop].first + k].x);
    return m;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return max_x(a) > max_x(b); });
  for (std::size_t loop : order) {
    std::vector<std::uint32_t> hole(out.loops[loop].second);
    for (std::uint32_t k = 0; k < hole.size(); ++k) hole[k] = out.loops[loop].first + k;
    clipper.bridge(poly, hole);
  }
  out.triangles = clipper.clip(poly);
  return out;
}

Frame frame_basis(const FrameSpec& spec, Vec3 origin) {
  Frame f;
  f.origin = origin;
  if (const auto* e = std::get_if<EulerFrame>(&spec)) {
    const double a = e->alpha_deg * kDeg, t = e->theta_deg * kDeg, g = e->gamma_deg * kDeg;
    const Mat3 rz{{{std::cos(a), -std::sin(a), 0}, {std::sin(a), std::cos(a), 0}, {0, 0, 1}}};
    const Mat3 ry{{{std::cos(t), 0, std::sin(t)}, {0, 1, 0}, {-std::sin(t), 0, std::cos(t)}}};
    const Mat3 rx{{{1, 0, 0}, {0, std::cos(g), -std::sin(g)}, {0, std::sin(g), std::cos(g)}}};
    const Mat3 r = mul(mul(rz, ry), rx);
    f.u = column(r, 0);
    f.v = column(r, 1);
    f.n = column(r, 2);
    return f;
  }
  const Vec3 n = std::get<NormalFrame>(spec).normal();
  if (!(norm(n) > 0.0)) throw GeometryError("zero frame normal");
  const Vec3 r = std::abs(n.z) < 0.999 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  f.n = n;
  f.u = normalized(cross(r, n));
  f.v = cross(n, f.u);
  return f;
}

Vec3 frame_normal(const FrameSpec& spec) {
  if (const auto* nf = std::get_if<NormalFrame>(&spec)) return nf->normal();
  return frame_basis(spec).n;
}

bool LabeledMesh::has_cut_bodies() const {
  return std::any_of(bodies.begin(), bodies.end(), [](const MeshBody& b) { return b.cut; });
}

void LabeledMesh::append(const LabeledMesh& body) {
  const auto v0 = static_cast<std::uint32_t>(vertices.size());
  const auto t0 = static_cast<std::uint32_t>(triangles.size());
  vertices.insert(vertices.end(), body.vertices.begin(), body.vertices.end());
  for (const auto& t : body.triangles) triangles.push_back({t[0] + v0, t[1] + v0, t[2] + v0});
  tri_labels.insert(tri_labels.end(), body.tri_labels.begin(), body.tri_labels.end());
  for (MeshBody b : body.bodies) {
    b.first_vertex += v0;
    b.first_triangle += t0;
    bodies.push_back(b);
  }
}

LabeledMesh extrude(const Triangulation& profile, const Frame& frame, double extent, int part_index) {
  if (extent == 0.0 || !std::isfinite(extent)) throw GeometryError("extrusion extent must be nonzero");
  LabeledMesh mesh;
  const auto n = static_cast<std::uint32_t>(profile.points.size());
  mesh.vertices.reserve(2 * n);
  for (const Vec2& p : profile.points) mesh.vertices.push_back(frame.to_world(p, 0.0));
  for (const Vec2& p : profile.points) mesh.vertices.push_back(frame.to_world(p, extent));

  for (const auto& t : profile.triangles) {
    mesh.triangles.push_back({t[0], t[2], t[1]});
    mesh.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});
  }
  for (const auto& [first, count] : profile.loops) {
    for (std::uint32_t k = 0; k < count; ++k) {
      const std::uint32_t i = first + k;
      const std::uint32_t j = first + (k + 1) % count;
      mesh.triangles.push_back({i, j, j + n});
      mesh.triangles.push_back({i, j + n, i + n});
    }
  }
  if (extent < 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
  mesh.tri_labels.assign(mesh.triangles.size(), part_index);
  MeshBody body;
  body.vertex_count = 2 * n;
  body.triangle_count = static_cast<std::uint32_t>(mesh.triangles.size());
  body.part = part_index;
  mesh.bodies.push_back(body);
  return mesh;
}

LabeledMesh compile(const CadProgram& program, const Tolerances& tol) {
  const ValidationReport report = validate(program, tol);
  for (const auto& v : report.violations) {
    if (v.severity == Severity::Error) throw CompileError(v.part, v.block, v.rule + ": " + v.message);
  }
  const CadProgram& prog = report.effective(program);

  LabeledMesh mesh;
  for (const auto& part : prog.parts()) mesh.label_table.push_back(part.label());
  for (std::size_t p = 0; p < prog.parts().size(); ++p) {
    const auto& blocks = prog.parts()[p].blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Block& block = blocks[b];
      try {
        const double tess = tol.tess_for(loop_diagonal(block.profile.outer(), true));
        const TessellatedProfile rings = tessellate_profile(block.profile, tess);
        const Triangulation tri = triangulate(rings.outer, rings.holes);
        LabeledMesh body = extrude(tri, frame_basis(block.extrude.frame(), block.extrude.origin()),
                                   block.extrude.extent(), static_cast<int>(p));
        body.bodies.front().block = static_cast<int>(b);
        body.bodies.front().cut = block.extrude.boolean_op() == BooleanOp::Cut;
        mesh.append(body);
      } catch (const GeometryError& e) {
        throw CompileError(static_cast<int>(p), static_cast<int>(b), e.what());
      }
    }
  }
  return mesh;
}

bool is_watertight(const LabeledMesh& mesh, const MeshBody& body) {
  std::map<EdgeKey, int> directed;
  for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) ++directed[{tri[e], tri[(e + 1) % 3]}];
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    const auto twin = directed.find({edge.b, edge.a});
    if (twin == directed.end() || twin->second != 1) return false;
  }
  return true;
}

bool is_watertight(const LabeledMesh& mesh) {
  return std::all_of(mesh.bodies.begin(), mesh.bodies.end(), [&](const MeshBody& b) { return is_watertight(mesh, b); });
}

int euler_characteristic(const LabeledMesh& mesh, const MeshBody& body) {
  std::set<EdgeKey> edges;
  std::set<std::uint32_t> verts;
  for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      verts.insert(tri[e]);
      edges.insert({std::min(tri[e], tri[(e + 1) % 3]), std::max(tri[e], tri[(e + 1) % 3])});
    }
  }
  return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) + static_cast<int>(body.triangle_count);
}

double body_volume(const LabeledMesh& mesh, const MeshBody& body) {
  if (body.triangle_count == 0) return 0.0;
  const Vec3 o = mesh.vertices[body.first_vertex];
  double vol = 0.0;
  for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
    const auto& tri = mesh.triangles[t];
    vol += tri_signed_volume(o, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
  }
  return vol;
}

double mesh_volume(const LabeledMesh& mesh) {
  if (!is_watertight(mesh)) throw GeometryError("volume requested for a non-watertight mesh");
  double vol = 0.0;
  for (const auto& body : mesh.bodies) {
    if (!body.cut) vol += body_volume(mesh, body);
  }
  return vol;
}

double mesh_area(const LabeledMesh& mesh) {
  double area = 0.0;
  for (const auto& body : mesh.bodies) {
    if (body.cut) continue;
    for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec3& a = mesh.vertices[tri[0]];
      area += 0.5 * norm(cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a));
    }
  }
  return area;
}

double estimate_net_volume(const LabeledMesh& mesh, int samples, std::uint64_t seed) {
  if (samples < 1) throw GeometryError("sample count must be positive");
  Aabb box;
  for (const auto& body : mesh.bodies) {
    if (body.cut) continue;
    for (std::uint32_t v = body.first_vertex; v < body.first_vertex + body.vertex_count; ++v) box.expand(mesh.vertices[v]);
  }
  if (box.empty()) return 0.0;
  Rng rng(seed);
  // Slightly skewed ray direction avoids grazing axis-aligned edges.
  const Vec3 dir = normalized(Vec3{1.0, 0.3183098861837907, 0.1591549430918953});
  auto inside = [&](const MeshBody& body, const Vec3& p) {
    int hits = 0;
    for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
      const auto& tri = mesh.triangles[t];
      if (ray_hits_triangle(p, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]])) ++hits;
    }
    return hits % 2 == 1;
  };
  int count = 0;
  const Vec3 ext = box.extent();
  for (int s = 0; s < samples; ++s) {
    const Vec3 p{box.min.x + ext.x * rng.uniform(), box.min.y + ext.y * rng.uniform(), box.min.z + ext.z * rng.uniform()};
    bool in_solid = false;
    bool in_cut = false;
    for (const auto& body : mesh.bodies) {
      if (body.cut ? in_cut : in_solid) continue;
      if (inside(body, p)) (body.cut ? in_cut : in_solid) = true;
    }
    if (in_solid && !in_cut) ++count;
  }
  return ext.x * ext.y * ext.z * count / samples;
}

}  // namespace sxcad
