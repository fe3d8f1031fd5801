#pragma once

// Minimal solid kernel: tessellates profiles, triangulates polygons with
// holes, and extrudes them into watertight, part-labeled triangle meshes.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sxcad/ir.hpp"
#include "sxcad/vec.hpp"

namespace sxcad {

/// Closed 2D loop; the last vertex connects back to the first (not repeated).
using Polyline = std::vector<Vec2>;

/// Absolute tolerances win over relative ones; relative tolerances scale with the
/// diagonal of the outer loop's control points.
struct Tolerances {
  std::optional<double> closure_abs;
  std::optional<double> tess_abs;
  double closure_rel = 1e-4;
  double tess_rel = 1e-3;

  double closure_for(double diagonal) const { return closure_abs ? *closure_abs : closure_rel * diagonal; }
  double tess_for(double diagonal) const { return tess_abs ? *tess_abs : tess_rel * diagonal; }

  static Tolerances absolute(double closure, double tess) { return {closure, tess}; }
};

struct ArcGeometry {
  Vec2 center;
  double radius = 0.0;
};

/// Center and radius of the arc from `start` to `end` sweeping `sweep_deg`
/// (counter-clockwise when ccw_flag is 1). Throws GeometryError for
/// coincident endpoints or a sweep outside (0, 360).
ArcGeometry arc_center(Vec2 start, Vec2 end, double sweep_deg, int ccw_flag);

/// Points strictly after `start` up to and including `end` along the arc,
/// spaced so that no chord's sagitta exceeds `tess_tol`.
std::vector<Vec2> sample_arc(Vec2 start, const Arc& arc, double tess_tol);

/// Counter-clockwise circle samples starting at angle 0; at least 16.
Polyline sample_circle(const Circle& circle, double tess_tol);

/// Raw tessellation of a Line/Arc chain beginning at `start`. The result holds
/// `start` followed by every sample, so its last point is the chain's end.
std::vector<Vec2> tessellate_chain(const Loop& loop, Vec2 start, double tess_tol);

/// Implicit start point of a loop: the origin for outer loops, and the final
/// endpoint for hole loops (they close on themselves).
Vec2 loop_start(const Loop& loop, bool is_outer);

/// Diagonal of the bounding box of the loop's control points (pen positions,
/// circle extents). Used to scale relative tolerances.
double loop_diagonal(const Loop& loop, bool is_outer);

struct TessellatedProfile {
  Polyline outer;               ///< counter-clockwise
  std::vector<Polyline> holes;  ///< clockwise
};

TessellatedProfile tessellate_profile(const Profile& profile, double tess_tol);

/// Shoelace area; positive for counter-clockwise loops. Throws GeometryError
/// for loops with fewer than 3 distinct vertices.
double signed_area(const Polyline& loop);

struct Triangulation {
  std::vector<Vec2> points;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  /// [first, count) ranges into `points`: the outer loop (CCW), then holes (CW).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> loops;

  double area() const;
};

/// Ear-clipping triangulation of `outer` minus `holes` (holes are bridged
/// into the outer loop first). Collinear boundary vertices are dropped; the
/// loops in the result are the simplified boundary. Throws GeometryError on
/// degenerate input.
Triangulation triangulate(const Polyline& outer, const std::vector<Polyline>& holes);

struct Frame {
  Vec3 u{1, 0, 0};  ///< sketch x-axis
  Vec3 v{0, 1, 0};  ///< sketch y-axis
  Vec3 n{0, 0, 1};  ///< extrusion normal, u x v
  Vec3 origin{};

  Vec3 to_world(Vec2 p, double offset = 0.0) const { return origin + u * p.x + v * p.y + n * offset; }
};

/// Euler frames use R = Rz(alpha) Ry(theta) Rx(gamma). Normal frames pick the
/// in-plane axis as normalize(r x n), r = z unless n is within 0.999 of z, then x.
Frame frame_basis(const FrameSpec& spec, Vec3 origin = {});

/// Extrusion normal of a frame spec (for printing Euler frames in normal form).
Vec3 frame_normal(const FrameSpec& spec);

struct MeshBody {
  std::uint32_t first_vertex = 0;
  std::uint32_t vertex_count = 0;
  std::uint32_t first_triangle = 0;
  std::uint32_t triangle_count = 0;
  int part = 0;
  int block = 0;
  bool cut = false;  ///< compiled from a boolean Cut extrusion; excluded from sampling
};

struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<int> tri_labels;
  std::vector<std::string> label_table;
  std::vector<MeshBody> bodies;

  bool has_cut_bodies() const;
  /// Appends `body`'s geometry as new bodies (indices are shifted).
  void append(const LabeledMesh& body);
};

/// One closed prism: caps from `profile`, side walls along every loop.
LabeledMesh extrude(const Triangulation& profile, const Frame& frame, double extent, int part_index);

/// Validates (applying orientation repairs), tessellates and extrudes every
/// block; bodies are concatenated in program order. Throws CompileError.
LabeledMesh compile(const CadProgram& program, const Tolerances& tol = {});

/// Every undirected edge of every body is used exactly twice, once per direction.
bool is_watertight(const LabeledMesh& mesh);
bool is_watertight(const LabeledMesh& mesh, const MeshBody& body);

/// V - E + F of one body.
int euler_characteristic(const LabeledMesh& mesh, const MeshBody& body);

/// Divergence-theorem volume over NewBody bodies. Throws GeometryError when
/// the mesh is not watertight.
double mesh_volume(const LabeledMesh& mesh);
double body_volume(const LabeledMesh& mesh, const MeshBody& body);
/// Triangle-area sum over NewBody bodies.
double mesh_area(const LabeledMesh& mesh);

/// Monte-Carlo volume of (union of NewBody solids) minus (union of Cut solids).
double estimate_net_volume(const LabeledMesh& mesh, int samples, std::uint64_t seed);

}  // namespace sxcad
