#include "sxcad/ir.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sxcad/error.hpp"
#include "sxcad/geom.hpp"

namespace sxcad {
namespace {

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }
bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

void check_loop_shape(const Loop& loop, const char* what) {
  if (loop.empty()) {
    throw InvariantError(std::string(what) + " loop is empty");
  }
  const bool has_circle = std::any_of(loop.begin(), loop.end(), [](const SketchCommand& c) {
    return std::holds_alternative<Circle>(c);
  });
  if (has_circle && loop.size() != 1) {
    throw InvariantError(std::string(what) + " loop mixes a circle with other curves");
  }
}

}  // namespace

Line::Line(Vec2 end) : end_(end) {
  if (!finite(end)) throw InvariantError("line endpoint is not finite");
}

Arc::Arc(Vec2 end, double sweep_deg, int ccw_flag) : end_(end), sweep_deg_(sweep_deg), ccw_flag_(ccw_flag) {
  if (!finite(end)) throw InvariantError("arc endpoint is not finite");
  if (!(sweep_deg > 0.0 && sweep_deg < 360.0)) {
    throw InvariantError("arc sweep must lie in (0, 360) degrees");
  }
  if (ccw_flag != 0 && ccw_flag != 1) throw InvariantError("arc flag must be 0 or 1");
}

Circle::Circle(Vec2 center, double radius) : center_(center), radius_(radius) {
  if (!finite(center)) throw InvariantError("circle center is not finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvariantError("circle radius must be positive");
}

bool is_circle_loop(const Loop& loop) {
  return loop.size() == 1 && std::holds_alternative<Circle>(loop.front());
}

Profile::Profile(Loop outer, std::vector<Loop> cuts) : outer_(std::move(outer)), cuts_(std::move(cuts)) {
  check_loop_shape(outer_, "outer");
  for (const auto& cut : cuts_) check_loop_shape(cut, "cut");
}

NormalFrame::NormalFrame(Vec3 normal) {
  if (!finite(normal)) throw InvariantError("frame normal is not finite");
  const double n = norm(normal);
  if (!(n > 1e-12)) throw InvariantError("frame normal is zero");
  // Already-unit inputs are kept bit-for-bit so printing and re-parsing converges.
  normal_ = std::abs(n - 1.0) <= 1e-12 ? normal : normal / n;
}

std::string_view to_string(BooleanOp op) { return op == BooleanOp::NewBody ? "NewBody" : "Cut"; }

std::optional<BooleanOp> boolean_op_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "newbody") return BooleanOp::NewBody;
  if (lower == "cut") return BooleanOp::Cut;
  return std::nullopt;
}

ExtrudeCommand::ExtrudeCommand(FrameSpec frame, Vec3 origin, double extent, BooleanOp op)
    : frame_(std::move(frame)), origin_(origin), extent_(extent), op_(op) {
  if (!finite(origin)) throw InvariantError("extrude origin is not finite");
  if (!std::isfinite(extent) || extent == 0.0) throw InvariantError("extrude extent must be finite and nonzero");
  if (const auto* euler = std::get_if<EulerFrame>(&frame_)) {
    if (!std::isfinite(euler->alpha_deg) || !std::isfinite(euler->theta_deg) || !std::isfinite(euler->gamma_deg)) {
      throw InvariantError("euler angles must be finite");
    }
  }
}

std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (unsigned char c : label) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

Part::Part(std::string_view label, std::vector<Block> blocks) : label_(normalize_label(label)), blocks_(std::move(blocks)) {
  if (label_.empty()) throw InvariantError("part label is empty");
  if (blocks_.empty()) throw InvariantError("part '" + label_ + "' has no blocks");
}

CadProgram::CadProgram(std::vector<Part> parts, std::optional<std::string> provenance)
    : parts_(std::move(parts)), provenance_(std::move(provenance)) {
  if (parts_.empty()) throw InvariantError("program has no parts");
}

std::vector<int> command_count(const CadProgram& program) {
  std::vector<int> counts;
  counts.reserve(program.parts().size());
  for (const auto& part : program.parts()) {
    int n = 0;
    for (const auto& block : part.blocks()) {
      n += static_cast<int>(block.profile.outer().size()) + 1;
      for (const auto& cut : block.profile.cuts()) n += static_cast<int>(cut.size());
    }
    counts.push_back(n);
  }
  return counts;
}

Aabb bounding_box(const CadProgram& program) {
  const LabeledMesh mesh = compile(program);
  Aabb box;
  for (const auto& body : mesh.bodies) {
    if (body.cut) continue;
    for (std::size_t v = body.first_vertex; v < body.first_vertex + body.vertex_count; ++v) {
      box.expand(mesh.vertices[v]);
    }
  }
  if (box.empty()) throw GeometryError("program has no NewBody geometry");
  return box;
}

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
bool near(Vec2 a, Vec2 b, double tol) { return near(a.x, b.x, tol) && near(a.y, b.y, tol); }
bool near(const Vec3& a, const Vec3& b, double tol) {
  return near(a.x, b.x, tol) && near(a.y, b.y, tol) && near(a.z, b.z, tol);
}

bool near(const SketchCommand& a, const SketchCommand& b, double tol) {
  if (a.index() != b.index()) return false;
  if (const auto* la = std::get_if<Line>(&a)) return near(la->end(), std::get<Line>(b).end(), tol);
  if (const auto* aa = std::get_if<Arc>(&a)) {
    const auto& ab = std::get<Arc>(b);
    return near(aa->end(), ab.end(), tol) && near(aa->sweep_deg(), ab.sweep_deg(), tol) && aa->ccw_flag() == ab.ccw_flag();
  }
  const auto& ca = std::get<Circle>(a);
  const auto& cb = std::get<Circle>(b);
  return near(ca.center(), cb.center(), tol) && near(ca.radius(), cb.radius(), tol);
}

bool near(const Loop& a, const Loop& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!near(a[i], b[i], tol)) return false;
  }
  return true;
}

bool near(const FrameSpec& a, const FrameSpec& b, double tol) {
  if (a.index() != b.index()) return false;
  if (const auto* ea = std::get_if<EulerFrame>(&a)) {
    const auto& eb = std::get<EulerFrame>(b);
    return near(ea->alpha_deg, eb.alpha_deg, tol) && near(ea->theta_deg, eb.theta_deg, tol) &&
           near(ea->gamma_deg, eb.gamma_deg, tol);
  }
  return near(std::get<NormalFrame>(a).normal(), std::get<NormalFrame>(b).normal(), tol);
}

}  // namespace

bool approx_equal(const CadProgram& a, const CadProgram& b, double tol) {
  if (a.parts().size() != b.parts().size()) return false;
  for (std::size_t p = 0; p < a.parts().size(); ++p) {
    const Part& pa = a.parts()[p];
    const Part& pb = b.parts()[p];
    if (pa.label() != pb.label() || pa.blocks().size() != pb.blocks().size()) return false;
    for (std::size_t k = 0; k < pa.blocks().size(); ++k) {
      const Block& ba = pa.blocks()[k];
      const Block& bb = pb.blocks()[k];
      if (!near(ba.profile.outer(), bb.profile.outer(), tol)) return false;
      if (ba.profile.cuts().size() != bb.profile.cuts().size()) return false;
      for (std::size_t c = 0; c < ba.profile.cuts().size(); ++c) {
        if (!near(ba.profile.cuts()[c], bb.profile.cuts()[c], tol)) return false;
      }
      const auto& ea = ba.extrude;
      const auto& eb = bb.extrude;
      if (!near(ea.frame(), eb.frame(), tol) || !near(ea.origin(), eb.origin(), tol) ||
          !near(ea.extent(), eb.extent(), tol) || ea.boolean_op() != eb.boolean_op()) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace sxcad
