#include "sxcad/cadify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include <Eigen/Dense>

#include "sxcad/error.hpp"
#include "sxcad/rng.hpp"

namespace sxcad {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvariantError("ragged cost matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

namespace {

/// Hungarian algorithm for n <= m; returns the column assigned to each row.
std::vector<std::size_t> hungarian(const CostMatrix& a, bool transposed) {
  const std::size_t n = transposed ? a.cols() : a.rows();
  const std::size_t m = transposed ? a.rows() : a.cols();
  auto cost = [&](std::size_t i, std::size_t j) { return transposed ? a(j, i) : a(i, j); };
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // 1-based rows/cols; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) throw InvariantError("cost matrix must be non-empty");
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      if (!std::isfinite(cost(i, j))) throw FitError("cost matrix has a non-finite entry");
    }
  }
  const bool transposed = cost.rows() > cost.cols();
  const auto assigned = hungarian(cost, transposed);

  AssignmentResult r;
  for (std::size_t k = 0; k < assigned.size(); ++k) {
    r.pairs.emplace_back(transposed ? assigned[k] : k, transposed ? k : assigned[k]);
  }
  std::sort(r.pairs.begin(), r.pairs.end());
  std::vector<char> row_used(cost.rows(), 0), col_used(cost.cols(), 0);
  for (const auto& [i, j] : r.pairs) {
    row_used[i] = col_used[j] = 1;
    r.total_cost += cost(i, j);
  }
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    if (!row_used[i]) r.unmatched_rows.push_back(i);
  }
  for (std::size_t j = 0; j < cost.cols(); ++j) {
    if (!col_used[j]) r.unmatched_cols.push_back(j);
  }
  return r;
}

CostMatrix label_cost_matrix(const std::vector<std::string>& pred, const std::vector<std::string>& gt,
                             const EmbeddingProvider& embedder) {
  if (pred.empty() || gt.empty()) throw InvariantError("label lists must be non-empty");
  std::unordered_map<std::string, std::vector<double>> cache;
  auto emb = [&](const std::string& s) -> const std::vector<double>& {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, embedder.embed(s)).first;
    return it->second;
  };
  CostMatrix c(pred.size(), gt.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      c(i, j) = pred[i] == gt[j] ? 0.0 : 1.0 - cosine_similarity(emb(pred[i]), emb(gt[j]));
    }
  }
  return c;
}

namespace {

double bbox_diagonal(const std::vector<Vec2>& pts) {
  Vec2 lo{HUGE_VAL, HUGE_VAL}, hi{-HUGE_VAL, -HUGE_VAL};
  for (const Vec2& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return norm(hi - lo);
}

bool all_collinear(const std::vector<Vec2>& pts) {
  const Vec2 p0 = pts.front();
  std::size_t far = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = squared_norm(pts[i] - p0);
    if (d > best) {
      best = d;
      far = i;
    }
  }
  if (!(best > 0.0)) return true;
  const Vec2 dir = pts[far] - p0;
  const double scale = std::sqrt(best);
  for (const Vec2& p : pts) {
    if (std::abs(cross(dir, p - p0)) / scale > 1e-12 * scale) return false;
  }
  return true;
}

std::optional<CircleFit> circumscribe(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double scale = std::max(squared_norm(ab), squared_norm(ac));
  if (!(std::abs(d) > 1e-12 * scale)) return std::nullopt;
  const double ab2 = squared_norm(ab);
  const double ac2 = squared_norm(ac);
  const Vec2 off{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  CircleFit f;
  f.center = a + off;
  f.radius = norm(off);
  return f;
}

int count_inliers(const std::vector<Vec2>& pts, const CircleFit& f, double tol, std::vector<std::size_t>* out = nullptr) {
  int count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(norm(pts[i] - f.center) - f.radius) <= tol) {
      ++count;
      if (out != nullptr) out->push_back(i);
    }
  }
  return count;
}

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

CircleFit fit_circle_least_squares(const std::vector<Vec2>& points) {
  if (points.size() < 3) throw FitError("circle fit needs at least 3 points");
  if (all_collinear(points)) throw FitError("circle fit on collinear points");
  Vec2 mean{};
  for (const Vec2& p : points) mean += p;
  mean = mean / static_cast<double>(points.size());
  double scale = 0.0;
  for (const Vec2& p : points) scale = std::max(scale, norm(p - mean));

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 q = (points[static_cast<std::size_t>(i)] - mean) / scale;
    a(i, 0) = q.x;
    a(i, 1) = q.y;
    a(i, 2) = 1.0;
    b(i) = -(q.x * q.x + q.y * q.y);
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  const Vec2 c{-sol(0) / 2.0, -sol(1) / 2.0};
  const double r2 = c.x * c.x + c.y * c.y - sol(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw FitError("degenerate least-squares circle");
  CircleFit f;
  f.center = mean + c * scale;
  f.radius = std::sqrt(r2) * scale;
  f.inlier_count = static_cast<int>(points.size());
  return f;
}

CircleFit fit_circle_ransac(const std::vector<Vec2>& points, const RansacOptions& options) {
  if (options.iters < 1) throw FitError("RANSAC needs at least one iteration");
  if (points.size() < 3) throw FitError("circle fit needs at least 3 points");
  if (all_collinear(points)) throw FitError("circle fit on collinear points");
  const double tol = options.inlier_tol > 0.0 ? options.inlier_tol : 0.01 * bbox_diagonal(points);
  if (!(tol > 0.0)) throw FitError("circle fit on coincident points");

  Rng rng(options.seed);
  const std::uint64_t n = points.size();
  std::optional<CircleFit> best;
  int best_count = -1;
  for (int it = 0; it < options.iters; ++it) {
    const std::uint64_t i = rng.below(n);
    std::uint64_t j = rng.below(n - 1);
    if (j >= i) ++j;
    std::uint64_t k = rng.below(n - 2);
    if (k >= std::min(i, j)) ++k;
    if (k >= std::max(i, j)) ++k;
    const auto model = circumscribe(points[i], points[j], points[k]);
    if (!model) continue;
    const int count = count_inliers(points, *model, tol);
    if (count > best_count) {
      best_count = count;
      best = model;
    }
  }
  if (!best) throw FitError("every RANSAC sample was collinear");

  std::vector<std::size_t> idx;
  count_inliers(points, *best, tol, &idx);
  CircleFit fit = *best;
  if (idx.size() >= 3) {
    std::vector<Vec2> inliers;
    inliers.reserve(idx.size());
    for (std::size_t i : idx) inliers.push_back(points[i]);
    try {
      fit = fit_circle_least_squares(inliers);
    } catch (const FitError&) {
      fit = *best;
    }
  }
  fit.inlier_tol = tol;
  fit.inlier_count = count_inliers(points, fit, tol);
  return fit;
}

ArcFit fit_arc_ransac(const std::vector<Vec2>& ordered_points, const RansacOptions& options) {
  ArcFit arc;
  arc.circle = fit_circle_ransac(ordered_points, options);
  std::vector<double> angles;
  for (const Vec2& p : ordered_points) {
    if (std::abs(norm(p - arc.circle.center) - arc.circle.radius) <= arc.circle.inlier_tol) {
      const Vec2 d = p - arc.circle.center;
      angles.push_back(std::atan2(d.y, d.x) * kRadToDeg);
    }
  }
  std::vector<double> distinct = angles;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
                 distinct.end());
  if (distinct.size() < 3) throw FitError("arc inliers span fewer than 3 distinct angles");

  double total = 0.0, max_step = 0.0;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double step = wrap_deg(angles[i] - angles[i - 1]);
    total += step;
    max_step = std::max(max_step, std::abs(step));
  }
  const double sweep = std::abs(total);
  if (360.0 - sweep <= 1.5 * max_step || sweep >= 360.0) throw FitError("not an arc: samples close a full circle");
  if (!(sweep > 0.0)) throw FitError("not an arc: zero sweep");
  arc.start_angle_deg = angles.front();
  arc.end_angle_deg = angles.back();
  arc.sweep_deg = sweep;
  arc.ccw_flag = total > 0.0 ? 1 : 0;
  return arc;
}

namespace {

Aabb solid_bounds(const LabeledMesh& mesh) {
  Aabb box;
  for (const auto& body : mesh.bodies) {
    if (body.cut) continue;
    for (std::size_t v = body.first_vertex; v < body.first_vertex + body.vertex_count; ++v) box.expand(mesh.vertices[v]);
  }
  return box;
}

double projected_width(const Vec3& d, const Vec3& extent) {
  return std::abs(d.x) * extent.x + std::abs(d.y) * extent.y + std::abs(d.z) * extent.z;
}

bool degenerate(const Aabb& box) {
  if (box.empty()) return true;
  const Vec3 e = box.extent();
  return !(e.x > 0.0 && e.y > 0.0 && e.z > 0.0) || !std::isfinite(e.x + e.y + e.z);
}

ExtrudeCommand with_origin(const ExtrudeCommand& e, Vec3 origin, double extent) {
  return ExtrudeCommand(e.frame(), origin, extent, e.boolean_op());
}

struct RescaleOutput {
  Part part;
  std::vector<double> scale;
};

/// New sweep for an arc whose endpoints were scaled by (su, sv): the original
/// arc is sampled, stretched, and refit.
double refit_sweep(Vec2 start, const Arc& arc, double su, double sv, const RansacOptions& ransac) {
  const ArcGeometry g = arc_center(start, arc.end(), arc.sweep_deg(), arc.ccw_flag());
  std::vector<Vec2> samples{start};
  const auto tail = sample_arc(start, arc, g.radius * 1e-4);
  samples.insert(samples.end(), tail.begin(), tail.end());
  for (Vec2& p : samples) p = {p.x * su, p.y * sv};
  RansacOptions opts = ransac;
  if (opts.inlier_tol <= 0.0) opts.inlier_tol = 0.05 * bbox_diagonal(samples);
  try {
    const ArcFit fit = fit_arc_ransac(samples, opts);
    if (fit.ccw_flag == arc.ccw_flag() && fit.sweep_deg > 0.0 && fit.sweep_deg < 360.0) return fit.sweep_deg;
  } catch (const Error&) {
  }
  return arc.sweep_deg();
}

Loop scale_loop(const Loop& loop, bool is_outer, double su, double sv, bool refit, const RansacOptions& ransac) {
  Loop out;
  out.reserve(loop.size());
  Vec2 pen = loop_start(loop, is_outer);
  for (const SketchCommand& cmd : loop) {
    if (const auto* line = std::get_if<Line>(&cmd)) {
      out.emplace_back(Line({line->end().x * su, line->end().y * sv}));
      pen = line->end();
    } else if (const auto* arc = std::get_if<Arc>(&cmd)) {
      const double sweep = (refit && su != sv) ? refit_sweep(pen, *arc, su, sv, ransac) : arc->sweep_deg();
      out.emplace_back(Arc({arc->end().x * su, arc->end().y * sv}, sweep, arc->ccw_flag()));
      pen = arc->end();
    } else {
      const auto& c = std::get<Circle>(cmd);
      out.emplace_back(Circle({c.center().x * su, c.center().y * sv}, c.radius() * std::min(su, sv)));
    }
  }
  return out;
}

RescaleOutput rescale_impl(const Part& part, const Aabb& target, const Tolerances& tol, bool refit,
                           const RansacOptions& ransac) {
  if (degenerate(target)) throw GeometryError("target box is degenerate");
  const Aabb pred = part_bounding_box(part, tol);
  if (degenerate(pred)) throw GeometryError("part box is degenerate");
  const Vec3 pred_ext = pred.extent();
  const Vec3 gt_ext = target.extent();
  const Vec3 pc = pred.center();
  const Vec3 gc = target.center();

  std::vector<Block> blocks;
  std::vector<double> factors;
  for (const Block& block : part.blocks()) {
    const Frame f = frame_basis(block.extrude.frame(), block.extrude.origin());
    const double su = projected_width(f.u, gt_ext) / projected_width(f.u, pred_ext);
    const double sv = projected_width(f.v, gt_ext) / projected_width(f.v, pred_ext);
    const double sn = projected_width(f.n, gt_ext) / projected_width(f.n, pred_ext);
    factors.insert(factors.end(), {su, sv, sn});

    Loop outer = scale_loop(block.profile.outer(), true, su, sv, refit, ransac);
    std::vector<Loop> cuts;
    for (const Loop& cut : block.profile.cuts()) cuts.push_back(scale_loop(cut, false, su, sv, refit, ransac));

    const Vec3 d = block.extrude.origin() - pc;
    const Vec3 origin = gc + f.u * (su * dot(d, f.u)) + f.v * (sv * dot(d, f.v)) + f.n * (sn * dot(d, f.n));
    blocks.push_back(Block{Profile(std::move(outer), std::move(cuts)),
                           with_origin(block.extrude, origin, block.extrude.extent() * sn)});
  }

  // Snap the AABB center onto the target center.
  const Part scaled(part.label(), blocks);
  const Vec3 shift = gc - part_bounding_box(scaled, tol).center();
  for (Block& b : blocks) b.extrude = with_origin(b.extrude, b.extrude.origin() + shift, b.extrude.extent());
  return {Part(part.label(), std::move(blocks)), std::move(factors)};
}

}  // namespace

Aabb part_bounding_box(const Part& part, const Tolerances& tol) {
  const Aabb box = solid_bounds(compile(CadProgram({part}), tol));
  if (box.empty()) throw GeometryError("part has no NewBody geometry");
  return box;
}

Part rescale_part(const Part& part, const Aabb& target, const Tolerances& tol) {
  return rescale_impl(part, target, tol, false, {}).part;
}

Part rescale_part_refit_arcs(const Part& part, const Aabb& target, const Tolerances& tol,
                             const RansacOptions& ransac) {
  return rescale_impl(part, target, tol, true, ransac).part;
}

CadifyResult cadify_program(const CadProgram& pred, const std::vector<GtPart>& gt, const EmbeddingProvider& embedder,
                            const Tolerances& tol, bool refit_arcs) {
  if (gt.empty()) throw InvariantError("ground-truth part list is empty");
  std::vector<std::string> pred_labels, gt_labels;
  for (const Part& p : pred.parts()) pred_labels.push_back(p.label());
  for (const GtPart& g : gt) gt_labels.push_back(normalize_label(g.label));

  const CostMatrix cost = label_cost_matrix(pred_labels, gt_labels, embedder);
  const AssignmentResult match = solve_assignment(cost);
  std::vector<std::optional<std::size_t>> gt_of(pred_labels.size());
  for (const auto& [p, g] : match.pairs) gt_of[p] = g;

  CadifyResult result;
  result.unmatched_gt = match.unmatched_cols;
  std::vector<Part> parts;
  for (std::size_t i = 0; i < pred.parts().size(); ++i) {
    CadifyEntry entry;
    entry.pred_index = i;
    entry.pred_label = pred_labels[i];
    if (gt_of[i]) {
      const std::size_t g = *gt_of[i];
      entry.gt_index = g;
      entry.gt_label = gt_labels[g];
      entry.cost = cost(i, g);
      try {
        RescaleOutput out = rescale_impl(pred.parts()[i], gt[g].box, tol, refit_arcs, {});
        entry.scale = std::move(out.scale);
        parts.push_back(Part(gt_labels[g], out.part.blocks()));
      } catch (const Error& e) {
        entry.error = e.what();
      }
    } else {
      entry.error = "no matching ground-truth part";
    }
    result.entries.push_back(std::move(entry));
  }
  if (!parts.empty()) result.program = CadProgram(std::move(parts), pred.provenance());
  return result;
}

}  // namespace sxcad
