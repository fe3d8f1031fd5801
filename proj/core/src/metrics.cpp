#include "sxcad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sxcad/cadify.hpp"
#include "sxcad/dsl.hpp"
#include "sxcad/error.hpp"
#include "sxcad/kdtree.hpp"
#include "sxcad/rng.hpp"
#include "sxcad/validate.hpp"

namespace sxcad {

void LabeledPointCloud::check() const {
  if (points.empty()) throw InvariantError("point cloud is empty");
  if (labels.size() != points.size()) throw InvariantError("point cloud labels and points differ in length");
}

LabeledPointCloud sample_surface(const LabeledMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvariantError("sample count must be >= 1");
  std::vector<std::uint32_t> tris;
  std::vector<double> cdf;
  double total = 0.0;
  for (const MeshBody& body : mesh.bodies) {
    if (body.cut) continue;
    for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec3& a = mesh.vertices[tri[0]];
      const double area = 0.5 * norm(cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a));
      if (!(area > 0.0)) continue;
      total += area;
      tris.push_back(t);
      cdf.push_back(total);
    }
  }
  if (tris.empty() || !(total > 0.0)) throw GeometryError("mesh has no surface area to sample");

  Rng rng(seed);
  LabeledPointCloud cloud;
  cloud.points.reserve(n);
  cloud.labels.reserve(n);
  cloud.label_names = mesh.label_table;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform() * total;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    k = std::min(k, tris.size() - 1);
    const auto& tri = mesh.triangles[tris[k]];
    const double s = std::sqrt(rng.uniform());
    const double t = rng.uniform();
    const double wa = 1.0 - s;
    const double wb = s * (1.0 - t);
    const double wc = s * t;
    cloud.points.push_back(mesh.vertices[tri[0]] * wa + mesh.vertices[tri[1]] * wb + mesh.vertices[tri[2]] * wc);
    cloud.labels.push_back(mesh.tri_labels[tris[k]]);
  }
  return cloud;
}

namespace {

double mean_nearest(const std::vector<Vec3>& from, const KdTree& to, bool squared) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    const double d2 = to.nearest(p).squared_distance;
    sum += squared ? d2 : std::sqrt(d2);
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b, ChamferOptions options) {
  if (a.empty() || b.empty()) throw InvariantError("chamfer of an empty point set");
  const KdTree ta(a);
  const KdTree tb(b);
  return 0.5 * (mean_nearest(a, tb, options.squared) + mean_nearest(b, ta, options.squared));
}

double chamfer(const LabeledPointCloud& a, const LabeledPointCloud& b, ChamferOptions options) {
  return chamfer(a.points, b.points, options);
}

LabeledPointCloud transfer_labels(const std::vector<Vec3>& query, const LabeledPointCloud& reference) {
  reference.check();
  const KdTree tree(reference.points);
  LabeledPointCloud out;
  out.points = query;
  out.label_names = reference.label_names;
  out.labels.reserve(query.size());
  for (const Vec3& q : query) out.labels.push_back(reference.labels[tree.nearest(q).index]);
  return out;
}

SegScores seg_scores(const std::vector<int>& pred, const std::vector<int>& gt) {
  if (pred.size() != gt.size()) throw InvariantError("labelings differ in length");
  if (gt.empty()) throw InvariantError("ground-truth label set is empty");
  std::map<int, std::size_t> inter, pred_count, gt_count;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    ++gt_count[gt[i]];
    ++pred_count[pred[i]];
    if (pred[i] == gt[i]) {
      ++correct;
      ++inter[gt[i]];
    }
  }
  SegScores s;
  s.accuracy = static_cast<double>(correct) / static_cast<double>(gt.size());
  double sum = 0.0;
  for (const auto& [label, count] : gt_count) {
    const std::size_t i = inter[label];
    const std::size_t uni = count + pred_count[label] - i;
    const double iou = static_cast<double>(i) / static_cast<double>(uni);
    s.per_label_iou[label] = iou;
    sum += iou;
  }
  s.miou = sum / static_cast<double>(gt_count.size());
  return s;
}

std::vector<int> match_label_spaces(const std::vector<std::string>& pred, const std::vector<std::string>& gt,
                                    const EmbeddingProvider& embedder) {
  std::vector<int> mapping(pred.size(), -1);
  if (pred.empty() || gt.empty()) return mapping;
  const AssignmentResult r = solve_assignment(label_cost_matrix(pred, gt, embedder));
  for (const auto& [p, g] : r.pairs) mapping[p] = static_cast<int>(g);
  return mapping;
}

MetricsReport evaluate_clouds(const LabeledPointCloud& pred, const LabeledPointCloud& gt,
                              const EmbeddingProvider& embedder, ChamferOptions options) {
  pred.check();
  gt.check();
  MetricsReport report;
  report.squared_chamfer = options.squared;
  report.chamfer = chamfer(pred, gt, options);

  LabeledPointCloud transferred = transfer_labels(gt.points, pred);
  if (!pred.label_names.empty() && !gt.label_names.empty()) {
    const auto mapping = match_label_spaces(pred.label_names, gt.label_names, embedder);
    for (int& l : transferred.labels) {
      l = (l >= 0 && static_cast<std::size_t>(l) < mapping.size()) ? mapping[static_cast<std::size_t>(l)] : -1;
    }
  }
  const SegScores s = seg_scores(transferred.labels, gt.labels);
  report.seg_acc = s.accuracy;
  report.seg_miou = s.miou;
  for (const auto& [label, iou] : s.per_label_iou) {
    const bool named = label >= 0 && static_cast<std::size_t>(label) < gt.label_names.size();
    report.per_label_iou[named ? gt.label_names[static_cast<std::size_t>(label)] : std::to_string(label)] = iou;
  }
  return report;
}

double part_iou(const std::vector<std::string>& pred_labels, const std::vector<std::string>& gt_labels,
                const EmbeddingProvider& embedder, double sim_threshold) {
  if (gt_labels.empty()) throw InvariantError("ground-truth part label list is empty");
  if (pred_labels.empty()) return 0.0;
  const CostMatrix cost = label_cost_matrix(pred_labels, gt_labels, embedder);
  const AssignmentResult r = solve_assignment(cost);
  std::size_t matched = 0;
  for (const auto& [p, g] : r.pairs) {
    if (1.0 - cost(p, g) >= sim_threshold) ++matched;
  }
  const std::size_t uni = pred_labels.size() + gt_labels.size() - matched;
  return static_cast<double>(matched) / static_cast<double>(uni);
}

bool program_succeeds(std::string_view source, const Tolerances& tol, bool* repaired) {
  if (repaired != nullptr) *repaired = false;
  const ParseResult parsed = parse(source);
  if (!parsed.ok()) return false;
  const ValidationReport report = validate(*parsed.program, tol);
  if (!report.valid) return false;
  if (repaired != nullptr) *repaired = report.repaired.has_value();
  return true;
}

ProgSuccess prog_success(const std::vector<std::string>& corpus, const Tolerances& tol) {
  if (corpus.empty()) throw InvariantError("program corpus is empty");
  ProgSuccess s;
  for (const std::string& text : corpus) {
    ++s.total;
    bool repaired = false;
    if (program_succeeds(text, tol, &repaired)) {
      ++s.succeeded;
      if (repaired) ++s.repaired;
    }
  }
  return s;
}

}  // namespace sxcad
