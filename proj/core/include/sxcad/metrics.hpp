#pragma once

// Reconstruction metrics: surface sampling, Chamfer distance, segmentation
// scores via nearest-neighbour label transfer, Part IoU and program success.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sxcad/geom.hpp"
#include "sxcad/provider.hpp"
#include "sxcad/vec.hpp"

namespace sxcad {

struct LabeledPointCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;               ///< index into label_names, or -1
  std::vector<std::string> label_names;  ///< optional

  std::size_t size() const { return points.size(); }
  /// Throws InvariantError when empty or when labels and points differ in length.
  void check() const;
};

/// Area-weighted triangle choice, then a uniform barycentric point. Bodies
/// compiled from Cut extrusions are skipped. Throws GeometryError for a mesh
/// without area.
LabeledPointCloud sample_surface(const LabeledMesh& mesh, std::size_t n, std::uint64_t seed);

struct ChamferOptions {
  bool squared = false;  ///< average squared distances instead of distances
};

/// 0.5 * (mean nearest distance a->b + mean nearest distance b->a).
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b, ChamferOptions options = {});
double chamfer(const LabeledPointCloud& a, const LabeledPointCloud& b, ChamferOptions options = {});

/// Each query point takes the label of its nearest reference point (lowest
/// index on ties). The result keeps the reference's label names.
LabeledPointCloud transfer_labels(const std::vector<Vec3>& query, const LabeledPointCloud& reference);

struct SegScores {
  double accuracy = 0.0;
  double miou = 0.0;
  std::map<int, double> per_label_iou;  ///< labels present in gt
};

/// Pointwise comparison of two labelings of the same points.
SegScores seg_scores(const std::vector<int>& pred, const std::vector<int>& gt);

struct MetricsReport {
  double chamfer = 0.0;
  double seg_acc = 0.0;
  double seg_miou = 0.0;
  std::map<std::string, double> per_label_iou;
  bool squared_chamfer = false;
};

/// Maps predicted label names into the ground-truth label space by one-to-one
/// assignment on embedding cost; unmatched predicted labels map to -1.
std::vector<int> match_label_spaces(const std::vector<std::string>& pred, const std::vector<std::string>& gt,
                                    const EmbeddingProvider& embedder);

/// Chamfer between the clouds, then segmentation scores of pred labels
/// transferred onto the gt points. When both clouds carry label names, pred
/// labels are first mapped into the gt label space with match_label_spaces;
/// otherwise label indices are compared directly.
MetricsReport evaluate_clouds(const LabeledPointCloud& pred, const LabeledPointCloud& gt,
                              const EmbeddingProvider& embedder, ChamferOptions options = {});

/// Matched pairs / |pred u gt|, where pairs come from a maximum-similarity
/// one-to-one assignment and match when cosine similarity >= threshold.
double part_iou(const std::vector<std::string>& pred_labels, const std::vector<std::string>& gt_labels,
                const EmbeddingProvider& embedder, double sim_threshold = 0.8);

struct ProgSuccess {
  int total = 0;
  int succeeded = 0;  ///< parsed and valid, possibly after repair
  int repaired = 0;   ///< successes that needed a repair
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(succeeded) / total; }
  double repair_rate() const { return total == 0 ? 0.0 : static_cast<double>(repaired) / total; }
};

ProgSuccess prog_success(const std::vector<std::string>& corpus, const Tolerances& tol = {});

/// True when the text parses and validates (after repair).
bool program_succeeds(std::string_view source, const Tolerances& tol = {}, bool* repaired = nullptr);

}  // namespace sxcad
