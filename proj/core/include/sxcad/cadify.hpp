#pragma once

// Fitting predicted programs to segmented ground truth: part matching,
// robust circle/arc fitting and per-part rescaling.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sxcad/geom.hpp"
#include "sxcad/ir.hpp"
#include "sxcad/provider.hpp"
#include "sxcad/vec.hpp"

namespace sxcad {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct AssignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (row, col), sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

/// Minimum-cost matching of min(rows, cols) pairs (shortest augmenting
/// paths with potentials). Throws FitError on non-finite costs.
AssignmentResult solve_assignment(const CostMatrix& cost);

/// 1 - cosine similarity of label embeddings; identical strings cost 0.
CostMatrix label_cost_matrix(const std::vector<std::string>& pred, const std::vector<std::string>& gt,
                             const EmbeddingProvider& embedder);

struct CircleFit {
  Vec2 center;
  double radius = 0.0;
  int inlier_count = 0;
  double inlier_tol = 0.0;
};

struct RansacOptions {
  int iters = 200;
  /// Inlier band; <= 0 means 1% of the point set's bounding-box diagonal.
  double inlier_tol = 0.0;
  std::uint64_t seed = 0;
};

/// Circumscribed-circle RANSAC followed by an algebraic least-squares refit
/// over the inliers of the best model. Throws FitError.
CircleFit fit_circle_ransac(const std::vector<Vec2>& points, const RansacOptions& options = {});

/// Algebraic (Kasa) circle fit. Throws FitError for fewer than 3 points or
/// collinear input.
CircleFit fit_circle_least_squares(const std::vector<Vec2>& points);

struct ArcFit {
  CircleFit circle;
  double start_angle_deg = 0.0;
  double end_angle_deg = 0.0;
  double sweep_deg = 0.0;  ///< in (0, 360)
  int ccw_flag = 1;
};

/// Circle fit plus the angular interval traversed by the ordered inliers.
/// Throws FitError when the points close a full circle.
ArcFit fit_arc_ransac(const std::vector<Vec2>& ordered_points, const RansacOptions& options = {});

/// Scales and moves a part so its compiled AABB matches `target`. In-plane
/// scale factors apply per frame axis; circle radii take the smaller one.
/// Throws GeometryError when the part or target box is degenerate.
Part rescale_part(const Part& part, const Aabb& target, const Tolerances& tol = {});

/// Like rescale_part, but arcs distorted by unequal in-plane factors get
/// their sweep re-estimated by fitting a circle to the anisotropically
/// scaled arc samples.
Part rescale_part_refit_arcs(const Part& part, const Aabb& target, const Tolerances& tol = {},
                             const RansacOptions& ransac = {});

/// AABB of one part's non-cut solids.
Aabb part_bounding_box(const Part& part, const Tolerances& tol = {});

struct GtPart {
  std::string label;
  Aabb box;
};

struct CadifyEntry {
  std::size_t pred_index = 0;
  std::string pred_label;
  std::optional<std::size_t> gt_index;
  std::string gt_label;
  double cost = 0.0;
  std::vector<double> scale;  ///< per block: s_u, s_v, s_n
  std::string error;          ///< set when the part could not be rescaled
};

struct CadifyResult {
  std::optional<CadProgram> program;  ///< absent when nothing matched
  std::vector<CadifyEntry> entries;   ///< one per predicted part
  std::vector<std::size_t> unmatched_gt;
};

/// Matches predicted parts to ground-truth parts by label, drops unmatched
/// predictions and rescales the rest into their matched boxes.
CadifyResult cadify_program(const CadProgram& pred, const std::vector<GtPart>& gt, const EmbeddingProvider& embedder,
                            const Tolerances& tol = {}, bool refit_arcs = true);

}  // namespace sxcad
