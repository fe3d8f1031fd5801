#pragma once

#include <iosfwd>
#include <string>

#include "sxcad/geom.hpp"
#include "sxcad/metrics.hpp"

namespace sxcad {

/// Wavefront OBJ with one group per body: `g part_<i>` (`part_<i>_cut` for
/// Cut bodies). Vertices are written with shortest round-trip decimals.
void write_obj(std::ostream& out, const LabeledMesh& mesh);

/// Label sidecar for write_obj: part labels plus per-triangle part indices.
std::string mesh_labels_json(const LabeledMesh& mesh);

/// Text cloud: `# label <index> <name>` header lines, then `x y z label`.
void write_point_cloud(std::ostream& out, const LabeledPointCloud& cloud);
/// Throws FormatError naming the offending line.
LabeledPointCloud read_point_cloud(std::istream& in);

}  // namespace sxcad
