#pragma once

#include <cstdint>
#include <vector>

#include "sxcad/vec.hpp"

namespace sxcad {

/// Static 3-d tree over a point set for exact nearest-neighbour queries.
///
/// Ties are resolved toward the lowest point index, so results match a linear
/// scan that keeps the first minimum.
class KdTree {
 public:
  struct Hit {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  explicit KdTree(std::vector<Vec3> points);

  /// Throws InvariantError on an empty tree.
  Hit nearest(Vec3 query) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end, int depth);
  void search(int node, Vec3 q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace sxcad
