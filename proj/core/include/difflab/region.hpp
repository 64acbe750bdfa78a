#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "difflab/grid.hpp"

namespace difflab {

// Measurable subset of the domain, represented by the grid nodes it contains.
class RegionSet
{
public:
  // Nodes with lo <= x <= hi (closed, with a 1e-9 dx snap tolerance).
  static RegionSet interval(const Grid &grid, double lo, double hi);
  static RegionSet box(const Grid &grid, std::array<double, 2> x_range, std::array<double, 2> y_range);
  static RegionSet from_nodes(const Grid &grid, std::vector<NodeIndex> nodes, std::string description);
  static RegionSet all(const Grid &grid);
  static RegionSet empty(const Grid &grid);

  const std::vector<NodeIndex> &nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  bool contains(NodeIndex n) const { return n < mask_.size() && mask_[n] != 0; }
  std::size_t grid_node_count() const { return mask_.size(); }

  // |A| = sum of node measures.
  double measure() const { return measure_; }
  const std::string &description() const { return description_; }

  // Axis-aligned bounding box of the member node positions (degenerate when empty).
  const Point &bbox_lower() const { return bbox_lo_; }
  const Point &bbox_upper() const { return bbox_hi_; }
  // Euclidean distance from p to the bounding box.
  double box_distance(const Point &p) const;

  std::vector<double> indicator() const;

  // Orthogonal projection onto L2(A): zero every entry outside the region.
  void project(std::span<double> values) const;

  RegionSet intersect(const Grid &grid, const RegionSet &other) const;
  RegionSet unite(const Grid &grid, const RegionSet &other) const;
  RegionSet complement(const Grid &grid) const;

  bool subset_of(const RegionSet &other) const;

private:
  RegionSet(const Grid &grid, std::vector<std::uint8_t> mask, std::string description);

  std::vector<std::uint8_t> mask_;
  std::vector<NodeIndex> nodes_;
  double measure_ = 0.0;
  std::string description_;
  Point bbox_lo_{0.0, 0.0};
  Point bbox_hi_{0.0, 0.0};
};

}  // namespace difflab
