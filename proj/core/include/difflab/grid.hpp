#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "difflab/coefficients.hpp"

namespace difflab {

using NodeIndex = std::uint32_t;

// Uniform tensor grid on a box, nodes at cell corners. Node (i, j) has index i + j * (nx + 1).
class Grid
{
public:
  static Grid line(double x_min, double x_max, int n_cells);
  static Grid rectangle(std::array<double, 2> x_bounds, std::array<double, 2> y_bounds,
                        std::array<int, 2> n_cells);

  int dim() const { return dim_; }
  double lower(int axis) const { return lo_[axis]; }
  double upper(int axis) const { return hi_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  int nodes_along(int axis) const { return axis < dim_ ? cells_[axis] + 1 : 1; }
  double spacing(int axis) const { return dx_[axis]; }
  double max_spacing() const { return dim_ == 1 ? dx_[0] : std::max(dx_[0], dx_[1]); }

  std::size_t node_count() const { return static_cast<std::size_t>(nodes_along(0)) * nodes_along(1); }
  NodeIndex index(int i, int j = 0) const { return static_cast<NodeIndex>(i + j * nodes_along(0)); }
  std::array<int, 2> ij(NodeIndex n) const
  {
    const int nx = nodes_along(0);
    return {static_cast<int>(n) % nx, static_cast<int>(n) / nx};
  }
  Point position(NodeIndex n) const;

  // Quadrature weight of node n: product of spacings, halved per touching boundary face.
  double node_measure(NodeIndex n) const;
  const std::vector<double> &node_measures() const { return measures_; }
  double total_measure() const;

  NodeIndex nearest_node(const Point &p) const;

  bool same_as(const Grid &o) const;

private:
  Grid() = default;
  void finalize();

  int dim_ = 1;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<double, 2> hi_{0.0, 0.0};
  std::array<int, 2> cells_{0, 0};
  std::array<double, 2> dx_{0.0, 0.0};
  std::vector<double> measures_;
};

}  // namespace difflab
