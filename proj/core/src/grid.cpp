#include "difflab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difflab/error.hpp"

namespace difflab {

Grid Grid::line(double x_min, double x_max, int n_cells)
{
  if (!(x_max > x_min) || n_cells < 1)
    throw InvalidArgument("grid needs x_max > x_min and at least one cell");
  Grid g;
  g.dim_ = 1;
  g.lo_ = {x_min, 0.0};
  g.hi_ = {x_max, 0.0};
  g.cells_ = {n_cells, 0};
  g.finalize();
  return g;
}

Grid Grid::rectangle(std::array<double, 2> x_bounds, std::array<double, 2> y_bounds,
                     std::array<int, 2> n_cells)
{
  if (!(x_bounds[1] > x_bounds[0]) || !(y_bounds[1] > y_bounds[0]) || n_cells[0] < 1 || n_cells[1] < 1)
    throw InvalidArgument("grid needs nonempty bounds and at least one cell per axis");
  Grid g;
  g.dim_ = 2;
  g.lo_ = {x_bounds[0], y_bounds[0]};
  g.hi_ = {x_bounds[1], y_bounds[1]};
  g.cells_ = n_cells;
  g.finalize();
  return g;
}

void Grid::finalize()
{
  for (int a = 0; a < dim_; ++a)
    dx_[a] = (hi_[a] - lo_[a]) / cells_[a];
  const std::size_t n = node_count();
  if (n > std::size_t{1} << 31)
    throw InvalidArgument("grid too large");
  measures_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [i, j] = ij(static_cast<NodeIndex>(k));
    double m = dx_[0];
    if (i == 0 || i == cells_[0])
      m *= 0.5;
    if (dim_ == 2) {
      m *= dx_[1];
      if (j == 0 || j == cells_[1])
        m *= 0.5;
    }
    measures_[k] = m;
  }
}

Point Grid::position(NodeIndex n) const
{
  const auto [i, j] = ij(n);
  // Interpolate from both ends so the last node lands exactly on the upper bound.
  auto coord = [&](int axis, int k) {
    if (k == cells_[axis])
      return hi_[axis];
    return lo_[axis] + k * dx_[axis];
  };
  return {coord(0, i), dim_ == 2 ? coord(1, j) : 0.0};
}

double Grid::node_measure(NodeIndex n) const { return measures_[n]; }

double Grid::total_measure() const
{
  return std::accumulate(measures_.begin(), measures_.end(), 0.0);
}

NodeIndex Grid::nearest_node(const Point &p) const
{
  auto snap = [&](int axis) {
    const double r = std::round((p[axis] - lo_[axis]) / dx_[axis]);
    return std::clamp(static_cast<int>(r), 0, cells_[axis]);
  };
  return index(snap(0), dim_ == 2 ? snap(1) : 0);
}

bool Grid::same_as(const Grid &o) const
{
  return dim_ == o.dim_ && lo_ == o.lo_ && hi_ == o.hi_ && cells_ == o.cells_;
}

}  // namespace difflab
