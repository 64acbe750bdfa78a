#include "difflab/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "difflab/error.hpp"

namespace difflab {

RegionSet::RegionSet(const Grid &grid, std::vector<std::uint8_t> mask, std::string description)
  : mask_(std::move(mask)), description_(std::move(description))
{
  if (mask_.size() != grid.node_count())
    throw InvalidArgument("region mask does not match grid");
  constexpr double inf = std::numeric_limits<double>::infinity();
  Point lo{inf, inf}, hi{-inf, -inf};
  for (std::size_t n = 0; n < mask_.size(); ++n) {
    if (mask_[n]) {
      const auto node = static_cast<NodeIndex>(n);
      nodes_.push_back(node);
      measure_ += grid.node_measure(node);
      const Point p = grid.position(node);
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
  }
  if (!nodes_.empty()) {
    bbox_lo_ = lo;
    bbox_hi_ = hi;
  }
}

double RegionSet::box_distance(const Point &p) const
{
  if (nodes_.empty())
    return std::numeric_limits<double>::infinity();
  const double dx = std::max({bbox_lo_[0] - p[0], 0.0, p[0] - bbox_hi_[0]});
  const double dy = std::max({bbox_lo_[1] - p[1], 0.0, p[1] - bbox_hi_[1]});
  return std::hypot(dx, dy);
}

RegionSet RegionSet::interval(const Grid &grid, double lo, double hi)
{
  if (grid.dim() != 1)
    throw InvalidArgument("interval regions need a 1D grid");
  if (!(hi >= lo))
    throw InvalidArgument("interval region needs lo <= hi");
  const double snap = 1e-9 * grid.spacing(0);
  std::vector<std::uint8_t> mask(grid.node_count(), 0);
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const double x = grid.position(static_cast<NodeIndex>(n))[0];
    mask[n] = (x >= lo - snap && x <= hi + snap) ? 1 : 0;
  }
  std::ostringstream d;
  d << "[" << lo << "," << hi << "]";
  return RegionSet(grid, std::move(mask), d.str());
}

RegionSet RegionSet::box(const Grid &grid, std::array<double, 2> xr, std::array<double, 2> yr)
{
  if (grid.dim() != 2)
    throw InvalidArgument("box regions need a 2D grid");
  if (!(xr[1] >= xr[0]) || !(yr[1] >= yr[0]))
    throw InvalidArgument("box region needs lo <= hi on both axes");
  const double sx = 1e-9 * grid.spacing(0), sy = 1e-9 * grid.spacing(1);
  std::vector<std::uint8_t> mask(grid.node_count(), 0);
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const Point p = grid.position(static_cast<NodeIndex>(n));
    mask[n] = (p[0] >= xr[0] - sx && p[0] <= xr[1] + sx && p[1] >= yr[0] - sy && p[1] <= yr[1] + sy);
  }
  std::ostringstream d;
  d << "[" << xr[0] << "," << xr[1] << "]x[" << yr[0] << "," << yr[1] << "]";
  return RegionSet(grid, std::move(mask), d.str());
}

RegionSet RegionSet::from_nodes(const Grid &grid, std::vector<NodeIndex> nodes, std::string description)
{
  std::vector<std::uint8_t> mask(grid.node_count(), 0);
  for (NodeIndex n : nodes) {
    if (n >= mask.size())
      throw InvalidArgument("region node index out of range");
    mask[n] = 1;
  }
  return RegionSet(grid, std::move(mask), std::move(description));
}

RegionSet RegionSet::all(const Grid &grid)
{
  return RegionSet(grid, std::vector<std::uint8_t>(grid.node_count(), 1), "X");
}

RegionSet RegionSet::empty(const Grid &grid)
{
  return RegionSet(grid, std::vector<std::uint8_t>(grid.node_count(), 0), "{}");
}

std::vector<double> RegionSet::indicator() const
{
  std::vector<double> v(mask_.size());
  for (std::size_t n = 0; n < v.size(); ++n)
    v[n] = mask_[n] ? 1.0 : 0.0;
  return v;
}

void RegionSet::project(std::span<double> values) const
{
  if (values.size() != mask_.size())
    throw InvalidArgument("projection: vector length does not match region grid");
  for (std::size_t n = 0; n < values.size(); ++n)
    if (!mask_[n])
      values[n] = 0.0;
}

RegionSet RegionSet::intersect(const Grid &grid, const RegionSet &other) const
{
  std::vector<std::uint8_t> mask(mask_.size());
  for (std::size_t n = 0; n < mask.size(); ++n)
    mask[n] = mask_[n] && other.contains(static_cast<NodeIndex>(n));
  return RegionSet(grid, std::move(mask), description_ + "&" + other.description_);
}

RegionSet RegionSet::unite(const Grid &grid, const RegionSet &other) const
{
  std::vector<std::uint8_t> mask(mask_.size());
  for (std::size_t n = 0; n < mask.size(); ++n)
    mask[n] = mask_[n] || other.contains(static_cast<NodeIndex>(n));
  return RegionSet(grid, std::move(mask), description_ + "|" + other.description_);
}

RegionSet RegionSet::complement(const Grid &grid) const
{
  std::vector<std::uint8_t> mask(mask_.size());
  for (std::size_t n = 0; n < mask.size(); ++n)
    mask[n] = !mask_[n];
  return RegionSet(grid, std::move(mask), "X\\" + description_);
}

bool RegionSet::subset_of(const RegionSet &other) const
{
  for (NodeIndex n : nodes_)
    if (!other.contains(n))
      return false;
  return true;
}

}  // namespace difflab
