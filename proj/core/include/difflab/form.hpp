#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "difflab/coefficients.hpp"
#include "difflab/grid.hpp"
#include "difflab/region.hpp"

namespace difflab {

enum class EdgeKind : std::uint8_t
{
  AxisX,
  AxisY,
  Diagonal,      // (i, j) -- (i+1, j+1)
  AntiDiagonal,  // (i+1, j) -- (i, j+1)
};

struct Edge
{
  NodeIndex u;
  NodeIndex v;
  EdgeKind kind;
};

// Stencil topology of a grid: every axis edge, followed in 2D by both diagonals of every
// cell. Diagonals carry cross-term weights (often zero) and serve as metric edges for the
// eight-neighbour shortest-path computation.
std::shared_ptr<const std::vector<Edge>> stencil_edges(const Grid &grid);

// Sparse symmetric quadratic form
//   h(phi) = sum_e w_e (phi_u - phi_v)^2 + sum_n p_n phi_n^2
// on a grid, with node potentials p_n = V(x_n) mu_n. Each edge also carries the coefficient
// matrix sampled at its midpoint, which defines its length in the intrinsic metric.
class DiscreteForm
{
public:
  DiscreteForm(std::shared_ptr<const Grid> grid, std::shared_ptr<const std::vector<Edge>> edges,
               std::vector<double> weights, std::vector<SymMat2> tensors,
               std::vector<double> node_potential, double lambda_bound);

  const Grid &grid() const { return *grid_; }
  const std::shared_ptr<const Grid> &grid_ptr() const { return grid_; }
  std::span<const Edge> edges() const { return *edges_; }
  const std::shared_ptr<const std::vector<Edge>> &edges_ptr() const { return edges_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const SymMat2> tensors() const { return tensors_; }
  std::span<const double> node_potential() const { return potential_; }
  bool has_potential() const { return !potential_.empty(); }
  double lambda_bound() const { return lambda_; }
  std::size_t node_count() const { return grid_->node_count(); }

  // True when every weight and potential vanishes (H = 0).
  bool is_zero() const;

  double energy(std::span<const double> phi) const;
  double energy_without_potential(std::span<const double> phi) const;

  // out = (L + diag p) phi, the unnormalized operator matrix applied to phi.
  void apply_matrix(std::span<const double> phi, std::span<double> out) const;

  // Euclidean vector of edge e and its length sqrt(h^T C^{-1} h) in the intrinsic metric.
  std::array<double, 2> edge_vector(std::size_t e) const;
  double metric_length(std::size_t e) const;

  // Gershgorin bound on the spectrum of H = M^{-1}(L + diag p).
  double gershgorin_bound() const;

  DiscreteForm with_weights(std::vector<double> weights, std::vector<SymMat2> tensors,
                            std::vector<double> potential, double lambda_bound) const;

private:
  std::shared_ptr<const Grid> grid_;
  std::shared_ptr<const std::vector<Edge>> edges_;
  std::vector<double> weights_;
  std::vector<SymMat2> tensors_;
  std::vector<double> potential_;
  double lambda_;
};

// Cut-off function with values in [0, 1].
class CutoffFunction
{
public:
  static CutoffFunction from_values(const Grid &grid, std::vector<double> values);
  // Phi = 1 within plateau_radius of the region's bounding box, decaying linearly to 0 over
  // ramp_width (Euclidean distance).
  static CutoffFunction around(const Grid &grid, const RegionSet &region, double plateau_radius,
                               double ramp_width);

  std::span<const double> values() const { return values_; }
  const RegionSet &support() const { return support_; }
  const RegionSet &plateau() const { return plateau_; }
  double sup() const;

private:
  CutoffFunction(std::vector<double> values, RegionSet support, RegionSet plateau)
    : values_(std::move(values)), support_(std::move(support)), plateau_(std::move(plateau))
  {
  }

  std::vector<double> values_;
  RegionSet support_;
  RegionSet plateau_;
};

// Finite-volume assembly of sum_ij (d_i phi, c_ij d_j phi) with coefficients sampled at face
// midpoints (axis terms) and cell centres (cross terms). Throws InvalidArgument on dimension
// mismatch, sampled eigenvalues below -1e-12, or cross terms that would need negative weights.
DiscreteForm assemble(const CoefficientField &field, const Grid &grid,
                      const std::optional<Potential> &potential = std::nullopt);
DiscreteForm assemble(const CoefficientField &field, std::shared_ptr<const Grid> grid,
                      const std::optional<Potential> &potential = std::nullopt);

// Unit-coefficient comparison form l on the same grid.
DiscreteForm laplacian_form(std::shared_ptr<const Grid> grid);

// h + epsilon l.
DiscreteForm regularize(const DiscreteForm &form, double epsilon);

// h_Phi with edge weights Phi_e w_e, Phi_e the endpoint average.
DiscreteForm truncate(const DiscreteForm &form, const CutoffFunction &cutoff);

// Adds V(x_n) mu_n to the node potential.
DiscreteForm add_potential(const DiscreteForm &form, const Potential &potential);

// Zeroes every edge whose closed segment meets the closed segment [p0, p1] (2D obstacles).
DiscreteForm remove_edges_meeting_segment(const DiscreteForm &form, const Point &p0, const Point &p1);

// Node density of the energy measure: mu_n^{-1} * 1/2 * sum_{e ~ n} w_e (psi_u - psi_v)^2.
std::vector<double> carre_du_champ(const DiscreteForm &form, std::span<const double> psi);

// Debug format: first line node count, then one "u v w" line per edge with nonzero weight.
void write_triplets(const DiscreteForm &form, std::ostream &out);

}  // namespace difflab
