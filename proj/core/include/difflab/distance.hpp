#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "difflab/form.hpp"
#include "difflab/region.hpp"

namespace difflab {

enum class DistanceMethod
{
  Eikonal,
  Variational,
  DecayFit,
};

const char *to_string(DistanceMethod m);

struct DistanceReport
{
  double value = 0.0;  // +inf when the sets are disconnected
  DistanceMethod method = DistanceMethod::Eikonal;
  // Variational reports: false when sup Gamma(psi) exceeded 1 + tol. value is then 0.
  bool valid = true;
  double max_gamma = 0.0;
  std::optional<std::vector<double>> certificate;
  // Eikonal reports: node path from A to the closest node of B.
  std::vector<NodeIndex> path;
};

// Shortest-path distance from every node to the source set. Edge lengths follow the
// sampled coefficient: |h| / sqrt(c) in 1D, sqrt(h^T C^{-1} h) in 2D (axis and diagonal
// edges). Zero-weight axis edges and singular directions get infinite length.
std::vector<double> eikonal_distance(const DiscreteForm &form, const RegionSet &source);

// Same, also returning the predecessor of every node on a shortest path (-1 at sources and
// unreachable nodes).
std::vector<double> eikonal_distance(const DiscreteForm &form, const RegionSet &source,
                                     std::vector<std::int64_t> &predecessor);

// Length of edge e in the shortest-path metric of the form.
double edge_length(const DiscreteForm &form, std::size_t e);

DistanceReport set_distance(const DiscreteForm &form, const RegionSet &a, const RegionSet &b);

// Weak-duality check of a test function. A valid certificate gives a lower bound on the
// distance: value = max(0, min_A psi - max_B psi).
DistanceReport verify_certificate(const DiscreteForm &form, std::span<const double> psi, const RegionSet &a,
                                  const RegionSet &b, double tol);

// 3 dx times a Lipschitz estimate of c^{-1/2} over neighbouring edges (floor 1e-12).
double default_certificate_tolerance(const DiscreteForm &form);

// Distance to B clamped at cap and scaled so that sup Gamma(psi) <= 1.
std::vector<double> certificate_from_eikonal(const DiscreteForm &form, const RegionSet &b, double cap);

// Potential difference driven by a unit current from a to b. +inf when every path between
// the nodes crosses a zero-weight edge.
double effective_resistance(const DiscreteForm &form, NodeIndex a, NodeIndex b);

// d(A cap X_n; B) for each exhaustion set; empty intersections give +inf.
std::vector<DistanceReport> exhaustion_distance(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                                std::span<const RegionSet> exhaustion);

}  // namespace difflab
