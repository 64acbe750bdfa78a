#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "difflab/form.hpp"
#include "difflab/region.hpp"

namespace difflab {

enum class SolverKind
{
  Auto,
  DenseSpectral,
  Uniformization,
  Krylov,
};

const char *to_string(SolverKind s);

struct SolverOptions
{
  SolverKind kind = SolverKind::Auto;
  // Dense eigendecomposition is used up to this many nodes under Auto.
  std::size_t dense_limit = 1024;
  // Uniformization is used while t * Lambda stays below this; Krylov above it.
  double uniformization_limit = 2e7;
  std::size_t max_iterations = 20'000'000;
};

struct TracePoint
{
  double t = 0.0;
  double value = 0.0;  // 0 when the value underflows double precision
  double log_value = -std::numeric_limits<double>::infinity();
  double error_bound = 0.0;
};

// Sampled t -> (1_A, S_t 1_B) in the mu-weighted inner product.
struct SemigroupTrace
{
  std::vector<TracePoint> points;
  SolverKind solver = SolverKind::Auto;
  // Values below this are treated as underflow by the fitting code.
  static constexpr double floor = 1e-300;

  std::vector<double> times() const;
  std::vector<double> values() const;
};

// e^{-tH} phi with H = M^{-1}(L + diag p), accurate to tol in the L2(mu) norm.
std::vector<double> apply_semigroup(const DiscreteForm &form, double t, std::span<const double> phi, double tol,
                                    const SolverOptions &opts = {});

// e^{-tH} phi for nonnegative phi by uniformization in extended precision; every entry is
// accurate to relative error ~tol even when it is far below the double range.
// When target is given, accuracy is only enforced on its nodes.
std::vector<long double> apply_semigroup_positive(const DiscreteForm &form, double t,
                                                  std::span<const long double> phi, double tol,
                                                  const RegionSet *target = nullptr);

SemigroupTrace trace_inner_products(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                    std::span<const double> times, const SolverOptions &opts = {});

// cos(t H^{1/2}) phi by a Chebyshev expansion on [0, 1.05 * Gershgorin bound].
std::vector<double> apply_cosine(const DiscreteForm &form, double t, std::span<const double> phi, double tol);

// Several times sharing one recurrence.
std::vector<std::vector<double>> apply_cosine(const DiscreteForm &form, std::span<const double> times,
                                              std::span<const double> phi, double tol);

// Gauss-Legendre quadrature of (pi t)^{-1/2} int_0^{s_max} e^{-s^2/4t} cos(s H^{1/2}) phi ds
// with s_max = 12 sqrt(t), evaluated through one combined Chebyshev recurrence.
std::vector<double> subordinated_semigroup(const DiscreteForm &form, double t, std::span<const double> phi,
                                           int quad_points);

// Relative L2(mu) gap between S_t phi and the Gauss-Legendre quadrature of
// (pi t)^{-1/2} int_0^{s_max} e^{-s^2/4t} cos(s H^{1/2}) phi ds, s_max = 12 sqrt(t).
double check_subordination(const DiscreteForm &form, double t, std::span<const double> phi, int quad_points);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double> &nodes, std::vector<double> &weights);

// (u, v)_mu and ||u||_mu on the grid of the form.
double inner_mu(const Grid &grid, std::span<const double> u, std::span<const double> v);
double norm_mu(const Grid &grid, std::span<const double> u);

}  // namespace difflab
