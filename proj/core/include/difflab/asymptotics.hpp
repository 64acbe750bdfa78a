#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "difflab/coefficients.hpp"
#include "difflab/distance.hpp"
#include "difflab/evolution.hpp"
#include "difflab/form.hpp"
#include "difflab/region.hpp"

namespace difflab {

struct FitWindow
{
  double t_min = 0.0;
  double t_max = 0.0;
};

enum class FitStatus
{
  Ok,
  // Some trace value in the window underflowed; lower_bound_d_squared is certified.
  ExceedsResolvableBound,
};

const char *to_string(FitStatus s);

// Regression of y(t) = -4 t log(value) on t; the intercept estimates d(A;B)^2.
struct VaradhanFit
{
  double fitted_d_squared = 0.0;  // intercept clamped below at 0
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 1.0;
  // 2 x standard error of the intercept plus twice the change from dropping the largest t.
  double confidence = 0.0;
  FitWindow window;
  std::size_t points_used = 0;
  FitStatus status = FitStatus::Ok;
  double lower_bound_d_squared = 0.0;
};

// Fits every usable point of the trace, or only those inside the window.
VaradhanFit fit_varadhan(const SemigroupTrace &trace, std::optional<FitWindow> window = std::nullopt);

// Window [t_min, t_max] with t_min = 2 d^2 / hops, where hops is the edge count of the
// shortest path from A to B, and t_max = min(4 t_min, d^2 / 8). Below t_min the lattice
// large-deviation regime biases the fit.
FitWindow default_fit_window(const DiscreteForm &form, const RegionSet &a, const RegionSet &b);

std::vector<double> log_spaced(double t_min, double t_max, std::size_t count);

enum class SweepAxis
{
  Epsilon,
  Dx,
  CutoffRadius,
};

enum class Verdict
{
  Converged,
  Diverging,
  Inconclusive,
};

const char *to_string(SweepAxis a);
const char *to_string(Verdict v);

struct SweepPoint
{
  double parameter = 0.0;
  double fitted_d_squared = 0.0;
  double confidence = 0.0;
  double eikonal_d_squared = 0.0;
  double resistance = 0.0;  // refinement sweeps only
};

struct SweepResult
{
  SweepAxis axis = SweepAxis::Epsilon;
  std::vector<SweepPoint> points;
  Verdict verdict = Verdict::Inconclusive;
  // Log-log slope of fitted d^2 against the parameter over the last two points.
  double rate = 0.0;
};

// Diverging when the last three values grow by >= 20% at each step, converged when both
// steps change by < 3%, inconclusive otherwise.
Verdict classify(std::span<const double> values, double *rate = nullptr, std::span<const double> parameters = {});

// For each epsilon (descending): regularize, trace, fit. Empty times selects the default
// window of each regularized form with 12 log-spaced points.
SweepResult epsilon_sweep(const DiscreteForm &base, const RegionSet &a, const RegionSet &b,
                          std::span<const double> epsilons, std::span<const double> times);

// Geometry of a refinement study; regions are intervals (1D) or boxes (2D).
struct RefinementProblem
{
  CoefficientField field;
  int dim = 1;
  std::array<double, 2> x_bounds{-1.0, 1.0};
  std::array<double, 2> y_bounds{-1.0, 1.0};
  std::array<double, 2> a_x{0.0, 0.0}, a_y{0.0, 0.0};
  std::array<double, 2> b_x{0.0, 0.0}, b_y{0.0, 0.0};
  // Resistance is measured between the nodes nearest these points.
  Point resistance_from{-1.0, 0.0};
  Point resistance_to{1.0, 0.0};
  std::size_t time_count = 12;
  int threads = 1;
};

// One fit per cell count (ascending), parameter = dx along the first axis.
SweepResult refinement_sweep(const RefinementProblem &problem, std::span<const int> cells);

struct LocalizationResult
{
  double discrepancy = 0.0;
  double margin = 0.0;  // Euclidean distance from A to the complement of the plateau
  double bound = 0.0;   // lambda^{-1/2} margin
};

// Largest relative L2 gap between cos(t H^{1/2}) phi for the full and the truncated form over
// 16 evenly spaced t in (0, t_max] and 5 random phi supported in A.
LocalizationResult localization_check(const DiscreteForm &base, const RegionSet &a, const CutoffFunction &cutoff,
                                      double t_max, std::uint64_t seed = 0x5EED, bool enforce_bound = true);

struct TrotterResult
{
  bool sandwich_holds = true;
  double worst_upper = 0.0;  // max of log S^{h+v} - log S^{h}, should be <= 0
  double worst_lower = 0.0;  // max of log S^{h} - t sup V - log S^{h+v}, should be <= 0
  double potential_sup = 0.0;
  VaradhanFit fit_h;
  VaradhanFit fit_hv;
  double relative_gap = 0.0;
  bool fits_agree = true;
  SemigroupTrace trace_h;
  SemigroupTrace trace_hv;
};

TrotterResult trotter_sandwich_check(const DiscreteForm &base, const Potential &potential, const RegionSet &a,
                                     const RegionSet &b, std::span<const double> times,
                                     std::optional<FitWindow> window = std::nullopt, double fit_tolerance = 0.03);

// ||P_A S_t P_B|| by power iteration in extended precision, relative accuracy ~tol.
SemigroupTrace projection_norm_trace(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                     std::span<const double> times, double tol = 1e-10);

struct DaviesGaffneyResult
{
  bool holds = true;
  double worst_excess = 0.0;  // max of value - bound - slack
  double distance = 0.0;
};

// value <= exp(-d^2 / 4t) |A|^{1/2} |B|^{1/2} + error_bound + slack at every trace point.
DaviesGaffneyResult davies_gaffney_check(const SemigroupTrace &trace, double distance, double measure_a,
                                         double measure_b, double slack = 1e-8);

// Squared L2(mu) mass of u outside the set {x : dist(x, bbox A) <= radius}, relative to
// ||1_A||^2.
double mass_outside(const Grid &grid, std::span<const double> u, const RegionSet &a, double radius);

// Largest relative mass of cos(t H^{1/2}) 1_A beyond sqrt(lambda) t + 3 dx over the times.
double finite_propagation_check(const DiscreteForm &form, const RegionSet &a, std::span<const double> times);

}  // namespace difflab
