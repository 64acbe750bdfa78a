#include <gtest/gtest.h>

#include <cmath>

#include "difflab/asymptotics.hpp"
#include "difflab/error.hpp"
#include "oracles.hpp"

using namespace difflab;
using namespace difflab::testing;

namespace {

std::shared_ptr<const Grid> line(double lo, double hi, int n)
{
  return std::make_shared<const Grid>(Grid::line(lo, hi, n));
}

SemigroupTrace synthetic(double d2, double slope, std::span<const double> times)
{
  SemigroupTrace tr;
  for (double t : times) {
    TracePoint p;
    p.t = t;
    p.log_value = -(d2 + slope * t) / (4.0 * t);
    p.value = std::exp(p.log_value);
    tr.points.push_back(p);
  }
  return tr;
}

}  // namespace

TEST(Fit, RecoversExactIntercept)
{
  const auto times = log_spaced(1e-3, 2e-2, 10);
  const VaradhanFit fit = fit_varadhan(synthetic(4.0, 0.7, times));
  EXPECT_NEAR(fit.fitted_d_squared, 4.0, 1e-10);
  EXPECT_NEAR(fit.slope, 0.7, 1e-8);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.status, FitStatus::Ok);
  EXPECT_EQ(fit.points_used, 10u);
}

TEST(Fit, WindowSelectsPoints)
{
  const auto times = log_spaced(1e-3, 1e-1, 20);
  const VaradhanFit fit = fit_varadhan(synthetic(2.0, 0.0, times), FitWindow{5e-3, 5e-2});
  EXPECT_LT(fit.points_used, 20u);
  EXPECT_GE(fit.points_used, 5u);
  EXPECT_NEAR(fit.fitted_d_squared, 2.0, 1e-10);
}

TEST(Fit, AnalyticGaussianPairGivesSquaredGap)
{
  const auto times = log_spaced(1e-3, 2e-2, 12);
  SemigroupTrace tr;
  for (double t : times) {
    TracePoint p;
    p.t = t;
    p.log_value = log_gaussian_pair(-2.0, -1.0, 1.0, 2.0, t);
    p.value = std::exp(p.log_value);
    tr.points.push_back(p);
  }
  EXPECT_NEAR(fit_varadhan(tr).fitted_d_squared, 4.0, 0.1);
}

TEST(Fit, ConstantTraceFitsZero)
{
  SemigroupTrace tr;
  for (double t : log_spaced(1e-3, 1e-1, 8))
    tr.points.push_back({t, 1.0, 0.0, 0.0});
  EXPECT_NEAR(fit_varadhan(tr).fitted_d_squared, 0.0, 1e-12);
}

TEST(Fit, UnderflowGivesCertifiedLowerBound)
{
  SemigroupTrace tr;
  for (double t : log_spaced(1e-3, 1e-2, 6)) {
    TracePoint p;
    p.t = t;
    p.value = 0.0;
    p.log_value = -std::numeric_limits<double>::infinity();
    tr.points.push_back(p);
  }
  const VaradhanFit fit = fit_varadhan(tr);
  EXPECT_EQ(fit.status, FitStatus::ExceedsResolvableBound);
  EXPECT_GT(fit.lower_bound_d_squared, 0.0);
  EXPECT_GE(fit.fitted_d_squared, fit.lower_bound_d_squared);
}

TEST(Fit, TooFewPointsThrows)
{
  const double times[] = {0.01, 0.02, 0.03};
  EXPECT_THROW(fit_varadhan(synthetic(1.0, 0.0, times)), InvalidArgument);
}

TEST(LogSpaced, Endpoints)
{
  const auto t = log_spaced(1e-3, 1e-1, 3);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], 1e-3);
  EXPECT_NEAR(t[1], 1e-2, 1e-15);
  EXPECT_EQ(t[2], 1e-1);
  EXPECT_THROW(log_spaced(1.0, 0.5, 4), RangeError);
}

TEST(Classify, Verdicts)
{
  const double growing[] = {1.0, 1.3, 1.7};
  const double flat[] = {7.7, 7.6, 7.55};
  const double mixed[] = {1.0, 1.1, 1.5};
  EXPECT_EQ(classify(growing), Verdict::Diverging);
  EXPECT_EQ(classify(flat), Verdict::Converged);
  EXPECT_EQ(classify(mixed), Verdict::Inconclusive);
  const double two[] = {1.0, 1.0};
  EXPECT_EQ(classify(two), Verdict::Inconclusive);
}

TEST(Classify, RateIsLogLogSlope)
{
  const double values[] = {1.0, 2.0, 4.0};
  const double params[] = {0.1, 0.01, 0.001};
  double rate = 0.0;
  classify(values, &rate, params);
  EXPECT_NEAR(rate, -std::log(2.0) / std::log(10.0), 1e-12);
}

TEST(EpsilonSweep, EllipticFormIsStable)
{
  auto g = line(-2.0, 2.0, 256);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.5, 1.0);
  const double eps[] = {1e-2, 1e-3, 1e-4};
  const SweepResult r = epsilon_sweep(h, a, b, eps, {});
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.verdict, Verdict::Converged);
  const double last = r.points.back().fitted_d_squared;
  for (const SweepPoint &p : r.points)
    EXPECT_NEAR(p.fitted_d_squared, last, 0.03 * last);
}

TEST(EpsilonSweep, VanishingFormDiverges)
{
  auto g = line(-2.0, 2.0, 128);
  const DiscreteForm h = assemble(make_constant(0.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.5, 1.0);
  const double eps[] = {1.0, 0.5, 0.25};
  const SweepResult r = epsilon_sweep(h, a, b, eps, {});
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  for (std::size_t i = 1; i < r.points.size(); ++i)
    EXPECT_GT(r.points[i].fitted_d_squared, r.points[i - 1].fitted_d_squared);
  // eps * l runs l at time eps * t, so the fit scales like 1 / eps.
  for (std::size_t i = 1; i < r.points.size(); ++i)
    EXPECT_NEAR(r.points[i].fitted_d_squared / r.points[i - 1].fitted_d_squared, 2.0, 1e-6);
}

TEST(EpsilonSweep, RejectsAscendingEpsilons)
{
  auto g = line(-1.0, 1.0, 16);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const double eps[] = {0.1, 0.2};
  EXPECT_THROW(epsilon_sweep(h, a, a, eps, {}), RangeError);
}

TEST(Localization, FullCutoffChangesNothing)
{
  auto g = line(-1.0, 1.0, 64);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const RegionSet a = RegionSet::interval(*g, -0.2, 0.2);
  const auto one = CutoffFunction::from_values(*g, std::vector<double>(g->node_count(), 1.0));
  const LocalizationResult r = localization_check(h, a, one, 1.0, 7, false);
  EXPECT_LE(r.discrepancy, 1e-13);
}

TEST(Localization, HoldsInsideTheLightCone)
{
  // The lattice wave front spreads like (t / dx)^{1/3} dx, so the margin needs many cells.
  auto g = line(-1.25, 1.25, 2560);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -0.05, 0.05);
  const auto phi = CutoffFunction::around(*g, a, 0.5, 0.5);
  const LocalizationResult probe = localization_check(h, a, phi, 1e-3);
  EXPECT_NEAR(probe.margin, 0.5, 2.0 * g->spacing(0));
  EXPECT_NEAR(probe.bound, probe.margin / std::sqrt(h.lambda_bound()), 1e-12);
  const LocalizationResult inside = localization_check(h, a, phi, 0.95 * probe.bound);
  EXPECT_LE(inside.discrepancy, 1e-8);
  const LocalizationResult outside = localization_check(h, a, phi, 1.25 * probe.bound, 0x5EED, false);
  EXPECT_GT(outside.discrepancy, 1e-3);
  EXPECT_THROW(localization_check(h, a, phi, 1.25 * probe.bound), RangeError);
}

TEST(Localization, PlateauMustContainRegion)
{
  auto g = line(-1.0, 1.0, 64);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -0.5, 0.5);
  const auto small = CutoffFunction::around(*g, RegionSet::interval(*g, 0.0, 0.1), 0.05, 0.1);
  EXPECT_THROW(localization_check(h, a, small, 0.01), RangeError);
}

TEST(Trotter, ZeroPotentialIsExact)
{
  auto g = line(-2.0, 2.0, 256);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.5, 1.0);
  const auto times = log_spaced(0.01, 0.05, 8);
  const TrotterResult r = trotter_sandwich_check(h, make_constant_potential(0.0), a, b, times);
  EXPECT_TRUE(r.sandwich_holds);
  EXPECT_NEAR(r.worst_upper, 0.0, 1e-10);
  EXPECT_NEAR(r.worst_lower, 0.0, 1e-10);
  EXPECT_LE(r.relative_gap, 1e-10);
}

TEST(Trotter, ConstantPotentialShiftsExactly)
{
  auto g = line(-2.0, 2.0, 256);
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.5, 1.0);
  const auto times = log_spaced(0.01, 0.05, 8);
  const double v0 = 3.0;
  const TrotterResult r = trotter_sandwich_check(h, make_constant_potential(v0), a, b, times);
  EXPECT_TRUE(r.sandwich_holds);
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_NEAR(r.trace_hv.points[i].log_value - r.trace_h.points[i].log_value, -v0 * times[i], 1e-8);
  // -4 t log K_t gains 4 v0 t^2, which the linear fit absorbs almost entirely.
  EXPECT_LE(r.relative_gap, 0.01);
}

TEST(Trotter, QuadraticPotentialKeepsTheDistance)
{
  auto g = line(-4.0, 4.0, 1024);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -2.0, -1.0);
  const RegionSet b = RegionSet::interval(*g, 1.0, 2.0);
  const FitWindow w = default_fit_window(h, a, b);
  const auto times = log_spaced(w.t_min, w.t_max, 10);
  const TrotterResult r = trotter_sandwich_check(h, make_quadratic_potential(1.0), a, b, times);
  EXPECT_TRUE(r.sandwich_holds);
  EXPECT_TRUE(r.fits_agree);
  EXPECT_LE(r.relative_gap, 0.03);
  EXPECT_LE(r.worst_upper, 0.0);
}

TEST(Trotter, UnboundedPotentialRejected)
{
  auto g = line(-1.0, 1.0, 16);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const double times[] = {0.1};
  const Potential inf([](const Point &) { return std::numeric_limits<double>::infinity(); }, std::nullopt, false,
                      "custom");
  EXPECT_THROW(trotter_sandwich_check(h, inf, a, a, times), RangeError);
}

TEST(ProjectionNorm, MatchesSingularValue)
{
  auto g = line(-1.0, 1.0, 63);
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const Spectral spec(dense_from_form(h));
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.4);
  const RegionSet b = RegionSet::interval(*g, 0.2, 0.7);
  std::vector<char> in_a(g->node_count()), in_b(g->node_count());
  for (NodeIndex n = 0; n < g->node_count(); ++n) {
    in_a[n] = a.contains(n);
    in_b[n] = b.contains(n);
  }
  const double times[] = {0.01, 0.1, 1.0};
  const SemigroupTrace tr = projection_norm_trace(h, a, b, times, 1e-12);
  for (std::size_t k = 0; k < 3; ++k) {
    const double want = spec.projection_norm(times[k], in_a, in_b);
    // The dense SVD carries ~1e-14 absolute round-off.
    EXPECT_NEAR(tr.points[k].value, want, 1e-8 * want + 1e-13) << times[k];
  }
}

TEST(DaviesGaffney, HoldsOnDegenerateLine)
{
  auto g = line(-2.0, 2.0, 512);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const RegionSet a = RegionSet::interval(*g, -1.5, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.25, 1.0);
  const double d = set_distance(h, a, b).value;
  const auto times = log_spaced(1e-3, 1.0, 12);
  const DaviesGaffneyResult r = davies_gaffney_check(trace_inner_products(h, a, b, times), d, a.measure(), b.measure());
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.worst_excess, 0.0);
  EXPECT_EQ(r.distance, d);
}

TEST(DaviesGaffney, FlagsViolation)
{
  SemigroupTrace tr;
  tr.points.push_back({0.1, 0.5, std::log(0.5), 0.0});
  const DaviesGaffneyResult r = davies_gaffney_check(tr, 2.0, 1.0, 1.0);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.worst_excess, 0.5 - std::exp(-10.0) - 1e-8, 1e-12);
}

TEST(MassOutside, CountsOnlyNodesBeyondRadius)
{
  auto g = line(0.0, 1.0, 10);
  const RegionSet a = RegionSet::interval(*g, 0.0, 0.0);
  std::vector<double> u(g->node_count(), 1.0);
  // Nodes at 0.3 and closer are inside, 0.4 .. 1.0 outside.
  EXPECT_NEAR(mass_outside(*g, u, a, 0.3), (6.5 * 0.1) / a.measure(), 1e-12);
  EXPECT_EQ(mass_outside(*g, u, a, 1.0), 0.0);
}
