#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "difflab/asymptotics.hpp"
#include "difflab/error.hpp"
#include "difflab/evolution.hpp"
#include "difflab/form.hpp"
#include "oracles.hpp"

using namespace difflab;
using namespace difflab::testing;

namespace {

std::shared_ptr<const Grid> line(double lo, double hi, int n)
{
  return std::make_shared<const Grid>(Grid::line(lo, hi, n));
}

std::vector<double> wiggle(std::size_t n)
{
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::sin(3.0 * i) + (i > n / 3 && i < n / 2 ? 1.0 : 0.0);
  return v;
}

double rel_gap(const Eigen::VectorXd &mu, std::span<const double> got, const Eigen::VectorXd &want)
{
  return mu_norm(mu, to_eigen(got) - want) / mu_norm(mu, want);
}

const SolverKind kSolvers[] = {SolverKind::DenseSpectral, SolverKind::Uniformization, SolverKind::Krylov};

}  // namespace

TEST(Semigroup, ZeroFormIsIdentity)
{
  auto g = line(0.0, 1.0, 32);
  const DiscreteForm h = assemble(make_constant(0.0), g);
  const auto phi = wiggle(g->node_count());
  for (SolverKind k : kSolvers) {
    const auto out = apply_semigroup(h, 3.0, phi, 1e-12, {.kind = k});
    for (std::size_t i = 0; i < phi.size(); ++i)
      EXPECT_EQ(out[i], phi[i]) << to_string(k);
  }
}

TEST(Semigroup, ConstantsAreInvariant)
{
  auto g = line(-1.0, 1.0, 100);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const std::vector<double> one(g->node_count(), 1.0);
  for (SolverKind k : kSolvers) {
    const auto out = apply_semigroup(h, 0.7, one, 1e-12, {.kind = k});
    for (double v : out)
      EXPECT_NEAR(v, 1.0, 1e-10) << to_string(k);
  }
}

TEST(Semigroup, MatchesGaussianOnTheLine)
{
  const int cells = 8 * 1024;
  auto g = line(-4.0, 4.0, cells);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -0.1, 0.1);
  const auto phi = a.indicator();
  const double t = 0.01;
  const auto out = apply_semigroup(h, t, phi, 1e-12);
  // The nodal indicator is the indicator of its dual cells.
  const double dx = g->spacing(0);
  const double lo = g->position(a.nodes().front())[0] - dx / 2.0;
  const double hi = g->position(a.nodes().back())[0] + dx / 2.0;
  double err = 0.0;
  for (NodeIndex n = 0; n < g->node_count(); ++n) {
    const double d = out[n] - heat_indicator_solution(g->position(n)[0], lo, hi, t);
    err += g->node_measure(n) * d * d;
  }
  EXPECT_LE(std::sqrt(err), 1e-4);
}

TEST(Semigroup, SolversAgreeWithSpectralOracle)
{
  auto g = line(-1.0, 1.0, 80);
  const DiscreteForm h = add_potential(assemble(make_c_delta(0.25), g), make_quadratic_potential(2.0));
  const DenseSystem sys = dense_from_form(h);
  const Spectral spec(sys);
  const auto phi = wiggle(g->node_count());
  for (double t : {1e-3, 0.1, 2.0}) {
    const Eigen::VectorXd want = spec.heat(t, to_eigen(phi));
    for (SolverKind k : kSolvers) {
      const auto out = apply_semigroup(h, t, phi, 1e-12, {.kind = k});
      EXPECT_LE(rel_gap(sys.mu, out, want), 1e-9) << to_string(k) << " t=" << t;
    }
  }
}

TEST(Semigroup, TwoDimensionalAnisotropicMatchesOracle)
{
  auto g = std::make_shared<const Grid>(Grid::rectangle({-1.0, 1.0}, {-1.0, 1.0}, {12, 10}));
  const DiscreteForm h = assemble(make_constant(2, {2.0, 0.4, 1.0}), g);
  const Spectral spec(dense_from_form(h));
  const auto phi = wiggle(g->node_count());
  const Eigen::VectorXd want = spec.heat(0.3, to_eigen(phi));
  for (SolverKind k : kSolvers) {
    const auto out = apply_semigroup(h, 0.3, phi, 1e-12, {.kind = k});
    EXPECT_LE(rel_gap(dense_from_form(h).mu, out, want), 1e-9) << to_string(k);
  }
}

TEST(Semigroup, PositiveSolverResolvesTinyValues)
{
  // Unit chain started at the reflecting end: folding onto the infinite chain gives
  // e^{-2rt} I_k(2rt) at node k, r = 1 / dx^2, until the far end is felt.
  const int cells = 200;
  auto g = line(0.0, 2.0, cells);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const double dx = g->spacing(0);
  const double t = 2e-4, z = 2.0 * t / (dx * dx);
  std::vector<long double> phi(g->node_count(), 0.0L);
  phi[0] = 1.0L;
  const auto out = apply_semigroup_positive(h, t, phi, 1e-12);
  for (int k : {0, 10, 40, 80, 120, 160, 190, 196}) {
    // log I_k(z) by its power series, summed relative to the leading term.
    long double sum = 0.0L, term = 1.0L;
    for (int m = 0; m < 200; ++m) {
      sum += term;
      term *= (z / 2.0L) * (z / 2.0L) / ((m + 1.0L) * (m + 1.0L + k));
    }
    const long double log_want = -z + k * std::log(z / 2.0L) - std::lgamma(k + 1.0L) + std::log(sum);
    EXPECT_NEAR(static_cast<double>(std::log(out[k]) - log_want), 0.0, 1e-8) << k;
  }
  EXPECT_LT(out[196], 1e-300L);
}

TEST(Semigroup, RejectsBadInput)
{
  auto g = line(0.0, 1.0, 8);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  EXPECT_THROW(apply_semigroup(h, 1.0, std::vector<double>(3, 1.0), 1e-10), std::exception);
  EXPECT_THROW(apply_semigroup(h, -1.0, std::vector<double>(9, 1.0), 1e-10), std::exception);
}

TEST(Trace, EquilibriumValueAtLargeTime)
{
  auto g = line(0.0, 1.0, 40);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, 0.0, 0.2);
  const RegionSet b = RegionSet::interval(*g, 0.7, 1.0);
  const double times[] = {50.0};
  const auto tr = trace_inner_products(h, a, b, times);
  EXPECT_NEAR(tr.points[0].value, a.measure() * b.measure() / g->total_measure(), 1e-10);
}

TEST(Trace, MatchesDenseOracle)
{
  auto g = line(-1.0, 1.0, 60);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const DenseSystem sys = dense_from_form(h);
  const Spectral spec(sys);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.3, 0.6);
  const double times[] = {0.01, 0.1, 1.0};
  const auto tr = trace_inner_products(h, a, b, times);
  ASSERT_EQ(tr.points.size(), 3u);
  const Eigen::VectorXd ia = to_eigen(a.indicator()), ib = to_eigen(b.indicator());
  for (std::size_t k = 0; k < 3; ++k) {
    const Eigen::VectorXd s = spec.heat(times[k], ib);
    const double want = (ia.array() * sys.mu.array() * s.array()).sum();
    // The oracle carries ~1e-16 absolute round-off.
    EXPECT_NEAR(tr.points[k].value, want, 1e-9 * std::abs(want) + 1e-14) << times[k];
  }
}

TEST(Trace, SelfTraceDecreases)
{
  auto g = line(-1.0, 1.0, 64);
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const RegionSet a = RegionSet::interval(*g, -0.3, 0.1);
  const double times[] = {0.001, 0.01, 0.1, 1.0, 10.0};
  const auto tr = trace_inner_products(h, a, a, times);
  EXPECT_LE(tr.points[0].value, a.measure());
  for (std::size_t k = 1; k < tr.points.size(); ++k)
    EXPECT_LE(tr.points[k].value, tr.points[k - 1].value);
}

TEST(Trace, DisjointSetsVanishAtSmallTime)
{
  auto g = line(-1.0, 1.0, 64);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const RegionSet a = RegionSet::interval(*g, -1.0, -0.5);
  const RegionSet b = RegionSet::interval(*g, 0.5, 1.0);
  const double times[] = {1e-4, 1e-3, 1e-2};
  const auto tr = trace_inner_products(h, a, b, times);
  EXPECT_LT(tr.points[0].log_value, tr.points[1].log_value);
  EXPECT_LT(tr.points[1].log_value, tr.points[2].log_value);
  EXPECT_LT(tr.points[0].log_value, -100.0);
}

TEST(Trace, Symmetric)
{
  auto g = std::make_shared<const Grid>(Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, {10, 10}));
  const DiscreteForm h = assemble(make_c_delta_2d(0.5, 0.3), g);
  const RegionSet a = RegionSet::box(*g, {0.0, 0.3}, {0.0, 0.3});
  const RegionSet b = RegionSet::box(*g, {0.6, 1.0}, {0.5, 1.0});
  const double times[] = {0.05, 0.5};
  const auto ab = trace_inner_products(h, a, b, times);
  const auto ba = trace_inner_products(h, b, a, times);
  for (std::size_t k = 0; k < 2; ++k)
    EXPECT_NEAR(ab.points[k].value, ba.points[k].value, 1e-10 * ab.points[k].value);
}

TEST(Cosine, IdentityAtTimeZero)
{
  auto g = line(0.0, 1.0, 20);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const auto phi = wiggle(g->node_count());
  EXPECT_EQ(apply_cosine(h, 0.0, phi, 1e-12), phi);
}

TEST(Cosine, ZeroFormIsIdentity)
{
  auto g = line(0.0, 1.0, 20);
  const DiscreteForm h = assemble(make_constant(0.0), g);
  const auto phi = wiggle(g->node_count());
  const auto out = apply_cosine(h, 5.0, phi, 1e-12);
  for (std::size_t i = 0; i < phi.size(); ++i)
    EXPECT_NEAR(out[i], phi[i], 1e-14);
}

TEST(Cosine, MatchesOracleAndStaysInTheCone)
{
  auto g = line(-1.0, 1.0, 511);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  const DenseSystem sys = dense_from_form(h);
  const Spectral spec(sys);
  const RegionSet a = RegionSet::interval(*g, -0.05, 0.05);
  const auto phi = a.indicator();
  const double dx = g->spacing(0);
  const double t = 0.3;
  const auto out = apply_cosine(h, t, phi, 1e-12);
  EXPECT_LE(rel_gap(sys.mu, out, spec.cosine(t, to_eigen(phi))), 1e-9);
  EXPECT_LE(mass_outside(*g, out, a, t + 10.0 * dx), 1e-6);
  // Lattice dispersion: the tail past the cone widens with t / dx.
  const double near[] = {4.0 * dx};
  EXPECT_LE(finite_propagation_check(h, a, near), 1e-8);
  const double far[] = {64.0 * dx};
  EXPECT_GT(finite_propagation_check(h, a, far), 1e-8);
}

TEST(Cosine, SharedRecurrenceMatchesSingleTimes)
{
  auto g = line(-1.0, 1.0, 100);
  const DiscreteForm h = assemble(make_c_delta(0.5), g);
  const auto phi = wiggle(g->node_count());
  const double times[] = {0.1, 0.4, 1.3};
  const auto many = apply_cosine(h, times, phi, 1e-12);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto one = apply_cosine(h, times[k], phi, 1e-12);
    for (std::size_t i = 0; i < phi.size(); ++i)
      EXPECT_NEAR(many[k][i], one[i], 1e-11);
  }
}

TEST(Subordination, ZeroVectorGivesZero)
{
  auto g = line(-1.0, 1.0, 63);
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const std::vector<double> zero(g->node_count(), 0.0);
  EXPECT_EQ(check_subordination(h, 0.1, zero, 64), 0.0);
}

TEST(Subordination, ZeroFormReproducesPhi)
{
  auto g = line(-1.0, 1.0, 15);
  const DiscreteForm h = assemble(make_constant(0.0), g);
  const auto phi = wiggle(g->node_count());
  const auto out = subordinated_semigroup(h, 0.5, phi, 64);
  for (std::size_t i = 0; i < phi.size(); ++i)
    EXPECT_NEAR(out[i], phi[i], 1e-12);
}

TEST(Subordination, ConvergesWithQuadratureSize)
{
  auto g = line(-1.0, 1.0, 63);
  const DiscreteForm h = assemble(make_c_delta(0.25), g);
  const auto phi = wiggle(g->node_count());
  for (double t : {1e-3, 0.1, 1.0})
    EXPECT_LE(check_subordination(h, t, phi, 512), 1e-6) << t;
  double prev = check_subordination(h, 1.0, phi, 64);
  for (int q : {128, 256, 512}) {
    const double cur = check_subordination(h, 1.0, phi, q);
    // Equality is allowed once both sit at round-off.
    EXPECT_TRUE(cur < prev || (cur < 1e-12 && prev < 1e-12)) << q << ": " << cur << " vs " << prev;
    prev = cur;
  }
}

TEST(Subordination, RejectsTooFewPoints)
{
  auto g = line(-1.0, 1.0, 15);
  const DiscreteForm h = assemble(make_constant(1.0), g);
  EXPECT_THROW(subordinated_semigroup(h, 0.5, wiggle(16), 4), RangeError);
  EXPECT_THROW(subordinated_semigroup(h, 0.0, wiggle(16), 64), RangeError);
}

TEST(GaussLegendre, ExactForPolynomials)
{
  std::vector<double> x, w;
  gauss_legendre(6, -1.0, 3.0, x, w);
  // Degree 11 is integrated exactly by 6 points.
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += w[i] * std::pow(x[i], 11);
  EXPECT_NEAR(sum, (std::pow(3.0, 12) - 1.0) / 12.0, 1e-8);
  double len = 0.0;
  for (double v : w)
    len += v;
  EXPECT_NEAR(len, 4.0, 1e-14);
  EXPECT_THROW(gauss_legendre(0, 0.0, 1.0, x, w), RangeError);
}

TEST(GaussLegendre, GaussianIntegral)
{
  std::vector<double> x, w;
  gauss_legendre(64, 0.0, 12.0, x, w);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += w[i] * std::exp(-x[i] * x[i] / 4.0);
  EXPECT_NEAR(sum, std::sqrt(std::numbers::pi), 1e-13);
}
