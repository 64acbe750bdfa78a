#include "difflab/evolution.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "difflab/error.hpp"
#include "propagator.hpp"

namespace difflab {

namespace detail {

Operator::Operator(const DiscreteForm &form)
{
  const auto edges = form.edges();
  const auto weights = form.weights();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weights[e] == 0.0)
      continue;
    eu.push_back(edges[e].u);
    ev.push_back(edges[e].v);
    w.push_back(weights[e]);
  }
  const Grid &g = form.grid();
  const std::size_t n = g.node_count();
  mu = g.node_measures();
  inv_mu.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_mu[i] = 1.0 / mu[i];
  pot.assign(n, 0.0);
  if (form.has_potential())
    std::copy(form.node_potential().begin(), form.node_potential().end(), pot.begin());
  diag = pot;
  for (std::size_t e = 0; e < w.size(); ++e) {
    diag[eu[e]] += w[e];
    diag[ev[e]] += w[e];
  }
  for (std::size_t i = 0; i < n; ++i)
    diag[i] *= inv_mu[i];
}

double Operator::max_diag() const
{
  return diag.empty() ? 0.0 : *std::max_element(diag.begin(), diag.end());
}

}  // namespace detail

namespace {

using detail::Operator;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Symmetrized dense matrix M^{-1/2}(L + P)M^{-1/2}.
Eigen::MatrixXd symmetric_dense(const Operator &op)
{
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < op.w.size(); ++e) {
    const auto u = op.eu[e], v = op.ev[e];
    s(u, u) += op.w[e];
    s(v, v) += op.w[e];
    s(u, v) -= op.w[e];
    s(v, u) -= op.w[e];
  }
  for (Eigen::Index i = 0; i < n; ++i)
    s(i, i) += op.pot[i];
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      s(i, j) /= std::sqrt(op.mu[i] * op.mu[j]);
  return s;
}

std::vector<double> dense_semigroup(const Operator &op, double t, std::span<const double> phi)
{
  const Eigen::MatrixXd s = symmetric_dense(op);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success)
    throw SolverError("dense eigendecomposition failed", std::numeric_limits<double>::infinity());
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] = std::sqrt(op.mu[i]) * phi[i];
  Eigen::VectorXd c = eig.eigenvectors().transpose() * x;
  for (Eigen::Index i = 0; i < n; ++i)
    c[i] *= std::exp(-t * std::max(0.0, eig.eigenvalues()[i]));
  const Eigen::VectorXd y = eig.eigenvectors() * c;
  std::vector<double> out(op.size());
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = y[i] / std::sqrt(op.mu[i]);
  return out;
}

double mu_norm(const Operator &op, std::span<const double> v)
{
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += op.mu[i] * v[i] * v[i];
  return std::sqrt(s);
}

std::vector<double> uniformization_semigroup(const Operator &op, double t, std::span<const double> phi, double tol,
                                             std::size_t max_iterations)
{
  const double lambda = op.max_diag();
  std::vector<double> x(phi.begin(), phi.end());
  if (lambda == 0.0)
    return x;
  const double m = t * lambda;
  const double scale = std::max(mu_norm(op, phi), std::numeric_limits<double>::min());
  const double log_target = std::log(tol / scale);
  std::vector<double> out(x.size(), 0.0), scratch(x.size());
  const double inv = 1.0 / lambda;
  for (std::size_t k = 0;; ++k) {
    const double wk = std::exp(detail::log_poisson(m, k));
    if (wk > 0.0)
      for (std::size_t i = 0; i < x.size(); ++i)
        out[i] += wk * x[i];
    if (detail::log_poisson_tail(m, k) <= log_target)
      break;
    if (k >= max_iterations)
      throw SolverError("uniformization exceeded its iteration cap", std::exp(detail::log_poisson_tail(m, k)) * scale);
    op.step(x, scratch, inv);
  }
  return out;
}

// exp(-tau T) e1 for the symmetric tridiagonal T(alpha, beta).
Eigen::VectorXd tridiagonal_exp(const std::vector<double> &alpha, const std::vector<double> &beta, double tau)
{
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd sub = m > 1 ? Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1) : Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(d, sub, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd &q = eig.eigenvectors();
  Eigen::VectorXd c = q.row(0).transpose();
  for (Eigen::Index i = 0; i < m; ++i)
    c[i] *= std::exp(-tau * eig.eigenvalues()[i]);
  return q * c;
}

// One Lanczos approximation of exp(-tau H) v; returns false when it did not converge.
// A priori Lanczos error for e^{-tau H} after m steps when the spectrum lies in [0, 4 rho]
// (Hochbruck and Lubich), relative to the norm of the start vector.
double lanczos_apriori(double rho, int m)
{
  if (rho <= 0.0)
    return 0.0;
  if (m >= 2.0 * rho)
    return 10.0 / rho * std::exp(-rho + m * (1.0 + std::log(rho / m)));
  if (static_cast<double>(m) * m >= 4.0 * rho)
    return 10.0 * std::exp(-static_cast<double>(m) * m / (5.0 * rho));
  return kInf;
}

bool lanczos_step(const Operator &op, double tau, double spectral_bound, std::vector<double> &v, double tol)
{
  constexpr int kMaxDim = 48;
  const std::size_t n = v.size();
  const double beta0 = mu_norm(op, v);
  if (beta0 == 0.0)
    return true;
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  basis.emplace_back(n);
  for (std::size_t i = 0; i < n; ++i)
    basis[0][i] = v[i] / beta0;
  std::vector<double> w(n);
  for (int j = 0; j < kMaxDim; ++j) {
    op.apply<double>(basis[j], w);
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      a += op.mu[i] * w[i] * basis[j][i];
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i)
      w[i] -= a * basis[j][i] + (j > 0 ? beta[j - 1] * basis[j - 1][i] : 0.0);
    // One pass of reorthogonalization against the stored basis.
    for (const auto &q : basis) {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        c += op.mu[i] * w[i] * q[i];
      for (std::size_t i = 0; i < n; ++i)
        w[i] -= c * q[i];
    }
    const double b = mu_norm(op, w);
    const Eigen::VectorXd y = tridiagonal_exp(alpha, beta, tau);
    const double err = beta0 * b * std::abs(y[j]);
    const bool converged = err <= tol && beta0 * lanczos_apriori(0.25 * tau * spectral_bound, j + 1) <= tol;
    if (converged || b <= 1e-14 * std::abs(a)) {
      std::fill(v.begin(), v.end(), 0.0);
      for (int k = 0; k <= j; ++k)
        for (std::size_t i = 0; i < n; ++i)
          v[i] += beta0 * y[k] * basis[k][i];
      return true;
    }
    beta.push_back(b);
    basis.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i)
      basis[j + 1][i] = w[i] / b;
  }
  return false;
}

std::vector<double> krylov_semigroup(const Operator &op, double t, std::span<const double> phi, double tol,
                                     std::size_t max_iterations)
{
  std::vector<double> v(phi.begin(), phi.end());
  const double lambda = std::max(op.max_diag(), 1e-300);
  // Every eigenvalue of H is at most twice its largest diagonal entry.
  const double bound = 2.0 * lambda;
  double done = 0.0;
  double tau = std::min(t, 40.0 / bound);
  std::size_t steps = 0;
  while (done < t) {
    tau = std::min(tau, t - done);
    const double step_tol = std::max(tol * tau / t, 4e-16 * mu_norm(op, v));
    std::vector<double> trial = v;
    if (lanczos_step(op, tau, bound, trial, step_tol)) {
      v.swap(trial);
      done += tau;
      tau *= 1.5;
    } else {
      tau *= 0.5;
    }
    if (++steps > max_iterations / 48 || tau * lambda < 1e-3)
      throw SolverError("Krylov time stepping stalled", tau);
  }
  return v;
}

void check_vector(const DiscreteForm &form, std::span<const double> phi, const char *who)
{
  if (phi.size() != form.node_count())
    throw InvalidArgument(std::string(who) + ": vector length does not match node count");
}

// Running log-sum-exp accumulator.
struct LogSum
{
  double max = kNegInf;
  long double sum = 0.0L;

  void add(double x)
  {
    if (x == kNegInf)
      return;
    if (x > max) {
      sum = sum * std::exp(static_cast<long double>(max - x)) + 1.0L;
      max = x;
    } else {
      sum += std::exp(static_cast<long double>(x - max));
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + static_cast<double>(std::log(sum)); }
};

template <class T>
SemigroupTrace uniformization_trace(const Operator &op, const RegionSet &a, const RegionSet &b,
                                    std::span<const double> times, std::size_t max_iterations)
{
  constexpr double kRelTol = 1e-13;
  const double lambda = op.max_diag();
  const double cap = std::log(std::min(a.measure(), b.measure()));
  const double log_floor = std::log(static_cast<double>(std::numeric_limits<T>::min())) - 50.0;
  const std::size_t nt = times.size();
  std::vector<LogSum> acc(nt);
  std::vector<T> v(op.size(), T(0)), scratch(op.size());
  for (NodeIndex n : b.nodes())
    v[n] = T(1);
  const T inv = lambda > 0.0 ? T(1) / static_cast<T>(lambda) : T(0);
  std::size_t k = 0;
  for (;; ++k) {
    T ck = 0;
    for (NodeIndex n : a.nodes())
      ck += static_cast<T>(op.mu[n]) * v[n];
    const double log_ck = ck > T(0) ? static_cast<double>(std::log(static_cast<long double>(ck))) : kNegInf;
    bool done = true;
    for (std::size_t i = 0; i < nt; ++i) {
      const double m = times[i] * lambda;
      if (log_ck != kNegInf)
        acc[i].add(detail::log_poisson(m, k) + log_ck);
      const double tail = detail::log_poisson_tail(m, k) + cap;
      if (tail > std::max(acc[i].value() + std::log(kRelTol), log_floor))
        done = false;
    }
    if (done || lambda == 0.0)
      break;
    if (k >= max_iterations)
      throw SolverError("uniformization trace exceeded its iteration cap", static_cast<double>(k));
    op.step(v, scratch, inv);
  }
  SemigroupTrace tr;
  tr.solver = SolverKind::Uniformization;
  const double eps = static_cast<double>(std::numeric_limits<T>::epsilon());
  for (std::size_t i = 0; i < nt; ++i) {
    TracePoint p;
    p.t = times[i];
    p.log_value = acc[i].value();
    p.value = std::exp(p.log_value);
    const double m = times[i] * lambda;
    p.error_bound = p.value * 8.0 * eps * static_cast<double>(k + 1) +
                    std::exp(detail::log_poisson_tail(m, k) + cap);
    tr.points.push_back(p);
  }
  return tr;
}

}  // namespace

const char *to_string(SolverKind s)
{
  switch (s) {
  case SolverKind::Auto:
    return "auto";
  case SolverKind::DenseSpectral:
    return "dense-spectral";
  case SolverKind::Uniformization:
    return "uniformization";
  case SolverKind::Krylov:
    return "krylov";
  }
  return "unknown";
}

std::vector<double> SemigroupTrace::times() const
{
  std::vector<double> out;
  for (const auto &p : points)
    out.push_back(p.t);
  return out;
}

std::vector<double> SemigroupTrace::values() const
{
  std::vector<double> out;
  for (const auto &p : points)
    out.push_back(p.value);
  return out;
}

double inner_mu(const Grid &grid, std::span<const double> u, std::span<const double> v)
{
  const auto &mu = grid.node_measures();
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += mu[i] * u[i] * v[i];
  return s;
}

double norm_mu(const Grid &grid, std::span<const double> u)
{
  return std::sqrt(inner_mu(grid, u, u));
}

std::vector<double> apply_semigroup(const DiscreteForm &form, double t, std::span<const double> phi, double tol,
                                    const SolverOptions &opts)
{
  check_vector(form, phi, "apply_semigroup");
  if (!(t > 0.0) || !std::isfinite(t))
    throw RangeError("apply_semigroup: t must be positive");
  if (!(tol > 0.0))
    throw RangeError("apply_semigroup: tol must be positive");
  if (form.is_zero())
    return std::vector<double>(phi.begin(), phi.end());
  const Operator op(form);
  const std::size_t n = op.size();
  SolverKind kind = opts.kind;
  if (kind == SolverKind::Auto) {
    const double m = t * op.max_diag();
    if (n <= 256)
      kind = SolverKind::DenseSpectral;
    else if (m <= opts.uniformization_limit)
      kind = SolverKind::Uniformization;
    else
      kind = n <= opts.dense_limit ? SolverKind::DenseSpectral : SolverKind::Krylov;
  }
  switch (kind) {
  case SolverKind::DenseSpectral:
    return dense_semigroup(op, t, phi);
  case SolverKind::Krylov:
    return krylov_semigroup(op, t, phi, tol, opts.max_iterations);
  default:
    return uniformization_semigroup(op, t, phi, tol, opts.max_iterations);
  }
}

std::vector<long double> apply_semigroup_positive(const DiscreteForm &form, double t,
                                                  std::span<const long double> phi, double tol,
                                                  const RegionSet *target)
{
  if (phi.size() != form.node_count())
    throw InvalidArgument("apply_semigroup_positive: vector length does not match node count");
  if (!(t > 0.0))
    throw RangeError("apply_semigroup_positive: t must be positive");
  long double sup = 0.0L;
  for (long double x : phi) {
    if (x < 0.0L)
      throw InvalidArgument("apply_semigroup_positive: input must be nonnegative");
    sup = std::max(sup, x);
  }
  const Operator op(form);
  const double lambda = op.max_diag();
  std::vector<long double> x(phi.begin(), phi.end());
  if (lambda == 0.0 || sup == 0.0L)
    return x;
  const double m = t * lambda;
  const long double inv = 1.0L / static_cast<long double>(lambda);
  std::vector<long double> out(x.size(), 0.0L), scratch(x.size());
  // Stop once the Poisson tail times sup(phi) is below tol times the smallest entry that
  // the partial sum has made positive.
  for (std::size_t k = 0;; ++k) {
    const long double wk = std::exp(static_cast<long double>(detail::log_poisson(m, k)));
    if (wk > 0.0L)
      for (std::size_t i = 0; i < x.size(); ++i)
        out[i] += wk * x[i];
    if ((k & 31) == 31) {
      const double tail = detail::log_poisson_tail(m, k);
      if (tail < 0.0) {
        long double smallest = std::numeric_limits<long double>::max();
        bool unreached = false;
        auto visit = [&](std::size_t i) {
          if (out[i] > 0.0L)
            smallest = std::min(smallest, out[i]);
          else if (target)
            unreached = true;
        };
        if (target)
          for (NodeIndex i : target->nodes())
            visit(i);
        else
          for (std::size_t i = 0; i < out.size(); ++i)
            visit(i);
        if (unreached)
          smallest = 0.0L;
        if (smallest > 0.0L && static_cast<long double>(tail) + std::log(sup) <= std::log(tol * smallest))
          break;
        if (tail + static_cast<double>(std::log(sup)) < -11000.0)
          break;
      }
    }
    if (k >= 20'000'000)
      throw SolverError("uniformization exceeded its iteration cap", static_cast<double>(k));
    op.step(x, scratch, inv);
  }
  return out;
}

SemigroupTrace trace_inner_products(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                    std::span<const double> times, const SolverOptions &opts)
{
  if (a.empty() || b.empty())
    throw InvalidArgument("trace_inner_products: empty region");
  if (a.grid_node_count() != form.node_count() || b.grid_node_count() != form.node_count())
    throw InvalidArgument("trace_inner_products: region belongs to a different grid");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
      throw RangeError("trace_inner_products: times must be positive and ascending");
  const Operator op(form);
  const double m_max = times.empty() ? 0.0 : times.back() * op.max_diag();
  SolverKind kind = opts.kind;
  if (kind == SolverKind::Auto)
    kind = m_max <= opts.uniformization_limit ? SolverKind::Uniformization
           : op.size() <= opts.dense_limit    ? SolverKind::DenseSpectral
                                              : SolverKind::Krylov;
  if (kind == SolverKind::Uniformization) {
    auto tr = uniformization_trace<double>(op, a, b, times, opts.max_iterations);
    const bool tiny = std::any_of(tr.points.begin(), tr.points.end(),
                                  [](const TracePoint &p) { return p.log_value < std::log(1e-200); });
    if (tiny)
      tr = uniformization_trace<long double>(op, a, b, times, opts.max_iterations);
    return tr;
  }
  SemigroupTrace tr;
  tr.solver = kind;
  const auto ind_a = a.indicator();
  const auto ind_b = b.indicator();
  const double tol = 1e-12 * std::sqrt(b.measure());
  SolverOptions fixed = opts;
  fixed.kind = kind;
  for (double t : times) {
    const auto s = apply_semigroup(form, t, ind_b, tol, fixed);
    TracePoint p;
    p.t = t;
    p.value = std::max(0.0, inner_mu(form.grid(), ind_a, s));
    p.log_value = p.value > 0.0 ? std::log(p.value) : kNegInf;
    p.error_bound = tol * std::sqrt(a.measure()) + 1e-14 * std::sqrt(a.measure() * b.measure());
    tr.points.push_back(p);
  }
  return tr;
}

namespace {

// Chebyshev coefficients of x -> cos(omega sqrt((x + 1) / 2)) on [-1, 1], truncated once the
// remaining coefficients sum below tol.
// Chebyshev coefficients of x -> f(|cos(theta / 2)|), x = cos(theta), where f oscillates at
// frequency at most omega. Trailing coefficients are dropped once their sum is below tol.
template <typename F>
std::vector<double> chebyshev_coefficients(double omega, double tol, F &&f)
{
  const int nodes = std::max(64, 2 * static_cast<int>(std::ceil(omega / 2.0 + 12.0 * std::cbrt(omega) + 48.0)));
  std::vector<double> samples(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / nodes;
    samples[j] = f(std::abs(std::cos(theta / 2.0)));
  }
  std::vector<double> c(nodes);
  for (int k = 0; k < nodes; ++k) {
    double s = 0.0;
    for (int j = 0; j < nodes; ++j)
      s += samples[j] * std::cos(std::numbers::pi * k * (j + 0.5) / nodes);
    c[k] = 2.0 * s / nodes;
  }
  c[0] *= 0.5;
  double tail = 0.0;
  int keep = nodes;
  for (int k = nodes - 1; k >= 0; --k) {
    tail += std::abs(c[k]);
    if (tail > 1e-3 * tol) {
      keep = k + 1;
      break;
    }
  }
  c.resize(std::max(keep, 1));
  return c;
}

std::vector<double> cosine_coefficients(double omega, double tol)
{
  return chebyshev_coefficients(omega, tol, [omega](double y) { return std::cos(omega * y); });
}

// Sums coeffs[r][k] T_k(X) phi for each row r, X = (2 / bound) H - I.
std::vector<std::vector<double>> chebyshev_apply(const Operator &op, double bound,
                                                 const std::vector<std::vector<double>> &coeffs,
                                                 std::span<const double> phi)
{
  const std::size_t n = op.size();
  std::size_t degree = 0;
  for (const auto &c : coeffs)
    degree = std::max(degree, c.size());
  std::vector<std::vector<double>> out(coeffs.size(), std::vector<double>(n, 0.0));
  std::vector<double> prev(phi.begin(), phi.end()), cur(n), next(n), hx(n);
  auto accumulate = [&](std::size_t k, const std::vector<double> &tk) {
    for (std::size_t r = 0; r < coeffs.size(); ++r)
      if (k < coeffs[r].size() && coeffs[r][k] != 0.0)
        for (std::size_t i = 0; i < n; ++i)
          out[r][i] += coeffs[r][k] * tk[i];
  };
  accumulate(0, prev);
  if (degree <= 1)
    return out;
  const double s = 2.0 / bound;
  op.apply<double>(prev, hx);
  for (std::size_t i = 0; i < n; ++i)
    cur[i] = s * hx[i] - prev[i];
  accumulate(1, cur);
  for (std::size_t k = 2; k < degree; ++k) {
    op.apply<double>(cur, hx);
    for (std::size_t i = 0; i < n; ++i)
      next[i] = 2.0 * (s * hx[i] - cur[i]) - prev[i];
    accumulate(k, next);
    prev.swap(cur);
    cur.swap(next);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> apply_cosine(const DiscreteForm &form, std::span<const double> times,
                                              std::span<const double> phi, double tol)
{
  check_vector(form, phi, "apply_cosine");
  if (!(tol > 0.0))
    throw RangeError("apply_cosine: tol must be positive");
  const double bound = 1.05 * form.gershgorin_bound();
  if (!std::isfinite(bound))
    throw SolverError("apply_cosine: spectral bound is not finite", bound);
  std::vector<std::vector<double>> coeffs;
  const double scale = std::max(norm_mu(form.grid(), phi), std::numeric_limits<double>::min());
  for (double t : times) {
    const double omega = std::abs(t) * std::sqrt(bound);
    if (bound == 0.0 || omega == 0.0)
      coeffs.push_back({1.0});
    else
      coeffs.push_back(cosine_coefficients(omega, tol / scale));
  }
  if (bound == 0.0)
    return std::vector<std::vector<double>>(times.size(), std::vector<double>(phi.begin(), phi.end()));
  return chebyshev_apply(Operator(form), bound, coeffs, phi);
}

std::vector<double> apply_cosine(const DiscreteForm &form, double t, std::span<const double> phi, double tol)
{
  if (t == 0.0) {
    check_vector(form, phi, "apply_cosine");
    return std::vector<double>(phi.begin(), phi.end());
  }
  const double ts[1] = {t};
  return std::move(apply_cosine(form, ts, phi, tol)[0]);
}

void gauss_legendre(int n, double a, double b, std::vector<double> &nodes, std::vector<double> &weights)
{
  if (n < 1)
    throw RangeError("gauss_legendre: need at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  if (n == 1) {
    nodes[0] = mid;
    weights[0] = 2.0 * half;
    return;
  }
  // P_n(x) and its derivative by the three-term recurrence.
  auto legendre = [n](double x, double &dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double step = legendre(x, dp) / dp;
      x -= step;
      if (std::abs(step) < 1e-16)
        break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = weights[n - 1 - i] = half * w;
  }
}

std::vector<double> subordinated_semigroup(const DiscreteForm &form, double t, std::span<const double> phi,
                                           int quad_points)
{
  check_vector(form, phi, "subordinated_semigroup");
  if (quad_points < 8)
    throw RangeError("subordination quadrature needs at least 8 points");
  if (!(t > 0.0))
    throw RangeError("subordination: t must be positive");
  const double bound = 1.05 * form.gershgorin_bound();
  std::vector<double> s, w;
  gauss_legendre(quad_points, 0.0, 12.0 * std::sqrt(t), s, w);
  const double norm = 1.0 / std::sqrt(std::numbers::pi * t);
  std::vector<double> g(quad_points);
  for (int j = 0; j < quad_points; ++j)
    g[j] = w[j] * norm * std::exp(-s[j] * s[j] / (4.0 * t));
  std::vector<std::vector<double>> combined(1);
  if (bound == 0.0) {
    combined[0] = {std::accumulate(g.begin(), g.end(), 0.0)};
  } else {
    const double root = std::sqrt(bound);
    combined[0] = chebyshev_coefficients(s.back() * root, 1e-16, [&](double y) {
      double sum = 0.0;
      for (int j = 0; j < quad_points; ++j)
        sum += g[j] * std::cos(s[j] * root * y);
      return sum;
    });
  }
  if (bound == 0.0) {
    std::vector<double> out(phi.begin(), phi.end());
    for (double &x : out)
      x *= combined[0][0];
    return out;
  }
  return std::move(chebyshev_apply(Operator(form), bound, combined, phi)[0]);
}

double check_subordination(const DiscreteForm &form, double t, std::span<const double> phi, int quad_points)
{
  const auto quad = subordinated_semigroup(form, t, phi, quad_points);
  const double scale = norm_mu(form.grid(), phi);
  if (scale == 0.0)
    return 0.0;
  const auto exact = apply_semigroup(form, t, phi, 1e-14 * scale);
  std::vector<double> diff(quad.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = quad[i] - exact[i];
  const double ref = norm_mu(form.grid(), exact);
  return norm_mu(form.grid(), diff) / std::max(ref, std::numeric_limits<double>::min());
}

}  // namespace difflab
