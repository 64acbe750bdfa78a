#pragma once

// Internal helpers shared by the evolution and asymptotics sources.

#include <cmath>
#include <span>
#include <vector>

#include "difflab/form.hpp"

namespace difflab::detail {

// Flattened operator data: out = M^{-1}(L + diag p) phi.
struct Operator
{
  std::vector<NodeIndex> eu, ev;
  std::vector<double> w;
  std::vector<double> inv_mu;
  std::vector<double> mu;
  std::vector<double> pot;
  std::vector<double> diag;  // (deg + p) / mu

  explicit Operator(const DiscreteForm &form);

  std::size_t size() const { return mu.size(); }
  double max_diag() const;

  template <class T>
  void apply(std::span<const T> x, std::span<T> out) const
  {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
      out[i] = static_cast<T>(pot[i]) * x[i];
    for (std::size_t e = 0; e < w.size(); ++e) {
      const T f = static_cast<T>(w[e]) * (x[eu[e]] - x[ev[e]]);
      out[eu[e]] += f;
      out[ev[e]] -= f;
    }
    for (std::size_t i = 0; i < n; ++i)
      out[i] *= static_cast<T>(inv_mu[i]);
  }

  // x <- x - H x / lambda, the uniformized one-step kernel.
  template <class T>
  void step(std::vector<T> &x, std::vector<T> &scratch, T inv_lambda) const
  {
    apply<T>(x, scratch);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] -= scratch[i] * inv_lambda;
  }
};

// log of the Poisson(m) probability of k.
inline double log_poisson(double m, std::size_t k)
{
  if (m == 0.0)
    return k == 0 ? 0.0 : -INFINITY;
  const double kk = static_cast<double>(k);
  return -m + kk * std::log(m) - std::lgamma(kk + 1.0);
}

// Chernoff bound on log P(X > k) for X ~ Poisson(m); 0 (probability one) when k < m.
inline double log_poisson_tail(double m, std::size_t k)
{
  if (m == 0.0)
    return -INFINITY;
  const double j = static_cast<double>(k) + 1.0;
  if (j <= m)
    return 0.0;
  return -m + j * (1.0 + std::log(m) - std::log(j));
}

}  // namespace difflab::detail
