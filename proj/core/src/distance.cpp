#include "difflab/distance.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "difflab/error.hpp"

namespace difflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Adjacency
{
  std::vector<std::size_t> start;
  std::vector<NodeIndex> to;
  std::vector<double> length;
};

Adjacency build_adjacency(const DiscreteForm &form)
{
  const auto edges = form.edges();
  const std::size_t n = form.node_count();
  Adjacency adj;
  adj.start.assign(n + 1, 0);
  std::vector<double> len(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    len[e] = edge_length(form, e);
    if (std::isfinite(len[e])) {
      ++adj.start[edges[e].u + 1];
      ++adj.start[edges[e].v + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    adj.start[i + 1] += adj.start[i];
  adj.to.resize(adj.start[n]);
  adj.length.resize(adj.start[n]);
  std::vector<std::size_t> fill(adj.start.begin(), adj.start.end() - 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!std::isfinite(len[e]))
      continue;
    adj.to[fill[edges[e].u]] = edges[e].v;
    adj.length[fill[edges[e].u]++] = len[e];
    adj.to[fill[edges[e].v]] = edges[e].u;
    adj.length[fill[edges[e].v]++] = len[e];
  }
  return adj;
}

}  // namespace

const char *to_string(DistanceMethod m)
{
  switch (m) {
  case DistanceMethod::Eikonal:
    return "eikonal";
  case DistanceMethod::Variational:
    return "variational";
  case DistanceMethod::DecayFit:
    return "decay-fit";
  }
  return "unknown";
}

double edge_length(const DiscreteForm &form, std::size_t e)
{
  const Edge &ed = form.edges()[e];
  if ((ed.kind == EdgeKind::AxisX || ed.kind == EdgeKind::AxisY) && form.weights()[e] == 0.0)
    return kInf;
  return form.metric_length(e);
}

std::vector<double> eikonal_distance(const DiscreteForm &form, const RegionSet &source,
                                     std::vector<std::int64_t> &predecessor)
{
  if (source.empty())
    throw InvalidArgument("eikonal_distance: empty source region");
  if (source.grid_node_count() != form.node_count())
    throw InvalidArgument("eikonal_distance: region belongs to a different grid");
  const Adjacency adj = build_adjacency(form);
  const std::size_t n = form.node_count();
  std::vector<double> dist(n, kInf);
  predecessor.assign(n, -1);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (NodeIndex s : source.nodes()) {
    dist[s] = 0.0;
    queue.push({0.0, s});
  }
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u])
      continue;
    for (std::size_t k = adj.start[u]; k < adj.start[u + 1]; ++k) {
      const NodeIndex v = adj.to[k];
      const double nd = d + adj.length[k];
      if (nd < dist[v]) {
        dist[v] = nd;
        predecessor[v] = u;
        queue.push({nd, v});
      }
    }
  }
  return dist;
}

std::vector<double> eikonal_distance(const DiscreteForm &form, const RegionSet &source)
{
  std::vector<std::int64_t> pred;
  return eikonal_distance(form, source, pred);
}

DistanceReport set_distance(const DiscreteForm &form, const RegionSet &a, const RegionSet &b)
{
  if (a.empty() || b.empty())
    throw InvalidArgument("set_distance: empty region");
  std::vector<std::int64_t> pred;
  const auto dist = eikonal_distance(form, a, pred);
  DistanceReport r;
  r.method = DistanceMethod::Eikonal;
  r.value = kInf;
  std::int64_t best = -1;
  for (NodeIndex n : b.nodes())
    if (dist[n] < r.value) {
      r.value = dist[n];
      best = n;
    }
  if (best >= 0) {
    for (std::int64_t v = best; v >= 0; v = pred[static_cast<std::size_t>(v)])
      r.path.push_back(static_cast<NodeIndex>(v));
    std::reverse(r.path.begin(), r.path.end());
  }
  return r;
}

DistanceReport verify_certificate(const DiscreteForm &form, std::span<const double> psi, const RegionSet &a,
                                  const RegionSet &b, double tol)
{
  if (!(tol >= 0.0))
    throw RangeError("verify_certificate: tolerance must be nonnegative");
  if (a.empty() || b.empty())
    throw InvalidArgument("verify_certificate: empty region");
  const auto gamma = carre_du_champ(form, psi);
  DistanceReport r;
  r.method = DistanceMethod::Variational;
  r.max_gamma = gamma.empty() ? 0.0 : *std::max_element(gamma.begin(), gamma.end());
  r.valid = r.max_gamma <= 1.0 + tol;
  if (!r.valid) {
    r.value = 0.0;
    return r;
  }
  double inf_a = kInf, sup_b = -kInf;
  for (NodeIndex n : a.nodes())
    inf_a = std::min(inf_a, psi[n]);
  for (NodeIndex n : b.nodes())
    sup_b = std::max(sup_b, psi[n]);
  r.value = std::max(0.0, inf_a - sup_b);
  r.certificate = std::vector<double>(psi.begin(), psi.end());
  return r;
}

double default_certificate_tolerance(const DiscreteForm &form)
{
  // Slowness s = |C|^{-1/2} on consecutive axis edges; the largest jump per unit length
  // bounds its Lipschitz constant on the grid.
  const Grid &g = form.grid();
  const auto tensors = form.tensors();
  const auto edges = form.edges();
  auto slowness = [&](std::size_t e) {
    const double c = tensors[e].norm();
    return c > 0.0 ? 1.0 / std::sqrt(c) : kInf;
  };
  double lip = 0.0;
  if (g.dim() == 1) {
    for (std::size_t e = 1; e < edges.size(); ++e) {
      const double d = std::abs(slowness(e) - slowness(e - 1));
      if (std::isfinite(d))
        lip = std::max(lip, d / g.spacing(0));
    }
  } else {
    const int nx = g.cells(0);
    for (std::size_t e = 1; e < edges.size(); ++e) {
      if (edges[e].kind != edges[e - 1].kind || edges[e].kind != EdgeKind::AxisX)
        continue;
      if (g.ij(edges[e].u)[1] != g.ij(edges[e - 1].u)[1] || nx < 2)
        continue;
      const double d = std::abs(slowness(e) - slowness(e - 1));
      if (std::isfinite(d))
        lip = std::max(lip, d / g.spacing(0));
    }
  }
  return std::max(3.0 * g.max_spacing() * lip, 1e-12);
}

std::vector<double> certificate_from_eikonal(const DiscreteForm &form, const RegionSet &b, double cap)
{
  if (!(cap > 0.0))
    throw RangeError("certificate_from_eikonal: cap must be positive");
  auto psi = eikonal_distance(form, b);
  for (double &v : psi)
    v = std::min(v, cap);
  const auto gamma = carre_du_champ(form, psi);
  const double g = *std::max_element(gamma.begin(), gamma.end());
  if (g > 1.0) {
    const double s = 1.0 / std::sqrt(g);
    for (double &v : psi)
      v *= s;
  }
  return psi;
}

double effective_resistance(const DiscreteForm &form, NodeIndex a, NodeIndex b)
{
  const std::size_t n = form.node_count();
  if (a >= n || b >= n)
    throw InvalidArgument("effective_resistance: node index out of range");
  if (a == b)
    throw InvalidArgument("effective_resistance: nodes must differ");
  const auto edges = form.edges();
  const auto w = form.weights();
  if (form.grid().dim() == 1) {
    const NodeIndex lo = std::min(a, b), hi = std::max(a, b);
    double r = 0.0;
    for (NodeIndex e = lo; e < hi; ++e) {
      if (w[e] == 0.0)
        return kInf;
      r += 1.0 / w[e];
    }
    return r;
  }

  // Component of a in the positive-weight graph.
  std::vector<std::vector<std::pair<NodeIndex, double>>> nbr(n);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (w[e] > 0.0) {
      nbr[edges[e].u].push_back({edges[e].v, w[e]});
      nbr[edges[e].v].push_back({edges[e].u, w[e]});
    }
  std::vector<std::int64_t> local(n, -1);
  std::vector<NodeIndex> stack{a}, members;
  local[a] = 0;
  while (!stack.empty()) {
    const NodeIndex u = stack.back();
    stack.pop_back();
    members.push_back(u);
    for (auto [v, wt] : nbr[u])
      if (local[v] < 0) {
        local[v] = 0;
        stack.push_back(v);
      }
  }
  if (local[b] < 0)
    return kInf;

  // Ground b and solve the reduced Laplacian system L phi = e_a.
  std::int64_t m = 0;
  for (NodeIndex u : members)
    local[u] = (u == b) ? -2 : m++;
  std::vector<Eigen::Triplet<double>> trip;
  for (NodeIndex u : members) {
    if (u == b)
      continue;
    double diag = 0.0;
    for (auto [v, wt] : nbr[u]) {
      diag += wt;
      if (v != b)
        trip.emplace_back(local[u], local[v], -wt);
    }
    trip.emplace_back(local[u], local[u], diag);
  }
  Eigen::SparseMatrix<double> lap(m, m);
  lap.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
  if (solver.info() != Eigen::Success)
    throw SolverError("effective_resistance: factorization failed", kInf);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[local[a]] = 1.0;
  const Eigen::VectorXd phi = solver.solve(rhs);
  const double residual = (lap * phi - rhs).norm();
  if (solver.info() != Eigen::Success || !(residual <= 1e-8 * std::max(1.0, phi.norm())))
    throw SolverError("effective_resistance: solve failed", residual);
  return phi[local[a]];
}

std::vector<DistanceReport> exhaustion_distance(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                                std::span<const RegionSet> exhaustion)
{
  if (b.empty())
    throw InvalidArgument("exhaustion_distance: empty target region");
  const auto dist = eikonal_distance(form, b);
  std::vector<DistanceReport> out;
  out.reserve(exhaustion.size());
  for (const RegionSet &x : exhaustion) {
    DistanceReport r;
    r.method = DistanceMethod::Eikonal;
    r.value = kInf;
    for (NodeIndex nidx : a.nodes())
      if (x.contains(nidx))
        r.value = std::min(r.value, dist[nidx]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace difflab
