#include "difflab/form.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "difflab/error.hpp"

namespace difflab {

std::shared_ptr<const std::vector<Edge>> stencil_edges(const Grid &grid)
{
  auto edges = std::make_shared<std::vector<Edge>>();
  const int nx = grid.cells(0);
  if (grid.dim() == 1) {
    edges->reserve(nx);
    for (int i = 0; i < nx; ++i)
      edges->push_back({grid.index(i), grid.index(i + 1), EdgeKind::AxisX});
    return edges;
  }
  const int ny = grid.cells(1);
  edges->reserve(static_cast<std::size_t>(nx) * (ny + 1) + static_cast<std::size_t>(ny) * (nx + 1) +
                 2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i)
      edges->push_back({grid.index(i, j), grid.index(i + 1, j), EdgeKind::AxisX});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i)
      edges->push_back({grid.index(i, j), grid.index(i, j + 1), EdgeKind::AxisY});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      edges->push_back({grid.index(i, j), grid.index(i + 1, j + 1), EdgeKind::Diagonal});
      edges->push_back({grid.index(i + 1, j), grid.index(i, j + 1), EdgeKind::AntiDiagonal});
    }
  return edges;
}

DiscreteForm::DiscreteForm(std::shared_ptr<const Grid> grid, std::shared_ptr<const std::vector<Edge>> edges,
                           std::vector<double> weights, std::vector<SymMat2> tensors,
                           std::vector<double> node_potential, double lambda_bound)
  : grid_(std::move(grid)), edges_(std::move(edges)), weights_(std::move(weights)),
    tensors_(std::move(tensors)), potential_(std::move(node_potential)), lambda_(lambda_bound)
{
  if (!grid_ || !edges_)
    throw InvalidArgument("discrete form needs a grid and an edge list");
  if (weights_.size() != edges_->size() || tensors_.size() != edges_->size())
    throw InvalidArgument("discrete form: weight/tensor count does not match edge count");
  if (!potential_.empty() && potential_.size() != grid_->node_count())
    throw InvalidArgument("discrete form: potential length does not match node count");
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidArgument("discrete form: edge weights must be finite and nonnegative");
  for (double p : potential_)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InvalidArgument("discrete form: node potential must be finite and nonnegative");
}

bool DiscreteForm::is_zero() const
{
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 0.0; }) &&
         std::all_of(potential_.begin(), potential_.end(), [](double p) { return p == 0.0; });
}

double DiscreteForm::energy_without_potential(std::span<const double> phi) const
{
  if (phi.size() != node_count())
    throw InvalidArgument("energy: vector length does not match node count");
  const auto &edges = *edges_;
  double s = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double d = phi[edges[e].u] - phi[edges[e].v];
    s += weights_[e] * d * d;
  }
  return s;
}

double DiscreteForm::energy(std::span<const double> phi) const
{
  double s = energy_without_potential(phi);
  for (std::size_t n = 0; n < potential_.size(); ++n)
    s += potential_[n] * phi[n] * phi[n];
  return s;
}

void DiscreteForm::apply_matrix(std::span<const double> phi, std::span<double> out) const
{
  if (phi.size() != node_count() || out.size() != node_count())
    throw InvalidArgument("apply_matrix: vector length does not match node count");
  std::fill(out.begin(), out.end(), 0.0);
  const auto &edges = *edges_;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = weights_[e];
    if (w == 0.0)
      continue;
    const double flux = w * (phi[edges[e].u] - phi[edges[e].v]);
    out[edges[e].u] += flux;
    out[edges[e].v] -= flux;
  }
  for (std::size_t n = 0; n < potential_.size(); ++n)
    out[n] += potential_[n] * phi[n];
}

std::array<double, 2> DiscreteForm::edge_vector(std::size_t e) const
{
  const Edge &ed = (*edges_)[e];
  const Point a = grid_->position(ed.u), b = grid_->position(ed.v);
  return {b[0] - a[0], b[1] - a[1]};
}

double DiscreteForm::metric_length(std::size_t e) const
{
  const auto h = edge_vector(e);
  if (grid_->dim() == 1) {
    const double c = tensors_[e].a11;
    return c > 0.0 ? std::abs(h[0]) / std::sqrt(c) : std::numeric_limits<double>::infinity();
  }
  const double q = tensors_[e].inverse_quad(h[0], h[1]);
  return std::isfinite(q) ? std::sqrt(std::max(q, 0.0)) : q;
}

double DiscreteForm::gershgorin_bound() const
{
  std::vector<double> row(node_count(), 0.0);
  const auto &edges = *edges_;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    row[edges[e].u] += 2.0 * weights_[e];
    row[edges[e].v] += 2.0 * weights_[e];
  }
  double rho = 0.0;
  for (std::size_t n = 0; n < row.size(); ++n) {
    const double p = potential_.empty() ? 0.0 : potential_[n];
    rho = std::max(rho, (row[n] + p) / grid_->node_measure(static_cast<NodeIndex>(n)));
  }
  return rho;
}

DiscreteForm DiscreteForm::with_weights(std::vector<double> weights, std::vector<SymMat2> tensors,
                                        std::vector<double> potential, double lambda_bound) const
{
  return DiscreteForm(grid_, edges_, std::move(weights), std::move(tensors), std::move(potential),
                      lambda_bound);
}

CutoffFunction CutoffFunction::from_values(const Grid &grid, std::vector<double> values)
{
  if (values.size() != grid.node_count())
    throw InvalidArgument("cut-off length does not match node count");
  std::vector<NodeIndex> support, plateau;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!(values[n] >= 0.0 && values[n] <= 1.0))
      throw RangeError("cut-off values must lie in [0, 1]");
    if (values[n] > 0.0)
      support.push_back(static_cast<NodeIndex>(n));
    if (values[n] == 1.0)
      plateau.push_back(static_cast<NodeIndex>(n));
  }
  return CutoffFunction(std::move(values), RegionSet::from_nodes(grid, std::move(support), "supp Phi"),
                        RegionSet::from_nodes(grid, std::move(plateau), "{Phi = 1}"));
}

CutoffFunction CutoffFunction::around(const Grid &grid, const RegionSet &region, double plateau_radius,
                                      double ramp_width)
{
  if (region.empty())
    throw InvalidArgument("cut-off around an empty region");
  if (!(plateau_radius >= 0.0) || !(ramp_width > 0.0))
    throw RangeError("cut-off needs plateau_radius >= 0 and ramp_width > 0");
  std::vector<double> values(grid.node_count());
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double d = region.box_distance(grid.position(static_cast<NodeIndex>(n)));
    values[n] = std::clamp((plateau_radius + ramp_width - d) / ramp_width, 0.0, 1.0);
  }
  return from_values(grid, std::move(values));
}

double CutoffFunction::sup() const
{
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

namespace {

void check_sample(const SymMat2 &c, const Point &where)
{
  const auto ev = c.eigenvalues();
  if (!std::isfinite(ev[0]) || !std::isfinite(ev[1]) || ev[0] < -1e-12)
    throw InvalidArgument("coefficient sample is not positive semidefinite at (" +
                          std::to_string(where[0]) + ", " + std::to_string(where[1]) + ")");
}

Point midpoint(const Grid &g, const Edge &e)
{
  const Point a = g.position(e.u), b = g.position(e.v);
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

}  // namespace

DiscreteForm assemble(const CoefficientField &field, const Grid &grid, const std::optional<Potential> &potential)
{
  return assemble(field, std::make_shared<const Grid>(grid), potential);
}

DiscreteForm assemble(const CoefficientField &field, std::shared_ptr<const Grid> grid,
                      const std::optional<Potential> &potential)
{
  if (!grid)
    throw InvalidArgument("assemble: null grid");
  if (field.dim() != grid->dim())
    throw InvalidArgument("assemble: field dimension " + std::to_string(field.dim()) +
                          " does not match grid dimension " + std::to_string(grid->dim()));
  auto edges = stencil_edges(*grid);
  const std::size_t m = edges->size();
  std::vector<double> w(m, 0.0);
  std::vector<SymMat2> tensors(m);
  double lambda = field.upper_bound();

  if (grid->dim() == 1) {
    const double dx = grid->spacing(0);
    for (std::size_t e = 0; e < m; ++e) {
      const Point mid = midpoint(*grid, (*edges)[e]);
      SymMat2 c = field.eval(mid);
      c = {c.a11, 0.0, c.a11};
      check_sample(c, mid);
      const double ce = std::max(c.a11, 0.0);
      tensors[e] = {ce, 0.0, ce};
      w[e] = ce / dx;
    }
  } else {
    const double dx = grid->spacing(0), dy = grid->spacing(1);
    const int nx = grid->cells(0), ny = grid->cells(1);
    const double aspect = std::max(dx / dy, dy / dx);
    // Cell-centre samples feed the cross terms and the diagonal metric edges.
    std::vector<SymMat2> cell(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Point a = grid->position(grid->index(i, j));
        const Point centre{a[0] + 0.5 * dx, a[1] + 0.5 * dy};
        SymMat2 c = field.eval(centre);
        check_sample(c, centre);
        cell[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx] = c;
      }
    auto cross = [&](int i, int j) -> double {
      if (i < 0 || j < 0 || i >= nx || j >= ny)
        return 0.0;
      return std::abs(cell[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx].a12);
    };
    std::vector<double> face_max(cell.size(), 0.0);
    std::size_t e = 0;
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i, ++e) {
        const Point mid = midpoint(*grid, (*edges)[e]);
        const SymMat2 c = field.eval(mid);
        check_sample(c, mid);
        tensors[e] = c;
        const int adjacent = (j > 0) + (j < ny);
        w[e] = c.a11 * (dy / dx) * 0.5 * adjacent - 0.5 * (cross(i, j - 1) + cross(i, j));
        if (j > 0)
          face_max[i + static_cast<std::size_t>(j - 1) * nx] = std::max(face_max[i + static_cast<std::size_t>(j - 1) * nx], c.a11);
        if (j < ny)
          face_max[i + static_cast<std::size_t>(j) * nx] = std::max(face_max[i + static_cast<std::size_t>(j) * nx], c.a11);
      }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i, ++e) {
        const Point mid = midpoint(*grid, (*edges)[e]);
        const SymMat2 c = field.eval(mid);
        check_sample(c, mid);
        tensors[e] = c;
        const int adjacent = (i > 0) + (i < nx);
        w[e] = c.a22 * (dx / dy) * 0.5 * adjacent - 0.5 * (cross(i - 1, j) + cross(i, j));
        if (i > 0)
          face_max[(i - 1) + static_cast<std::size_t>(j) * nx] = std::max(face_max[(i - 1) + static_cast<std::size_t>(j) * nx], c.a22);
        if (i < nx)
          face_max[i + static_cast<std::size_t>(j) * nx] = std::max(face_max[i + static_cast<std::size_t>(j) * nx], c.a22);
      }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nx;
        const SymMat2 &c = cell[k];
        tensors[e] = c;
        w[e++] = c.a12 > 0.0 ? c.a12 : 0.0;
        tensors[e] = c;
        w[e++] = c.a12 < 0.0 ? -c.a12 : 0.0;
        if (c.a12 != 0.0)
          lambda = std::max(lambda, face_max[k] + std::abs(c.a12) * aspect);
      }
    for (std::size_t k = 0; k < m; ++k) {
      const double scale = std::max(1.0, tensors[k].norm());
      if (w[k] < -1e-12 * scale)
        throw InvalidArgument("assemble: cross terms too large for a nonnegative stencil on this grid "
                              "(coefficient not diagonally dominant relative to the cell aspect ratio)");
      w[k] = std::max(w[k], 0.0);
    }
  }

  std::vector<double> pot;
  if (potential) {
    pot.resize(grid->node_count());
    for (std::size_t n = 0; n < pot.size(); ++n) {
      const auto node = static_cast<NodeIndex>(n);
      const double v = potential->eval(grid->position(node));
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument("assemble: potential must be finite and nonnegative at every node");
      pot[n] = v * grid->node_measure(node);
    }
  }
  return DiscreteForm(std::move(grid), std::move(edges), std::move(w), std::move(tensors), std::move(pot), lambda);
}

DiscreteForm laplacian_form(std::shared_ptr<const Grid> grid)
{
  const int dim = grid->dim();
  return assemble(make_constant(dim, SymMat2::identity()), std::move(grid));
}

DiscreteForm regularize(const DiscreteForm &form, double epsilon)
{
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw RangeError("regularize: epsilon must be positive");
  const DiscreteForm l = laplacian_form(form.grid_ptr());
  std::vector<double> w(form.weights().begin(), form.weights().end());
  std::vector<SymMat2> t(form.tensors().begin(), form.tensors().end());
  for (std::size_t e = 0; e < w.size(); ++e) {
    w[e] += epsilon * l.weights()[e];
    t[e] = t[e] + SymMat2::identity() * epsilon;
  }
  return form.with_weights(std::move(w), std::move(t),
                           std::vector<double>(form.node_potential().begin(), form.node_potential().end()),
                           form.lambda_bound() + epsilon);
}

DiscreteForm truncate(const DiscreteForm &form, const CutoffFunction &cutoff)
{
  if (cutoff.values().size() != form.node_count())
    throw InvalidArgument("truncate: cut-off is defined on a different grid");
  const auto phi = cutoff.values();
  const auto edges = form.edges();
  std::vector<double> w(form.weights().begin(), form.weights().end());
  std::vector<SymMat2> t(form.tensors().begin(), form.tensors().end());
  for (std::size_t e = 0; e < w.size(); ++e) {
    const double pe = 0.5 * (phi[edges[e].u] + phi[edges[e].v]);
    w[e] *= pe;
    t[e] = t[e] * pe;
  }
  // h(Phi phi, phi) - h(Phi, phi^2)/2 leaves half of Phi V on the multiplicative part.
  std::vector<double> pot(form.node_potential().begin(), form.node_potential().end());
  for (std::size_t n = 0; n < pot.size(); ++n)
    pot[n] *= 0.5 * phi[n];
  return form.with_weights(std::move(w), std::move(t), std::move(pot), form.lambda_bound());
}

DiscreteForm add_potential(const DiscreteForm &form, const Potential &potential)
{
  const Grid &g = form.grid();
  std::vector<double> pot(g.node_count(), 0.0);
  if (form.has_potential())
    std::copy(form.node_potential().begin(), form.node_potential().end(), pot.begin());
  for (std::size_t n = 0; n < pot.size(); ++n) {
    const auto node = static_cast<NodeIndex>(n);
    const double v = potential.eval(g.position(node));
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("add_potential: potential must be finite and nonnegative at every node");
    pot[n] += v * g.node_measure(node);
  }
  return form.with_weights(std::vector<double>(form.weights().begin(), form.weights().end()),
                           std::vector<SymMat2>(form.tensors().begin(), form.tensors().end()), std::move(pot),
                           form.lambda_bound());
}

namespace {

double orient(const Point &a, const Point &b, const Point &c)
{
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool on_segment(const Point &a, const Point &b, const Point &p, double tol)
{
  return std::min(a[0], b[0]) - tol <= p[0] && p[0] <= std::max(a[0], b[0]) + tol &&
         std::min(a[1], b[1]) - tol <= p[1] && p[1] <= std::max(a[1], b[1]) + tol;
}

bool segments_meet(const Point &p1, const Point &p2, const Point &q1, const Point &q2, double tol)
{
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  const double eps = tol * tol;
  auto sgn = [eps](double v) { return v > eps ? 1 : (v < -eps ? -1 : 0); };
  const int s1 = sgn(d1), s2 = sgn(d2), s3 = sgn(d3), s4 = sgn(d4);
  if (s1 * s2 < 0 && s3 * s4 < 0)
    return true;
  return (s1 == 0 && on_segment(q1, q2, p1, tol)) || (s2 == 0 && on_segment(q1, q2, p2, tol)) ||
         (s3 == 0 && on_segment(p1, p2, q1, tol)) || (s4 == 0 && on_segment(p1, p2, q2, tol));
}

}  // namespace

DiscreteForm remove_edges_meeting_segment(const DiscreteForm &form, const Point &p0, const Point &p1)
{
  const Grid &g = form.grid();
  const double tol = 1e-9 * g.max_spacing();
  const auto edges = form.edges();
  std::vector<double> w(form.weights().begin(), form.weights().end());
  std::vector<SymMat2> t(form.tensors().begin(), form.tensors().end());
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (segments_meet(g.position(edges[e].u), g.position(edges[e].v), p0, p1, tol)) {
      w[e] = 0.0;
      t[e] = SymMat2{};
    }
  }
  return form.with_weights(std::move(w), std::move(t),
                           std::vector<double>(form.node_potential().begin(), form.node_potential().end()),
                           form.lambda_bound());
}

std::vector<double> carre_du_champ(const DiscreteForm &form, std::span<const double> psi)
{
  if (psi.size() != form.node_count())
    throw InvalidArgument("carre_du_champ: vector length does not match node count");
  for (double v : psi)
    if (!std::isfinite(v))
      throw InvalidArgument("carre_du_champ: psi must be finite");
  std::vector<double> gamma(form.node_count(), 0.0);
  const auto edges = form.edges();
  const auto w = form.weights();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double d = psi[edges[e].u] - psi[edges[e].v];
    const double half = 0.5 * w[e] * d * d;
    gamma[edges[e].u] += half;
    gamma[edges[e].v] += half;
  }
  const Grid &g = form.grid();
  for (std::size_t n = 0; n < gamma.size(); ++n)
    gamma[n] /= g.node_measure(static_cast<NodeIndex>(n));
  return gamma;
}

void write_triplets(const DiscreteForm &form, std::ostream &out)
{
  out << form.node_count() << '\n';
  const auto edges = form.edges();
  const auto w = form.weights();
  char buf[64];
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (w[e] == 0.0)
      continue;
    std::snprintf(buf, sizeof buf, "%.17g", w[e]);
    out << edges[e].u << ' ' << edges[e].v << ' ' << buf << '\n';
  }
}

}  // namespace difflab
