#include "difflab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "difflab/error.hpp"

namespace difflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Line
{
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double r_squared = 1.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y)
{
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - l.intercept - l.slope * x[i];
    rss += r * r;
  }
  l.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - rss / syy) : 1.0;
  if (x.size() > 2 && sxx > 0.0)
    l.se_intercept = std::sqrt(rss / (n - 2.0) * (1.0 / n + mx * mx / sxx));
  return l;
}

// Smallest positive long double: values below it are indistinguishable from zero.
const double kLogFloor = std::log(static_cast<double>(std::numeric_limits<long double>::denorm_min()));

}  // namespace

const char *to_string(FitStatus s)
{
  return s == FitStatus::Ok ? "ok" : "distance exceeds resolvable bound";
}

const char *to_string(SweepAxis a)
{
  switch (a) {
  case SweepAxis::Epsilon:
    return "epsilon";
  case SweepAxis::Dx:
    return "dx";
  case SweepAxis::CutoffRadius:
    return "cutoff-radius";
  }
  return "unknown";
}

const char *to_string(Verdict v)
{
  switch (v) {
  case Verdict::Converged:
    return "converged";
  case Verdict::Diverging:
    return "diverging";
  case Verdict::Inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

VaradhanFit fit_varadhan(const SemigroupTrace &trace, std::optional<FitWindow> window)
{
  VaradhanFit fit;
  std::vector<double> ts, ys;
  double lo = kInf, hi = -kInf;
  for (const TracePoint &p : trace.points) {
    if (window && (p.t < window->t_min * (1.0 - 1e-12) || p.t > window->t_max * (1.0 + 1e-12)))
      continue;
    lo = std::min(lo, p.t);
    hi = std::max(hi, p.t);
    if (p.log_value == -kInf || p.log_value < kLogFloor) {
      fit.status = FitStatus::ExceedsResolvableBound;
      fit.lower_bound_d_squared = std::max(fit.lower_bound_d_squared, -4.0 * p.t * kLogFloor);
      continue;
    }
    ts.push_back(p.t);
    ys.push_back(-4.0 * p.t * p.log_value);
  }
  fit.window = window.value_or(FitWindow{lo, hi});
  fit.points_used = ts.size();
  if (ts.size() < 5) {
    if (fit.status == FitStatus::ExceedsResolvableBound) {
      fit.fitted_d_squared = fit.lower_bound_d_squared;
      fit.intercept = fit.lower_bound_d_squared;
      fit.confidence = kInf;
      return fit;
    }
    throw InvalidArgument("fit_varadhan: need at least 5 usable trace points, got " + std::to_string(ts.size()));
  }
  const Line all = least_squares(ts, ys);
  // Dropping the largest time.
  std::size_t last = 0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] > ts[last])
      last = i;
  std::vector<double> t2, y2;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (i != last) {
      t2.push_back(ts[i]);
      y2.push_back(ys[i]);
    }
  const Line dropped = least_squares(t2, y2);
  fit.intercept = all.intercept;
  fit.slope = all.slope;
  fit.r_squared = all.r_squared;
  fit.fitted_d_squared = std::max(0.0, all.intercept);
  fit.confidence = 2.0 * all.se_intercept + 2.0 * std::abs(dropped.intercept - all.intercept) +
                   1e-12 * std::max(1.0, std::abs(all.intercept));
  if (fit.status == FitStatus::ExceedsResolvableBound)
    fit.fitted_d_squared = std::max(fit.fitted_d_squared, fit.lower_bound_d_squared);
  return fit;
}

FitWindow default_fit_window(const DiscreteForm &form, const RegionSet &a, const RegionSet &b)
{
  const DistanceReport d = set_distance(form, a, b);
  if (!std::isfinite(d.value) || d.value <= 0.0)
    throw RangeError("default_fit_window: needs a finite positive distance between the regions");
  const double hops = static_cast<double>(std::max<std::size_t>(d.path.size(), 2) - 1);
  const double d2 = d.value * d.value;
  FitWindow w;
  w.t_min = 2.0 * d2 / hops;
  w.t_max = std::min(4.0 * w.t_min, d2 / 8.0);
  if (w.t_max <= w.t_min)
    w.t_min = w.t_max / 4.0;
  return w;
}

std::vector<double> log_spaced(double t_min, double t_max, std::size_t count)
{
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2)
    throw RangeError("log_spaced: need 0 < t_min < t_max and count >= 2");
  std::vector<double> out(count);
  const double r = std::log(t_max / t_min);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = t_min * std::exp(r * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

Verdict classify(std::span<const double> values, double *rate, std::span<const double> parameters)
{
  const std::size_t n = values.size();
  if (rate) {
    *rate = 0.0;
    if (n >= 2 && parameters.size() == n && values[n - 1] > 0.0 && values[n - 2] > 0.0 &&
        parameters[n - 1] > 0.0 && parameters[n - 2] > 0.0 && parameters[n - 1] != parameters[n - 2])
      *rate = std::log(values[n - 1] / values[n - 2]) / std::log(parameters[n - 1] / parameters[n - 2]);
  }
  if (n < 3)
    return Verdict::Inconclusive;
  const double v0 = values[n - 3], v1 = values[n - 2], v2 = values[n - 1];
  if (v0 > 0.0 && v1 >= 1.2 * v0 && v2 >= 1.2 * v1)
    return Verdict::Diverging;
  auto change = [](double from, double to) { return from > 0.0 ? std::abs(to / from - 1.0) : (to == 0.0 ? 0.0 : 1.0); };
  if (change(v0, v1) < 0.03 && change(v1, v2) < 0.03)
    return Verdict::Converged;
  return Verdict::Inconclusive;
}

SweepResult epsilon_sweep(const DiscreteForm &base, const RegionSet &a, const RegionSet &b,
                          std::span<const double> epsilons, std::span<const double> times)
{
  for (std::size_t i = 0; i < epsilons.size(); ++i)
    if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1])))
      throw RangeError("epsilon_sweep: epsilons must be positive and descending");
  SweepResult res;
  res.axis = SweepAxis::Epsilon;
  std::vector<double> fitted, params;
  for (double eps : epsilons) {
    const DiscreteForm h = regularize(base, eps);
    std::vector<double> ts(times.begin(), times.end());
    std::optional<FitWindow> window;
    if (ts.empty()) {
      window = default_fit_window(h, a, b);
      ts = log_spaced(window->t_min, window->t_max, 12);
    }
    const auto tr = trace_inner_products(h, a, b, ts);
    const auto fit = fit_varadhan(tr, window);
    const double d = set_distance(h, a, b).value;
    res.points.push_back({eps, fit.fitted_d_squared, fit.confidence, d * d, 0.0});
    fitted.push_back(fit.fitted_d_squared);
    params.push_back(eps);
  }
  res.verdict = classify(fitted, &res.rate, params);
  return res;
}

namespace {

SweepPoint refinement_level(const RefinementProblem &p, int cells)
{
  std::shared_ptr<const Grid> grid;
  if (p.dim == 1)
    grid = std::make_shared<const Grid>(Grid::line(p.x_bounds[0], p.x_bounds[1], cells));
  else {
    const double ratio = (p.y_bounds[1] - p.y_bounds[0]) / (p.x_bounds[1] - p.x_bounds[0]);
    const int ny = std::max(1, static_cast<int>(std::lround(cells * ratio)));
    grid = std::make_shared<const Grid>(Grid::rectangle(p.x_bounds, p.y_bounds, {cells, ny}));
  }
  const DiscreteForm form = assemble(p.field, grid);
  const RegionSet a = p.dim == 1 ? RegionSet::interval(*grid, p.a_x[0], p.a_x[1]) : RegionSet::box(*grid, p.a_x, p.a_y);
  const RegionSet b = p.dim == 1 ? RegionSet::interval(*grid, p.b_x[0], p.b_x[1]) : RegionSet::box(*grid, p.b_x, p.b_y);
  const FitWindow window = default_fit_window(form, a, b);
  const auto ts = log_spaced(window.t_min, window.t_max, p.time_count);
  const auto tr = trace_inner_products(form, a, b, ts);
  const auto fit = fit_varadhan(tr, window);
  const double d = set_distance(form, a, b).value;
  const NodeIndex r0 = grid->nearest_node(p.resistance_from), r1 = grid->nearest_node(p.resistance_to);
  SweepPoint sp;
  sp.parameter = grid->spacing(0);
  sp.fitted_d_squared = fit.fitted_d_squared;
  sp.confidence = fit.confidence;
  sp.eikonal_d_squared = d * d;
  sp.resistance = r0 != r1 ? effective_resistance(form, r0, r1) : 0.0;
  return sp;
}

}  // namespace

SweepResult refinement_sweep(const RefinementProblem &problem, std::span<const int> cells)
{
  SweepResult res;
  res.axis = SweepAxis::Dx;
  res.points.resize(cells.size());
  if (problem.threads > 1) {
    std::vector<std::future<SweepPoint>> jobs;
    for (int c : cells)
      jobs.push_back(std::async(std::launch::async, refinement_level, std::cref(problem), c));
    for (std::size_t i = 0; i < jobs.size(); ++i)
      res.points[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i)
      res.points[i] = refinement_level(problem, cells[i]);
  }
  std::vector<double> fitted, params;
  for (const auto &p : res.points) {
    fitted.push_back(p.fitted_d_squared);
    params.push_back(p.parameter);
  }
  res.verdict = classify(fitted, &res.rate, params);
  return res;
}

namespace {

// Exact Euclidean distance between two node sets; the bounding box of A prunes most pairs.
double euclidean_gap(const Grid &g, const RegionSet &a, const RegionSet &b)
{
  double best = kInf;
  for (NodeIndex n : b.nodes()) {
    const Point p = g.position(n);
    if (a.box_distance(p) >= best)
      continue;
    for (NodeIndex m : a.nodes()) {
      const Point q = g.position(m);
      best = std::min(best, std::hypot(p[0] - q[0], p[1] - q[1]));
    }
  }
  return best;
}

} // namespace

LocalizationResult localization_check(const DiscreteForm &base, const RegionSet &a, const CutoffFunction &cutoff,
                                      double t_max, std::uint64_t seed, bool enforce_bound)
{
  if (a.empty())
    throw InvalidArgument("localization_check: empty region");
  if (!(t_max > 0.0))
    throw RangeError("localization_check: t_max must be positive");
  const Grid &g = base.grid();
  if (!a.subset_of(cutoff.plateau()))
    throw RangeError("localization_check: the cut-off plateau must contain A");
  LocalizationResult res;
  const RegionSet outside = cutoff.plateau().complement(g);
  res.margin = euclidean_gap(g, a, outside);
  if (!(res.margin > 0.0))
    throw RangeError("localization_check: margin between A and the plateau boundary is not positive");
  res.bound = res.margin / std::sqrt(base.lambda_bound());
  if (enforce_bound && t_max > res.bound * (1.0 + 1e-12))
    throw RangeError("localization_check: t_max exceeds lambda^{-1/2} times the margin (" +
                     std::to_string(res.bound) + ")");
  const DiscreteForm truncated = truncate(base, cutoff);
  constexpr int kTimes = 16, kSeeds = 5;
  std::vector<double> ts(kTimes);
  for (int i = 0; i < kTimes; ++i)
    ts[i] = t_max * (i + 1) / kTimes;
  for (int s = 0; s < kSeeds; ++s) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> phi(g.node_count(), 0.0);
    for (NodeIndex n : a.nodes())
      phi[n] = unif(rng);
    const double scale = norm_mu(g, phi);
    if (scale == 0.0)
      continue;
    const auto full = apply_cosine(base, ts, phi, 1e-13 * scale);
    const auto trunc = apply_cosine(truncated, ts, phi, 1e-13 * scale);
    for (int i = 0; i < kTimes; ++i) {
      std::vector<double> diff(phi.size());
      for (std::size_t n = 0; n < diff.size(); ++n)
        diff[n] = full[i][n] - trunc[i][n];
      res.discrepancy = std::max(res.discrepancy, norm_mu(g, diff) / scale);
    }
  }
  return res;
}

TrotterResult trotter_sandwich_check(const DiscreteForm &base, const Potential &potential, const RegionSet &a,
                                     const RegionSet &b, std::span<const double> times,
                                     std::optional<FitWindow> window, double fit_tolerance)
{
  const Grid &g = base.grid();
  TrotterResult res;
  for (std::size_t n = 0; n < g.node_count(); ++n)
    res.potential_sup = std::max(res.potential_sup, potential.eval(g.position(static_cast<NodeIndex>(n))));
  if (!std::isfinite(res.potential_sup))
    throw RangeError("trotter_sandwich_check: potential is unbounded on the grid");
  const DiscreteForm hv = add_potential(base, potential);
  res.trace_h = trace_inner_products(base, a, b, times);
  res.trace_hv = trace_inner_products(hv, a, b, times);
  for (std::size_t i = 0; i < res.trace_h.points.size(); ++i) {
    const TracePoint &p = res.trace_h.points[i], &q = res.trace_hv.points[i];
    if (p.log_value == -kInf && q.log_value == -kInf)
      continue;
    const double rel = (p.value > 0.0 ? p.error_bound / p.value : 0.0) + (q.value > 0.0 ? q.error_bound / q.value : 0.0) + 1e-12;
    const double upper = q.log_value - p.log_value;
    const double lower = p.log_value - p.t * res.potential_sup - q.log_value;
    res.worst_upper = i == 0 ? upper : std::max(res.worst_upper, upper);
    res.worst_lower = i == 0 ? lower : std::max(res.worst_lower, lower);
    if (upper > rel || lower > rel)
      res.sandwich_holds = false;
  }
  res.fit_h = fit_varadhan(res.trace_h, window);
  res.fit_hv = fit_varadhan(res.trace_hv, window);
  const double ref = std::max(res.fit_h.fitted_d_squared, 1e-300);
  res.relative_gap = std::abs(res.fit_hv.fitted_d_squared - res.fit_h.fitted_d_squared) / ref;
  res.fits_agree = res.relative_gap <= fit_tolerance;
  return res;
}

namespace {

long double norm_mu_ld(const Grid &g, const std::vector<long double> &v)
{
  const auto &mu = g.node_measures();
  long double s = 0.0L;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += static_cast<long double>(mu[i]) * v[i] * v[i];
  return std::sqrt(s);
}

}  // namespace

SemigroupTrace projection_norm_trace(const DiscreteForm &form, const RegionSet &a, const RegionSet &b,
                                     std::span<const double> times, double tol)
{
  if (a.empty() || b.empty())
    throw InvalidArgument("projection_norm_trace: empty region");
  const Grid &g = form.grid();
  SemigroupTrace tr;
  tr.solver = SolverKind::Uniformization;
  constexpr int kMaxIterations = 2000;
  for (double t : times) {
    std::vector<long double> v(g.node_count(), 0.0L);
    for (NodeIndex n : b.nodes())
      v[n] = 1.0L;
    long double vn = norm_mu_ld(g, v);
    for (auto &x : v)
      x /= vn;
    long double sigma = 0.0L;
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
      auto x = apply_semigroup_positive(form, t, v, 1e-3 * tol, &a);
      std::vector<long double> xa(x.size(), 0.0L);
      for (NodeIndex n : a.nodes())
        xa[n] = x[n];
      const long double next = norm_mu_ld(g, xa);
      if (next == 0.0L) {
        sigma = 0.0L;
        converged = true;
        break;
      }
      auto y = apply_semigroup_positive(form, t, xa, 1e-3 * tol, &b);
      std::vector<long double> yb(y.size(), 0.0L);
      for (NodeIndex n : b.nodes())
        yb[n] = y[n];
      const long double yn = norm_mu_ld(g, yb);
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = yb[i] / yn;
      const bool settled = it > 0 && std::abs(next - sigma) <= static_cast<long double>(0.1 * tol) * next;
      sigma = next;
      if (settled) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw SolverError("projection_norm_trace: power iteration stagnated", static_cast<double>(sigma));
    TracePoint p;
    p.t = t;
    p.log_value = sigma > 0.0L ? static_cast<double>(std::log(sigma)) : -kInf;
    p.value = static_cast<double>(sigma);
    p.error_bound = p.value * tol;
    tr.points.push_back(p);
  }
  return tr;
}

DaviesGaffneyResult davies_gaffney_check(const SemigroupTrace &trace, double distance, double measure_a,
                                         double measure_b, double slack)
{
  DaviesGaffneyResult res;
  res.distance = distance;
  res.worst_excess = -kInf;
  const double scale = std::sqrt(measure_a * measure_b);
  for (const TracePoint &p : trace.points) {
    const double bound = std::isfinite(distance) ? std::exp(-distance * distance / (4.0 * p.t)) * scale : 0.0;
    const double excess = p.value - bound - p.error_bound - slack;
    res.worst_excess = std::max(res.worst_excess, excess);
    if (excess > 0.0)
      res.holds = false;
  }
  return res;
}

double mass_outside(const Grid &grid, std::span<const double> u, const RegionSet &a, double radius)
{
  const auto &mu = grid.node_measures();
  // Nodes on the sphere of the given radius count as inside.
  const double snapped = radius + 1e-9 * grid.max_spacing();
  double out = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n)
    if (a.box_distance(grid.position(static_cast<NodeIndex>(n))) > snapped)
      out += mu[n] * u[n] * u[n];
  return out / a.measure();
}

double finite_propagation_check(const DiscreteForm &form, const RegionSet &a, std::span<const double> times)
{
  const Grid &g = form.grid();
  const auto ind = a.indicator();
  const auto waves = apply_cosine(form, times, ind, 1e-14 * std::sqrt(a.measure()));
  const double speed = std::sqrt(form.lambda_bound());
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    worst = std::max(worst, mass_outside(g, waves[i], a, speed * std::abs(times[i]) + 3.0 * g.max_spacing()));
  return worst;
}

}  // namespace difflab
