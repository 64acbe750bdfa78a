#include "difflab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "difflab/error.hpp"

namespace difflab {

std::array<double, 2> SymMat2::eigenvalues() const
{
  const double mean = 0.5 * (a11 + a22);
  const double half_gap = std::hypot(0.5 * (a11 - a22), a12);
  return {mean - half_gap, mean + half_gap};
}

double SymMat2::norm() const
{
  const auto ev = eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[1]));
}

double SymMat2::inverse_quad(double vx, double vy) const
{
  const double scale = std::max({std::abs(a11), std::abs(a22), std::abs(a12)});
  if (scale <= 0.0)
    return (vx == 0.0 && vy == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
  const double d = det();
  if (d > 1e-14 * scale * scale)
    return (a22 * vx * vx - 2.0 * a12 * vx * vy + a11 * vy * vy) / d;

  // Rank one: M = sigma u u^T. Only directions parallel to u have finite length.
  const auto ev = eigenvalues();
  const double sigma = ev[1];
  double ux = a12, uy = sigma - a11;
  if (std::abs(ux) + std::abs(uy) < 1e-300) {
    ux = sigma - a22;
    uy = a12;
  }
  if (std::abs(ux) + std::abs(uy) < 1e-300) {
    ux = a11 >= a22 ? 1.0 : 0.0;
    uy = 1.0 - ux;
  }
  const double un = std::hypot(ux, uy);
  ux /= un;
  uy /= un;
  const double along = vx * ux + vy * uy;
  const double perp = std::hypot(vx - along * ux, vy - along * uy);
  const double vn = std::hypot(vx, vy);
  if (perp > 1e-12 * vn)
    return std::numeric_limits<double>::infinity();
  return along * along / sigma;
}

CoefficientField::CoefficientField(int dim, EvalFn eval, double upper_bound, double lower_bound,
                                   std::string kind, std::optional<std::string> degeneracy_locus)
  : dim_(dim), eval_(std::make_shared<const EvalFn>(std::move(eval))),
    upper_bound_(upper_bound), lower_bound_(lower_bound), kind_(std::move(kind)),
    locus_(std::move(degeneracy_locus))
{
  if (dim_ != 1 && dim_ != 2)
    throw InvalidArgument("coefficient field dimension must be 1 or 2");
  if (!(upper_bound_ >= 0.0) || lower_bound_ < 0.0 || lower_bound_ > upper_bound_)
    throw InvalidArgument("coefficient field bounds must satisfy 0 <= mu <= lambda");
}

namespace {

void check_delta(double delta)
{
  if (!(delta >= 0.0 && delta < 1.0))
    throw RangeError("delta must lie in [0, 1), got " + std::to_string(delta));
}

// (r^2 / (1 + r^2))^delta, written to stay accurate for tiny and huge r.
double degenerate_profile(double r, double delta)
{
  if (delta == 0.0)
    return 1.0;
  const double r2 = r * r;
  return std::pow(r2 / (1.0 + r2), delta);
}

}  // namespace

CoefficientField make_c_delta(double delta)
{
  check_delta(delta);
  auto fn = [delta](const Point &x) { return SymMat2::scalar(degenerate_profile(x[0], delta)); };
  return CoefficientField(1, fn, 1.0, delta > 0.0 ? 0.0 : 1.0, "c_delta",
                          delta > 0.0 ? std::optional<std::string>("{0}") : std::nullopt);
}

double distance_to_interval(const Point &p, double a)
{
  const double cx = std::clamp(p[0], -a, a);
  return std::hypot(p[0] - cx, p[1]);
}

CoefficientField make_c_delta_2d(double delta, double interval_halfwidth)
{
  check_delta(delta);
  if (!(interval_halfwidth > 0.0))
    throw RangeError("interval half-width must be positive");
  const double a = interval_halfwidth;
  auto fn = [delta, a](const Point &x) {
    return SymMat2::scalar(degenerate_profile(distance_to_interval(x, a), delta));
  };
  std::optional<std::string> locus;
  if (delta > 0.0)
    locus = "[" + std::to_string(-a) + "," + std::to_string(a) + "]x{0}";
  return CoefficientField(2, fn, 1.0, delta > 0.0 ? 0.0 : 1.0, "c_delta_2d_interval", locus);
}

CoefficientField make_constant(int dim, const SymMat2 &value)
{
  if (dim != 1 && dim != 2)
    throw InvalidArgument("dimension must be 1 or 2");
  SymMat2 v = value;
  if (dim == 1) {
    if (v.a11 < 0.0 || !std::isfinite(v.a11))
      throw InvalidArgument("constant coefficient must be nonnegative");
    v = {v.a11, 0.0, v.a11};
  }
  const auto ev = v.eigenvalues();
  const double scale = std::max(1.0, v.norm());
  if (!std::isfinite(ev[0]) || !std::isfinite(ev[1]))
    throw InvalidArgument("constant coefficient must be finite");
  if (ev[0] < -1e-12 * scale)
    throw InvalidArgument("constant coefficient must be positive semidefinite");
  const double lam = v.norm();
  if (!(lam > 0.0)) {
    auto fn = [](const Point &) { return SymMat2{}; };
    return CoefficientField(dim, fn, 0.0, 0.0, "constant", "everywhere");
  }
  auto fn = [v](const Point &) { return v; };
  return CoefficientField(dim, fn, lam, std::max(0.0, ev[0]), "constant");
}

CoefficientField make_constant(double value) { return make_constant(1, SymMat2::scalar(value)); }

CoefficientField make_tabulated(std::vector<double> xs, std::vector<double> cs)
{
  if (xs.size() != cs.size() || xs.size() < 2)
    throw InvalidArgument("tabulated coefficient needs at least two (x, c) samples of equal length");
  if (!std::is_sorted(xs.begin(), xs.end()) ||
      std::adjacent_find(xs.begin(), xs.end()) != xs.end())
    throw InvalidArgument("tabulated coefficient abscissae must be strictly increasing");
  for (double c : cs)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw InvalidArgument("tabulated coefficient values must be finite and nonnegative");
  const double hi = *std::max_element(cs.begin(), cs.end());
  const double lo = *std::min_element(cs.begin(), cs.end());
  if (!(hi > 0.0))
    throw InvalidArgument("tabulated coefficient is identically zero");
  auto fn = [xs = std::move(xs), cs = std::move(cs)](const Point &p) {
    const double x = p[0];
    if (x <= xs.front())
      return SymMat2::scalar(cs.front());
    if (x >= xs.back())
      return SymMat2::scalar(cs.back());
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return SymMat2::scalar((1.0 - s) * cs[i] + s * cs[i + 1]);
  };
  return CoefficientField(1, fn, hi, lo, "tabulated",
                          lo > 0.0 ? std::nullopt : std::optional<std::string>("zeros of table"));
}

CoefficientField sum(const CoefficientField &a, const CoefficientField &b)
{
  if (a.dim() != b.dim())
    throw InvalidArgument("cannot add coefficient fields of different dimension");
  auto fn = [a, b](const Point &x) { return a.eval(x) + b.eval(x); };
  return CoefficientField(a.dim(), fn, a.upper_bound() + b.upper_bound(),
                          a.lower_bound() + b.lower_bound(), "sum");
}

Potential::Potential(EvalFn eval, std::optional<double> global_sup, bool locally_bounded,
                     std::string kind)
  : eval_(std::make_shared<const EvalFn>(std::move(eval))), sup_(global_sup),
    locally_bounded_(locally_bounded), kind_(std::move(kind))
{
  if (sup_ && !(*sup_ >= 0.0))
    throw InvalidArgument("potential supremum must be nonnegative");
}

Potential make_constant_potential(double v0)
{
  if (!(v0 >= 0.0) || !std::isfinite(v0))
    throw RangeError("constant potential must be finite and nonnegative");
  return Potential([v0](const Point &) { return v0; }, v0, true, "constant");
}

Potential make_quadratic_potential(double coefficient)
{
  if (!(coefficient >= 0.0) || !std::isfinite(coefficient))
    throw RangeError("quadratic potential coefficient must be finite and nonnegative");
  return Potential([coefficient](const Point &x) { return coefficient * (x[0] * x[0] + x[1] * x[1]); },
                   std::nullopt, true, "quadratic");
}

}  // namespace difflab
