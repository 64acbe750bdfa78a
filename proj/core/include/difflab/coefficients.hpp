#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace difflab {

using Point = std::array<double, 2>;

// Symmetric 2x2 matrix. One-dimensional fields only use a11.
struct SymMat2
{
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  static SymMat2 scalar(double c) { return {c, 0.0, c}; }
  static SymMat2 identity() { return {1.0, 0.0, 1.0}; }

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a12; }

  // Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const;

  // Spectral norm (largest absolute eigenvalue).
  double norm() const;

  // Quadratic form v^T M v.
  double quad(double vx, double vy) const { return a11 * vx * vx + 2.0 * a12 * vx * vy + a22 * vy * vy; }

  // v^T M^{-1} v, with +inf when v has a component along the null space of a singular M.
  double inverse_quad(double vx, double vy) const;

  SymMat2 operator+(const SymMat2 &o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  SymMat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
  bool operator==(const SymMat2 &) const = default;
};

// Spatially varying diffusion coefficient. Values are immutable after construction and the
// evaluation function must be safe to call concurrently.
class CoefficientField
{
public:
  using EvalFn = std::function<SymMat2(const Point &)>;

  CoefficientField(int dim, EvalFn eval, double upper_bound, double lower_bound,
                   std::string kind, std::optional<std::string> degeneracy_locus = std::nullopt);

  int dim() const { return dim_; }

  // Matrix value at x. For dim == 1 only x[0] is read and only a11 is meaningful.
  SymMat2 eval(const Point &x) const { return (*eval_)(x); }
  double eval_scalar(double x) const { return (*eval_)({x, 0.0}).a11; }

  // lambda: essential sup of the matrix norm.
  double upper_bound() const { return upper_bound_; }
  // mu: essential inf of the smallest eigenvalue; zero iff degenerate.
  double lower_bound() const { return lower_bound_; }
  bool degenerate() const { return lower_bound_ <= 0.0; }

  const std::string &kind() const { return kind_; }
  const std::optional<std::string> &degeneracy_locus() const { return locus_; }

private:
  int dim_;
  std::shared_ptr<const EvalFn> eval_;
  double upper_bound_;
  double lower_bound_;
  std::string kind_;
  std::optional<std::string> locus_;
};

// c_delta(x) = (x^2 / (1 + x^2))^delta on the real line, delta in [0, 1).
CoefficientField make_c_delta(double delta);

// Isotropic 2D field (|x|_I^2 / (1 + |x|_I^2))^delta * Id where |x|_I is the distance to the
// segment [-a, a] x {0}.
CoefficientField make_c_delta_2d(double delta, double interval_halfwidth);

// Constant field. Throws InvalidArgument unless value is symmetric positive semidefinite.
CoefficientField make_constant(int dim, const SymMat2 &value);
CoefficientField make_constant(double value);

// 1D field interpolated linearly from (x, c) samples, constant beyond the table ends.
CoefficientField make_tabulated(std::vector<double> xs, std::vector<double> cs);

// Pointwise sum; bounds combine conservatively.
CoefficientField sum(const CoefficientField &a, const CoefficientField &b);

// Euclidean distance from p to the segment [-a, a] x {0}.
double distance_to_interval(const Point &p, double a);

// Nonnegative multiplication operator, kept separate from the diffusion coefficient.
class Potential
{
public:
  using EvalFn = std::function<double(const Point &)>;

  Potential(EvalFn eval, std::optional<double> global_sup, bool locally_bounded, std::string kind);

  double eval(const Point &x) const { return (*eval_)(x); }
  const std::optional<double> &global_sup() const { return sup_; }
  bool locally_bounded() const { return locally_bounded_; }
  const std::string &kind() const { return kind_; }

private:
  std::shared_ptr<const EvalFn> eval_;
  std::optional<double> sup_;
  bool locally_bounded_;
  std::string kind_;
};

Potential make_constant_potential(double v0);

// V(x) = coefficient * |x|^2; unbounded globally, locally bounded.
Potential make_quadratic_potential(double coefficient);

}  // namespace difflab
