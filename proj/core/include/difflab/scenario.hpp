#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "difflab/coefficients.hpp"
#include "difflab/region.hpp"

namespace difflab {

// Interval (1D) or box (2D) in length units.
struct RegionSpec
{
  std::array<double, 2> x{0.0, 0.0};
  std::array<double, 2> y{0.0, 0.0};
  int line = 0;
};

struct Scenario
{
  std::string name;
  std::filesystem::path source;

  // [grid]
  int dim = 1;
  std::array<double, 2> x_bounds{0.0, 0.0};
  std::array<double, 2> y_bounds{0.0, 0.0};
  std::array<int, 2> n_cells{0, 0};

  // [coefficient]
  std::string coefficient_kind;
  double value = 1.0;
  std::array<double, 3> matrix{1.0, 0.0, 1.0};
  double delta = 0.0;
  double interval_halfwidth = 0.0;
  std::vector<double> table_x, table_c;
  bool remove_obstacle_edges = false;

  // [regions]
  RegionSpec a, b;

  // [time]; model time is dimensionless
  double t_min = 0.0;
  double t_max = 0.0;
  int t_count = 0;
  bool auto_window = true;

  // [varadhan]
  double varadhan_tolerance = 0.05;

  std::vector<double> epsilons;

  // [refinement]
  std::vector<int> refinement_cells;
  std::string refinement_expect;  // empty, "converged" or "diverging"

  // [potential]
  std::string potential_kind = "none";
  double potential_value = 0.0;

  // [propagation]
  double propagation_t_max = 0.0;  // 0: four cells of travel at speed sqrt(lambda)
  int propagation_count = 8;

  // [subordination]
  double subordination_t = 0.0;  // 0: t_min
  int quad_points = 512;

  // [localization]
  double plateau_radius = 0.0;
  double ramp_width = 0.0;
  double localization_fraction = 0.95;

  // [resistance]
  Point resistance_from{0.0, 0.0};
  Point resistance_to{0.0, 0.0};
  bool has_resistance_points = false;
  std::optional<double> resistance_expect_exponent;

  // [exhaustion]
  std::vector<double> exhaustion_radii;

  std::vector<std::string> checks;
  std::filesystem::path output_dir;

  CoefficientField make_field() const;
  std::optional<Potential> make_potential() const;
};

// Flat "key = value" lines grouped by [section]. '#' starts a comment. Throws ConfigError
// with the line number on syntax errors, unknown sections or keys, and bad values.
Scenario parse_scenario(std::istream &in, const std::filesystem::path &source = {});
Scenario load_scenario(const std::filesystem::path &path);

// Throws ConfigError unless regions keep 10% of the box width from every boundary,
// t_min < t_max, count >= 5 when varadhan is requested, and every check name is known.
void validate(const Scenario &s);

}  // namespace difflab
