#include "difflab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "difflab/error.hpp"
#include "difflab/runner.hpp"

namespace difflab {

namespace {

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string &v)
{
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  return out;
}

double to_double(const std::string &text, const std::string &key, int line)
{
  double v = 0.0;
  const char *first = text.data(), *last = text.data() + text.size();
  if (!text.empty() && *first == '+')
    ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty())
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'", line);
  return v;
}

int to_int(const std::string &text, const std::string &key, int line)
{
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'", line);
  return v;
}

std::vector<double> to_doubles(const std::string &text, const std::string &key, int line)
{
  std::vector<double> out;
  for (const auto &item : split_list(text))
    out.push_back(to_double(item, key, line));
  return out;
}

std::array<double, 2> to_pair(const std::string &text, const std::string &key, int line)
{
  const auto v = to_doubles(text, key, line);
  if (v.size() != 2)
    throw ConfigError("key '" + key + "': expected two comma-separated numbers", line);
  return {v[0], v[1]};
}

bool to_bool(const std::string &text, const std::string &key, int line)
{
  if (text == "true" || text == "yes" || text == "1")
    return true;
  if (text == "false" || text == "no" || text == "0")
    return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'", line);
}

using Setter = std::function<void(Scenario &, const std::string &, int)>;

const std::map<std::string, std::map<std::string, Setter>> &schema()
{
  static const std::map<std::string, std::map<std::string, Setter>> table = {
    {"",
     {
       {"name", [](Scenario &s, const std::string &v, int) { s.name = v; }},
     }},
    {"grid",
     {
       {"dim", [](Scenario &s, const std::string &v, int l) { s.dim = to_int(v, "dim", l); }},
       {"x_min", [](Scenario &s, const std::string &v, int l) { s.x_bounds[0] = to_double(v, "x_min", l); }},
       {"x_max", [](Scenario &s, const std::string &v, int l) { s.x_bounds[1] = to_double(v, "x_max", l); }},
       {"y_min", [](Scenario &s, const std::string &v, int l) { s.y_bounds[0] = to_double(v, "y_min", l); }},
       {"y_max", [](Scenario &s, const std::string &v, int l) { s.y_bounds[1] = to_double(v, "y_max", l); }},
       {"n_cells", [](Scenario &s, const std::string &v, int l) { s.n_cells[0] = to_int(v, "n_cells", l); }},
       {"n_cells_x", [](Scenario &s, const std::string &v, int l) { s.n_cells[0] = to_int(v, "n_cells_x", l); }},
       {"n_cells_y", [](Scenario &s, const std::string &v, int l) { s.n_cells[1] = to_int(v, "n_cells_y", l); }},
       {"boundary",
        [](Scenario &, const std::string &v, int l) {
          if (v != "reflecting")
            throw ConfigError("key 'boundary': only 'reflecting' is supported", l);
        }},
     }},
    {"coefficient",
     {
       {"kind", [](Scenario &s, const std::string &v, int) { s.coefficient_kind = v; }},
       {"value", [](Scenario &s, const std::string &v, int l) { s.value = to_double(v, "value", l); }},
       {"c11", [](Scenario &s, const std::string &v, int l) { s.matrix[0] = to_double(v, "c11", l); }},
       {"c12", [](Scenario &s, const std::string &v, int l) { s.matrix[1] = to_double(v, "c12", l); }},
       {"c22", [](Scenario &s, const std::string &v, int l) { s.matrix[2] = to_double(v, "c22", l); }},
       {"delta", [](Scenario &s, const std::string &v, int l) { s.delta = to_double(v, "delta", l); }},
       {"interval_halfwidth",
        [](Scenario &s, const std::string &v, int l) { s.interval_halfwidth = to_double(v, "interval_halfwidth", l); }},
       {"table_x", [](Scenario &s, const std::string &v, int l) { s.table_x = to_doubles(v, "table_x", l); }},
       {"table_c", [](Scenario &s, const std::string &v, int l) { s.table_c = to_doubles(v, "table_c", l); }},
       {"remove_obstacle_edges",
        [](Scenario &s, const std::string &v, int l) { s.remove_obstacle_edges = to_bool(v, "remove_obstacle_edges", l); }},
     }},
    {"regions",
     {
       {"a", [](Scenario &s, const std::string &v, int l) { s.a.x = to_pair(v, "a", l); s.a.line = l; }},
       {"b", [](Scenario &s, const std::string &v, int l) { s.b.x = to_pair(v, "b", l); s.b.line = l; }},
       {"a_x", [](Scenario &s, const std::string &v, int l) { s.a.x = to_pair(v, "a_x", l); s.a.line = l; }},
       {"a_y", [](Scenario &s, const std::string &v, int l) { s.a.y = to_pair(v, "a_y", l); }},
       {"b_x", [](Scenario &s, const std::string &v, int l) { s.b.x = to_pair(v, "b_x", l); s.b.line = l; }},
       {"b_y", [](Scenario &s, const std::string &v, int l) { s.b.y = to_pair(v, "b_y", l); }},
     }},
    {"time",
     {
       {"t_min", [](Scenario &s, const std::string &v, int l) { s.t_min = to_double(v, "t_min", l); }},
       {"t_max", [](Scenario &s, const std::string &v, int l) { s.t_max = to_double(v, "t_max", l); }},
       {"count", [](Scenario &s, const std::string &v, int l) { s.t_count = to_int(v, "count", l); }},
       {"window",
        [](Scenario &s, const std::string &v, int l) {
          if (v != "auto" && v != "full")
            throw ConfigError("key 'window': expected 'auto' or 'full'", l);
          s.auto_window = v == "auto";
        }},
     }},
    {"varadhan",
     {
       {"tolerance", [](Scenario &s, const std::string &v, int l) { s.varadhan_tolerance = to_double(v, "tolerance", l); }},
     }},
    {"epsilon",
     {
       {"values", [](Scenario &s, const std::string &v, int l) { s.epsilons = to_doubles(v, "values", l); }},
     }},
    {"refinement",
     {
       {"n_cells",
        [](Scenario &s, const std::string &v, int l) {
          s.refinement_cells.clear();
          for (const auto &item : split_list(v))
            s.refinement_cells.push_back(to_int(item, "n_cells", l));
        }},
       {"expect",
        [](Scenario &s, const std::string &v, int l) {
          if (v != "converged" && v != "diverging")
            throw ConfigError("key 'expect': expected 'converged' or 'diverging'", l);
          s.refinement_expect = v;
        }},
     }},
    {"potential",
     {
       {"kind",
        [](Scenario &s, const std::string &v, int l) {
          if (v != "none" && v != "constant" && v != "quadratic")
            throw ConfigError("key 'kind': potential must be none, constant or quadratic", l);
          s.potential_kind = v;
        }},
       {"value", [](Scenario &s, const std::string &v, int l) { s.potential_value = to_double(v, "value", l); }},
     }},
    {"propagation",
     {
       {"t_max", [](Scenario &s, const std::string &v, int l) { s.propagation_t_max = to_double(v, "t_max", l); }},
       {"count", [](Scenario &s, const std::string &v, int l) { s.propagation_count = to_int(v, "count", l); }},
     }},
    {"subordination",
     {
       {"t", [](Scenario &s, const std::string &v, int l) { s.subordination_t = to_double(v, "t", l); }},
       {"quad_points", [](Scenario &s, const std::string &v, int l) { s.quad_points = to_int(v, "quad_points", l); }},
     }},
    {"localization",
     {
       {"plateau_radius",
        [](Scenario &s, const std::string &v, int l) { s.plateau_radius = to_double(v, "plateau_radius", l); }},
       {"ramp_width", [](Scenario &s, const std::string &v, int l) { s.ramp_width = to_double(v, "ramp_width", l); }},
       {"t_fraction",
        [](Scenario &s, const std::string &v, int l) { s.localization_fraction = to_double(v, "t_fraction", l); }},
     }},
    {"resistance",
     {
       {"from",
        [](Scenario &s, const std::string &v, int l) {
          const auto p = to_doubles(v, "from", l);
          if (p.empty() || p.size() > 2)
            throw ConfigError("key 'from': expected one or two coordinates", l);
          s.resistance_from = {p[0], p.size() > 1 ? p[1] : 0.0};
          s.has_resistance_points = true;
        }},
       {"to",
        [](Scenario &s, const std::string &v, int l) {
          const auto p = to_doubles(v, "to", l);
          if (p.empty() || p.size() > 2)
            throw ConfigError("key 'to': expected one or two coordinates", l);
          s.resistance_to = {p[0], p.size() > 1 ? p[1] : 0.0};
        }},
       {"expect_exponent",
        [](Scenario &s, const std::string &v, int l) { s.resistance_expect_exponent = to_double(v, "expect_exponent", l); }},
     }},
    {"exhaustion",
     {
       {"radii", [](Scenario &s, const std::string &v, int l) { s.exhaustion_radii = to_doubles(v, "radii", l); }},
     }},
    {"checks",
     {
       {"run", [](Scenario &s, const std::string &v, int) { s.checks = split_list(v); }},
     }},
    {"output",
     {
       {"directory", [](Scenario &s, const std::string &v, int) { s.output_dir = v; }},
     }},
  };
  return table;
}

}  // namespace

CoefficientField Scenario::make_field() const
{
  if (coefficient_kind == "constant")
    return dim == 1 ? make_constant(value) : make_constant(2, SymMat2{matrix[0], matrix[1], matrix[2]});
  if (coefficient_kind == "c_delta")
    return make_c_delta(delta);
  if (coefficient_kind == "c_delta_2d_interval")
    return make_c_delta_2d(delta, interval_halfwidth);
  if (coefficient_kind == "tabulated")
    return make_tabulated(table_x, table_c);
  throw ConfigError("unknown coefficient kind '" + coefficient_kind + "'");
}

std::optional<Potential> Scenario::make_potential() const
{
  if (potential_kind == "constant")
    return make_constant_potential(potential_value);
  if (potential_kind == "quadratic")
    return make_quadratic_potential(potential_value);
  return std::nullopt;
}

Scenario parse_scenario(std::istream &in, const std::filesystem::path &source)
{
  Scenario s;
  s.source = source;
  const auto &table = schema();
  std::string section;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty())
      continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError("malformed section header '" + text + "'", line);
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty() || !table.count(section))
        throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + text + "'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto &keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end())
      throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), line);
    if (!seen.insert(section + "." + key).second)
      throw ConfigError("duplicate key '" + key + "'", line);
    if (value.empty())
      throw ConfigError("key '" + key + "' has no value", line);
    it->second(s, value, line);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open scenario file '" + path.string() + "'");
  Scenario s = parse_scenario(in, path);
  if (s.name.empty())
    s.name = path.stem().string();
  return s;
}

namespace {

void check_region(const Scenario &s, const RegionSpec &r, const char *name)
{
  auto axis = [&](const std::array<double, 2> &range, const std::array<double, 2> &bounds, const char *ax) {
    const double width = bounds[1] - bounds[0];
    const double margin = 0.1 * width;
    if (!(range[0] <= range[1]))
      throw ConfigError(std::string("region ") + name + ": " + ax + " range is reversed", r.line);
    if (range[0] < bounds[0] + margin || range[1] > bounds[1] - margin)
      throw ConfigError(std::string("region ") + name + " must stay at least 10% of the box width (" +
                          std::to_string(margin) + ") inside the grid along " + ax,
                        r.line);
  };
  if (r.line == 0)
    throw ConfigError(std::string("region ") + name + " is not defined");
  axis(r.x, s.x_bounds, "x");
  if (s.dim == 2)
    axis(r.y, s.y_bounds, "y");
}

}  // namespace

void validate(const Scenario &s)
{
  if (s.dim != 1 && s.dim != 2)
    throw ConfigError("grid dim must be 1 or 2");
  if (!(s.x_bounds[0] < s.x_bounds[1]) || (s.dim == 2 && !(s.y_bounds[0] < s.y_bounds[1])))
    throw ConfigError("grid bounds must satisfy min < max");
  if (s.n_cells[0] < 2 || (s.dim == 2 && s.n_cells[1] < 2))
    throw ConfigError("grid needs at least 2 cells per axis");
  if (s.coefficient_kind.empty())
    throw ConfigError("coefficient kind is not set");
  if (s.coefficient_kind == "c_delta" && s.dim != 1)
    throw ConfigError("coefficient c_delta is one-dimensional");
  if (s.coefficient_kind == "c_delta_2d_interval" && s.dim != 2)
    throw ConfigError("coefficient c_delta_2d_interval is two-dimensional");
  if ((s.coefficient_kind == "c_delta" || s.coefficient_kind == "c_delta_2d_interval") &&
      !(s.delta >= 0.0 && s.delta < 1.0))
    throw ConfigError("delta must lie in [0, 1)");
  if (s.coefficient_kind == "c_delta_2d_interval" && !(s.interval_halfwidth > 0.0))
    throw ConfigError("interval_halfwidth must be positive");
  try {
    (void)s.make_field();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    throw ConfigError(std::string("coefficient: ") + e.what());
  }
  check_region(s, s.a, "a");
  check_region(s, s.b, "b");
  if (!(s.t_min > 0.0) || !(s.t_min < s.t_max))
    throw ConfigError("time range must satisfy 0 < t_min < t_max");
  if (s.t_count < 2)
    throw ConfigError("time count must be at least 2");
  const auto &known = list_checks();
  for (const auto &c : s.checks) {
    if (std::none_of(known.begin(), known.end(), [&](const CheckInfo &k) { return k.name == c; }))
      throw ConfigError("unknown check '" + c + "'");
  }
  auto wants = [&](const char *c) { return std::find(s.checks.begin(), s.checks.end(), c) != s.checks.end(); };
  if (s.checks.empty())
    throw ConfigError("no checks requested");
  if (wants("varadhan") && s.t_count < 5)
    throw ConfigError("varadhan needs a time count of at least 5");
  if (wants("localization") && !(s.plateau_radius > 0.0 && s.ramp_width > 0.0))
    throw ConfigError("localization needs positive plateau_radius and ramp_width");
  if (wants("localization") && !(s.localization_fraction > 0.0))
    throw ConfigError("localization t_fraction must be positive");
  if (wants("trotter") && s.potential_kind == "none")
    throw ConfigError("trotter needs a potential");
  if (s.potential_kind != "none" && !(s.potential_value >= 0.0))
    throw ConfigError("potential value must be nonnegative");
  if (wants("resistance") && !s.has_resistance_points)
    throw ConfigError("resistance needs [resistance] from and to");
  if (wants("exhaustion") && s.exhaustion_radii.empty())
    throw ConfigError("exhaustion needs [exhaustion] radii");
  if (wants("subordination") && s.quad_points < 8)
    throw ConfigError("subordination needs at least 8 quadrature points");
  for (std::size_t i = 0; i < s.epsilons.size(); ++i)
    if (!(s.epsilons[i] > 0.0) || (i > 0 && !(s.epsilons[i] < s.epsilons[i - 1])))
      throw ConfigError("epsilon values must be positive and descending");
  for (std::size_t i = 0; i < s.refinement_cells.size(); ++i)
    if (s.refinement_cells[i] < 2 || (i > 0 && s.refinement_cells[i] <= s.refinement_cells[i - 1]))
      throw ConfigError("refinement n_cells must be ascending and at least 2");
}

}  // namespace difflab
