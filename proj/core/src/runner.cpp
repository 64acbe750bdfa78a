#include "difflab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "difflab/asymptotics.hpp"
#include "difflab/csv.hpp"
#include "difflab/error.hpp"

namespace difflab {

const std::vector<CheckInfo> &list_checks()
{
  static const std::vector<CheckInfo> checks = {
    {"varadhan", "fit -4t log(1_A, S_t 1_B) against t and compare the intercept with the eikonal distance",
     "t log (1_A, S_t 1_B) -> -d(A;B)^2 / 4 as t -> 0"},
    {"davies_gaffney", "compare every trace value with the Gaussian off-diagonal bound",
     "(1_A, S_t 1_B) <= exp(-d(A;B)^2 / 4t) |A|^{1/2} |B|^{1/2}"},
    {"propagation", "measure the wave mass of cos(t H^{1/2}) 1_A outside the sqrt(lambda) t neighbourhood",
     "cos(t H^{1/2}) maps L2(A) into L2 of the sqrt(lambda)|t| neighbourhood of A"},
    {"subordination", "compare S_t 1_A with the Gaussian average of the cosine family",
     "S_t = (pi t)^{-1/2} int_0^inf exp(-s^2 / 4t) cos(s H^{1/2}) ds"},
    {"localization", "compare the cosine families of the form and its truncation inside the light cone",
     "cos(t H^{1/2}) = cos(t H_Phi^{1/2}) on L2(A) while sqrt(lambda)|t| <= d(A; complement of {Phi = 1})"},
    {"trotter", "check the potential sandwich on the trace and compare the two Varadhan fits",
     "S^h_t exp(-t sup V) <= S^{h+v}_t <= S^h_t, and the small-time asymptotics do not depend on v"},
    {"resistance", "effective resistance between two points, with its refinement exponent when requested",
     "the process splits when the resistance through the degeneracy diverges"},
    {"exhaustion", "distances from B to A restricted to growing sets around B",
     "d(A cap X_n; B) decreases to d(A;B) along an exhaustion"},
  };
  return checks;
}

void print_checks(std::ostream &out)
{
  for (const auto &c : list_checks())
    out << c.name << "\t" << c.description << "\n    verifies: " << c.claim << '\n';
}

void print_checks_json(std::ostream &out)
{
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &c : list_checks())
    arr.push_back({{"name", c.name}, {"description", c.description}, {"claim", c.claim}});
  out << arr.dump(2) << '\n';
}

namespace {

struct DistanceRow
{
  std::string method;
  double value;
  double max_gamma;
  double wall_time;
};

struct SweepRow
{
  std::string axis;
  double parameter;
  double fitted;
  double confidence;
  std::string verdict;
};

class Run
{
public:
  Run(const Scenario &s, const RunOptions &opts) : s_(s), opts_(opts)
  {
    if (s.dim == 1)
      grid_ = std::make_shared<const Grid>(Grid::line(s.x_bounds[0], s.x_bounds[1], s.n_cells[0]));
    else
      grid_ = std::make_shared<const Grid>(Grid::rectangle(s.x_bounds, s.y_bounds, s.n_cells));
    form_.emplace(assemble(s.make_field(), grid_));
    if (s.remove_obstacle_edges && s.coefficient_kind == "c_delta_2d_interval")
      form_.emplace(remove_edges_meeting_segment(*form_, {-s.interval_halfwidth, 0.0}, {s.interval_halfwidth, 0.0}));
    a_.emplace(region(s.a, "A"));
    b_.emplace(region(s.b, "B"));
    times_ = log_spaced(s.t_min, s.t_max, static_cast<std::size_t>(s.t_count));
  }

  CheckOutcome run(const std::string &name)
  {
    if (name == "varadhan")
      return varadhan();
    if (name == "davies_gaffney")
      return davies_gaffney();
    if (name == "propagation")
      return propagation();
    if (name == "subordination")
      return subordination();
    if (name == "localization")
      return localization();
    if (name == "trotter")
      return trotter();
    if (name == "resistance")
      return resistance();
    return exhaustion();
  }

  std::vector<TracePoint> trace_rows;
  std::string trace_solver;
  std::vector<DistanceRow> distance_rows;
  std::vector<SweepRow> sweep_rows;

private:
  RegionSet region(const RegionSpec &r, const char *name) const
  {
    RegionSet set = s_.dim == 1 ? RegionSet::interval(*grid_, r.x[0], r.x[1]) : RegionSet::box(*grid_, r.x, r.y);
    if (set.empty())
      throw ConfigError(std::string("region ") + name + " contains no grid nodes", r.line);
    return set;
  }

  template <class F>
  auto timed(F &&f, double &seconds)
  {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    seconds = opts_.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
    return r;
  }

  const DistanceReport &eikonal()
  {
    if (!eikonal_) {
      double secs = 0.0;
      eikonal_ = timed([&] { return set_distance(*form_, *a_, *b_); }, secs);
      distance_rows.push_back({"eikonal", eikonal_->value, std::nan(""), secs});
      if (std::isfinite(eikonal_->value)) {
        const auto cert = timed(
          [&] {
            const auto psi = certificate_from_eikonal(*form_, *b_, 2.0 * eikonal_->value + 1.0);
            return verify_certificate(*form_, psi, *a_, *b_, default_certificate_tolerance(*form_));
          },
          secs);
        distance_rows.push_back({"variational", cert.value, cert.max_gamma, secs});
      }
    }
    return *eikonal_;
  }

  const SemigroupTrace &trace()
  {
    if (!trace_) {
      trace_ = trace_inner_products(*form_, *a_, *b_, times_);
      trace_rows = trace_->points;
      trace_solver = to_string(trace_->solver);
    }
    return *trace_;
  }

  std::optional<FitWindow> window(const SemigroupTrace &tr, std::string &note)
  {
    if (!s_.auto_window)
      return std::nullopt;
    FitWindow w = default_fit_window(*form_, *a_, *b_);
    w.t_min = std::max(w.t_min, s_.t_min);
    w.t_max = std::min(w.t_max, s_.t_max);
    const auto inside = std::count_if(tr.points.begin(), tr.points.end(), [&](const TracePoint &p) {
      return p.t >= w.t_min * (1 - 1e-12) && p.t <= w.t_max * (1 + 1e-12);
    });
    if (w.t_max <= w.t_min || inside < 5) {
      note = " (automatic window held fewer than 5 points; fitted the full range)";
      return std::nullopt;
    }
    return w;
  }

  static std::string num(double v) { return format_number(v); }

  const SweepResult &refinement()
  {
    if (!refinement_) {
      RefinementProblem p{s_.make_field()};
      p.dim = s_.dim;
      p.x_bounds = s_.x_bounds;
      p.y_bounds = s_.y_bounds;
      p.a_x = s_.a.x;
      p.a_y = s_.a.y;
      p.b_x = s_.b.x;
      p.b_y = s_.b.y;
      if (s_.has_resistance_points) {
        p.resistance_from = s_.resistance_from;
        p.resistance_to = s_.resistance_to;
      } else {
        p.resistance_from = {0.5 * (s_.a.x[0] + s_.a.x[1]), 0.5 * (s_.a.y[0] + s_.a.y[1])};
        p.resistance_to = {0.5 * (s_.b.x[0] + s_.b.x[1]), 0.5 * (s_.b.y[0] + s_.b.y[1])};
      }
      p.threads = std::max(1, opts_.threads);
      refinement_ = refinement_sweep(p, s_.refinement_cells);
      for (const auto &pt : refinement_->points)
        sweep_rows.push_back({"dx", pt.parameter, pt.fitted_d_squared, pt.confidence, to_string(refinement_->verdict)});
    }
    return *refinement_;
  }

  CheckOutcome varadhan()
  {
    CheckOutcome out{"varadhan", true, {}};
    const auto &tr = trace();
    std::string note;
    const auto w = window(tr, note);
    const VaradhanFit fit = fit_varadhan(tr, w);
    const double d = eikonal().value;
    distance_rows.push_back({"decay-fit", std::sqrt(fit.fitted_d_squared), std::nan(""), 0.0});
    const double expected = d * d;
    const double gap = std::abs(fit.fitted_d_squared - expected);
    out.passed = fit.status == FitStatus::Ok && gap <= s_.varadhan_tolerance * expected;
    std::ostringstream msg;
    msg << "fitted_d_squared=" << num(fit.fitted_d_squared) << " confidence=" << num(fit.confidence)
        << " expected=" << num(expected) << " (eikonal d^2) relative_gap=" << num(gap / expected)
        << " tolerance=" << num(s_.varadhan_tolerance) << " window=[" << num(fit.window.t_min) << ", "
        << num(fit.window.t_max) << "] points=" << fit.points_used << " status=" << to_string(fit.status) << note;
    if (!s_.epsilons.empty()) {
      const auto sweep = epsilon_sweep(*form_, *a_, *b_, s_.epsilons, {});
      for (const auto &pt : sweep.points)
        sweep_rows.push_back({"epsilon", pt.parameter, pt.fitted_d_squared, pt.confidence, to_string(sweep.verdict)});
      msg << "; epsilon sweep verdict=" << to_string(sweep.verdict);
    }
    if (!s_.refinement_cells.empty()) {
      const auto &sweep = refinement();
      msg << "; refinement verdict=" << to_string(sweep.verdict);
      for (const auto &pt : sweep.points)
        msg << " [dx=" << num(pt.parameter) << " fit=" << num(pt.fitted_d_squared)
            << " eikonal=" << num(pt.eikonal_d_squared) << "]";
      if (!s_.refinement_expect.empty()) {
        msg << " expected=" << s_.refinement_expect;
        if (s_.refinement_expect != to_string(sweep.verdict))
          out.passed = false;
      }
    }
    out.detail = msg.str();
    return out;
  }

  CheckOutcome davies_gaffney()
  {
    const auto &tr = trace();
    const double d = eikonal().value;
    const auto r = davies_gaffney_check(tr, d, a_->measure(), b_->measure());
    std::ostringstream msg;
    msg << "d=" << num(d) << " points=" << tr.points.size() << " worst value-bound excess=" << num(r.worst_excess)
        << " (must be <= 0 after 1e-8 slack)";
    return {"davies_gaffney", r.holds, msg.str()};
  }

  CheckOutcome propagation()
  {
    const double speed = std::sqrt(form_->lambda_bound());
    const double t_max = s_.propagation_t_max > 0.0 ? s_.propagation_t_max : 4.0 * grid_->max_spacing() / speed;
    std::vector<double> ts;
    for (int i = 1; i <= s_.propagation_count; ++i)
      ts.push_back(t_max * i / s_.propagation_count);
    const double worst = finite_propagation_check(*form_, *a_, ts);
    std::ostringstream msg;
    msg << "relative mass beyond sqrt(lambda) t + 3 dx=" << num(worst) << " expected<=1e-8 t_max=" << num(t_max);
    return {"propagation", worst <= 1e-8, msg.str()};
  }

  CheckOutcome subordination()
  {
    const double t = s_.subordination_t > 0.0 ? s_.subordination_t : s_.t_min;
    const auto phi = a_->indicator();
    const double err = check_subordination(*form_, t, phi, s_.quad_points);
    std::ostringstream msg;
    msg << "relative discrepancy=" << num(err) << " expected<=1e-6 t=" << num(t) << " quad_points=" << s_.quad_points;
    return {"subordination", err <= 1e-6, msg.str()};
  }

  CheckOutcome localization()
  {
    const auto cutoff = CutoffFunction::around(*grid_, *a_, s_.plateau_radius, s_.ramp_width);
    const RegionSet outside = cutoff.plateau().complement(*grid_);
    const double margin = outside.empty() ? INFINITY : set_distance(*form_, *a_, outside).value;
    const double bound = margin / std::sqrt(form_->lambda_bound());
    const double t_max = s_.localization_fraction * bound;
    const auto r = localization_check(*form_, *a_, cutoff, t_max, 0x5EED, false);
    const bool inside = s_.localization_fraction <= 1.0;
    std::ostringstream msg;
    msg << "discrepancy=" << num(r.discrepancy) << (inside ? " expected<=1e-8" : " expected>1e-3 (beyond the bound)")
        << " t_max=" << num(t_max) << " bound=" << num(bound);
    return {"localization", inside ? r.discrepancy <= 1e-8 : r.discrepancy > 1e-3, msg.str()};
  }

  CheckOutcome trotter()
  {
    const auto v = s_.make_potential();
    std::string note;
    const auto w = window(trace(), note);
    const auto r = trotter_sandwich_check(*form_, *v, *a_, *b_, times_, w);
    std::ostringstream msg;
    msg << "sandwich=" << (r.sandwich_holds ? "holds" : "violated") << " worst_upper=" << num(r.worst_upper)
        << " worst_lower=" << num(r.worst_lower) << " fitted_d_squared(h)=" << num(r.fit_h.fitted_d_squared)
        << " fitted_d_squared(h+v)=" << num(r.fit_hv.fitted_d_squared) << " relative_gap=" << num(r.relative_gap)
        << " expected<=0.03" << note;
    return {"trotter", r.sandwich_holds && r.fits_agree, msg.str()};
  }

  CheckOutcome resistance()
  {
    const NodeIndex from = grid_->nearest_node(s_.resistance_from), to = grid_->nearest_node(s_.resistance_to);
    if (from == to)
      return {"resistance", false, "resistance endpoints map to the same node"};
    const double r = effective_resistance(*form_, from, to);
    CheckOutcome out{"resistance", std::isfinite(r) && r > 0.0, {}};
    std::ostringstream msg;
    msg << "R=" << num(r);
    if (!s_.refinement_cells.empty()) {
      const auto &sweep = refinement();
      std::vector<double> rs, dx;
      for (const auto &pt : sweep.points) {
        rs.push_back(pt.resistance);
        dx.push_back(pt.parameter);
        msg << " [dx=" << num(pt.parameter) << " R=" << num(pt.resistance) << "]";
      }
      double rate = 0.0;
      const Verdict v = classify(rs, &rate, dx);
      msg << " exponent=" << num(rate) << " verdict=" << to_string(v);
      if (s_.resistance_expect_exponent) {
        const double e = *s_.resistance_expect_exponent;
        msg << " expected_exponent=" << num(e) << " (within 10%)";
        if (!(std::abs(rate - e) <= 0.1 * std::abs(e)))
          out.passed = false;
      }
    }
    out.detail = msg.str();
    return out;
  }

  CheckOutcome exhaustion()
  {
    std::vector<RegionSet> sets;
    for (double r : s_.exhaustion_radii) {
      std::vector<NodeIndex> nodes;
      for (std::size_t n = 0; n < grid_->node_count(); ++n)
        if (b_->box_distance(grid_->position(static_cast<NodeIndex>(n))) <= r)
          nodes.push_back(static_cast<NodeIndex>(n));
      sets.push_back(RegionSet::from_nodes(*grid_, std::move(nodes), "X"));
    }
    const auto reports = exhaustion_distance(*form_, *a_, *b_, sets);
    const double d = eikonal().value;
    bool ok = true;
    std::ostringstream msg;
    msg << "sequence=";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      msg << (i ? "," : "") << num(reports[i].value);
      if (i > 0 && reports[i].value > reports[i - 1].value)
        ok = false;
    }
    if (!sets.empty() && a_->subset_of(sets.back())) {
      msg << " final expected=" << num(d);
      if (!(std::abs(reports.back().value - d) <= 1e-12 * std::max(1.0, d)))
        ok = false;
    }
    msg << (ok ? " nonincreasing" : " NOT nonincreasing or wrong limit");
    return {"exhaustion", ok, msg.str()};
  }

  const Scenario &s_;
  const RunOptions &opts_;
  std::shared_ptr<const Grid> grid_;
  std::optional<DiscreteForm> form_;
  std::optional<RegionSet> a_, b_;
  std::vector<double> times_;
  std::optional<DistanceReport> eikonal_;
  std::optional<SemigroupTrace> trace_;
  std::optional<SweepResult> refinement_;
};

void write_outputs(const std::filesystem::path &dir, const Run *run, const std::string &report)
{
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "trace.csv");
    CsvWriter w(f, {"t", "value", "log_value", "error_bound", "solver"});
    if (run)
      for (const auto &p : run->trace_rows)
        w.field(p.t).field(p.value).field(p.log_value).field(p.error_bound).field(run->trace_solver), w.end_row();
  }
  {
    std::ofstream f(dir / "distances.csv");
    CsvWriter w(f, {"method", "value", "certificate_max_gamma", "wall_time"});
    if (run)
      for (const auto &r : run->distance_rows)
        w.field(r.method).field(r.value).field(r.max_gamma).field(r.wall_time), w.end_row();
  }
  {
    std::ofstream f(dir / "sweep.csv");
    CsvWriter w(f, {"axis", "parameter", "fitted_d_squared", "confidence", "verdict"});
    if (run)
      for (const auto &r : run->sweep_rows)
        w.field(r.axis).field(r.parameter).field(r.fitted).field(r.confidence).field(r.verdict), w.end_row();
  }
  std::ofstream(dir / "report.txt") << report;
}

}  // namespace

RunResult run_scenario(const Scenario &scenario, const RunOptions &opts)
{
  validate(scenario);
  RunResult result;
  result.out_dir = !opts.out_dir.empty()              ? opts.out_dir
                   : !scenario.output_dir.empty()     ? scenario.output_dir
                                                      : std::filesystem::path(scenario.name + "_output");
  std::ostringstream report;
  report << "scenario: " << scenario.name << '\n';
  report << "grid: dim=" << scenario.dim << " cells=" << scenario.n_cells[0];
  if (scenario.dim == 2)
    report << "x" << scenario.n_cells[1];
  report << " coefficient=" << scenario.coefficient_kind << '\n';
  std::optional<Run> run;
  try {
    run.emplace(scenario, opts);
    for (const auto &name : scenario.checks) {
      CheckOutcome c = run->run(name);
      report << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
      if (!c.passed)
        result.exit_code = kExitCheckFailed;
      result.checks.push_back(std::move(c));
    }
    report << "result: " << (result.exit_code == kExitPass ? "PASS" : "FAIL") << '\n';
  } catch (const SolverError &e) {
    report << "ABORTED: solver failure: " << e.what() << "\nresult: PARTIAL (outputs incomplete)\n";
    result.exit_code = kExitSolverFailure;
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  } catch (const std::out_of_range &e) {
    throw ConfigError(e.what());
  }
  result.report = report.str();
  write_outputs(result.out_dir, run ? &*run : nullptr, result.report);
  return result;
}

int run_scenario_file(const std::filesystem::path &path, const RunOptions &opts, std::ostream &out,
                      std::ostream &err)
{
  try {
    const Scenario s = load_scenario(path);
    const RunResult r = run_scenario(s, opts);
    out << r.report;
    out << "outputs: " << r.out_dir.string() << '\n';
    return r.exit_code;
  } catch (const ConfigError &e) {
    err << path.string() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError &e) {
    err << path.string() << ": solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

}  // namespace difflab
