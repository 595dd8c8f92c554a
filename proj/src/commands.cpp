#include "frontlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + out_dir + "': " + ec.message());
  return dir;
}

json meta_json(const RunMeta& meta) {
  json stats = json::array();
  for (const auto& s : meta.stats) {
    stats.push_back({{"time", s.time}, {"mass", s.mass}, {"min", s.min}, {"max", s.max}});
  }
  return {{"dt", meta.dt},
          {"dt_max", meta.dt_max},
          {"steps", meta.steps},
          {"max_clamp", meta.max_clamp},
          {"stencil_half_width", meta.half_width},
          {"boundary_margin", meta.boundary_margin},
          {"warnings", meta.warnings},
          {"snapshots", stats}};
}

json estimate_json(const SpeedEstimate& e) {
  return {{"component", e.component + 1},
          {"side", to_string(e.side)},
          {"theta", e.theta},
          {"speed", e.speed},
          {"intercept", e.intercept},
          {"rms_residual", e.rms_residual},
          {"window", {e.t_lo, e.t_hi}},
          {"points", e.points}};
}

json residual_json(const ResidualReport& r, double tol, bool lower_profile) {
  return {{"min", r.min},
          {"max", r.max},
          {"tolerance", tol},
          {"nodes_checked", r.nodes_checked},
          {"nodes_excluded", r.nodes_excluded},
          {"passed", lower_profile ? r.max <= tol : r.min >= -tol}};
}

std::string fronts_csv(const std::vector<FrontTrace>& traces) {
  std::ostringstream out;
  out << "t,side,component,theta,position\n";
  for (const auto& tr : traces) {
    for (const auto& p : tr.points) {
      out << num(p.time) << ',' << to_string(tr.side) << ',' << tr.component + 1 << ','
          << num(tr.theta) << ',' << num(p.position) << '\n';
    }
  }
  return out.str();
}

void write_snapshots(const fs::path& dir, const SimulationOutput& sim, bool binary, const json& config) {
  const std::size_t n = sim.grid.n;
  const std::size_t m = sim.snapshots.empty() ? 0 : sim.snapshots.front().components.size();
  std::vector<double> times;
  for (const auto& s : sim.snapshots) times.push_back(s.time);
  json header{{"n", n}, {"dx", sim.grid.dx}, {"m", m}, {"times", times},
              {"half_extent", sim.grid.half_extent}, {"config", config}};
  if (binary) {
    std::ofstream out(dir / "snapshots.bin", std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write snapshots.bin");
    // Column-major (n, m, snapshots): node index varies fastest.
    for (const auto& s : sim.snapshots) {
      for (const auto& u : s.components) {
        out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
      }
    }
    header["layout"] = "float64, column-major (n, m, times)";
    header["file"] = "snapshots.bin";
  } else {
    fs::create_directories(dir / "snapshots");
    json files = json::array();
    for (std::size_t k = 0; k < sim.snapshots.size(); ++k) {
      char name[48];
      std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
      std::ostringstream out;
      out << 'x';
      for (std::size_t j = 0; j < m; ++j) out << ",u_" << j + 1;
      out << '\n';
      for (std::size_t i = 0; i < n; ++i) {
        out << num(sim.grid.x(i));
        for (std::size_t j = 0; j < m; ++j) out << ',' << num(sim.snapshots[k].components[j][i]);
        out << '\n';
      }
      write_text(dir / "snapshots" / name, out.str());
      files.push_back(std::string("snapshots/") + name);
    }
    header["files"] = files;
  }
  write_json(dir / "snapshots.json", header);
}

double predicted_speed(const ReactionModel& model, const Dispersal& dispersal,
                       const DispersionCurve& curve, double lambda0) {
  if (lambda0 >= curve.lambda_star) return curve.c_star;
  return wave_speed(model, dispersal, lambda0).speed;
}

// Config values override the defaults; M is refitted when q0 or delta0 changed.
A3Params resolve_A3(const ExperimentConfig& config, const ReactionModel& model) {
  A3Params a3;
  a3.q0 = config.q0.value_or(0.5 * *std::min_element(model.equilibrium().begin(), model.equilibrium().end()));
  a3.delta0 = config.delta0.value_or(1.0);
  a3.M = config.M ? *config.M : fit_A3_constant(model, a3.q0, a3.delta0, config.samples, config.seed);
  return a3;
}

const FieldState& snapshot_near(const SimulationOutput& sim, double t) {
  const FieldState* best = &sim.snapshots.front();
  for (const auto& s : sim.snapshots) {
    if (std::abs(s.time - t) < std::abs(best->time - t)) best = &s;
  }
  return *best;
}

}  // namespace

Command command_from_string(const std::string& name) {
  if (name == "dispersion") return Command::Dispersion;
  if (name == "simulate") return Command::Simulate;
  if (name == "verify-theorem") return Command::VerifyTheorem;
  if (name == "check-assumptions") return Command::CheckAssumptions;
  if (name == "bounds-check") return Command::BoundsCheck;
  if (name == "sweep") return Command::Sweep;
  throw Error(ErrorKind::InvalidParam, "unknown command '" + name + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::Dispersion: return "dispersion";
    case Command::Simulate: return "simulate";
    case Command::VerifyTheorem: return "verify-theorem";
    case Command::CheckAssumptions: return "check-assumptions";
    case Command::BoundsCheck: return "bounds-check";
    case Command::Sweep: return "sweep";
  }
  return "unknown";
}

json to_json(const UniformSpeedVerdict& v) {
  json estimates = json::array();
  for (const auto& e : v.per_component) estimates.push_back(estimate_json(e));
  return {{"predicted", v.predicted},
          {"estimates", estimates},
          {"uniform", v.uniform},
          {"rtol", v.rtol},
          {"deviations",
           {{"max_pairwise_rel_dev", v.max_pairwise_rel_dev},
            {"max_rel_dev_from_predicted", v.max_rel_dev_from_predicted}}}};
}

json to_json(const AssumptionReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.witnesses) {
    witnesses.push_back({{"point", w.point}, {"magnitude", w.magnitude}, {"detail", w.detail}});
  }
  json j{{"assumption", to_string(r.assumption)},
         {"passed", r.passed},
         {"witnesses", witnesses},
         {"note", r.note}};
  if (r.params_used) {
    j["params_used"] = {{"q0", r.params_used->q0}, {"delta0", r.params_used->delta0}, {"M", r.params_used->M}};
  }
  return j;
}

json to_json(const SandwichReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"time", v.time},
                          {"x", v.x},
                          {"component", v.component + 1},
                          {"bound", v.bound},
                          {"excess", v.excess}});
  }
  return {{"passed", r.passed()},
          {"snapshots_checked", r.snapshots_checked},
          {"nodes_checked", r.nodes_checked},
          {"violation_count", r.violation_count},
          {"slack", r.slack},
          {"kink_slack", r.kink_slack},
          {"worst_lower_gap", r.worst_lower_gap},
          {"worst_upper_gap", r.worst_upper_gap},
          {"violations", violations}};
}

VerifyResult verify_theorem(const ExperimentConfig& config) {
  const ReactionModel model = config.make_model();
  const Dispersal dispersal = config.make_dispersal();
  const DispersionCurve curve = minimize_speed(model, dispersal, config.search);

  VerifyResult result;
  result.lambda_star = curve.lambda_star;
  result.c_star = curve.c_star;
  result.lambda0 = config.smallest_rate().value_or(curve.lambda_star);
  const double predicted = predicted_speed(model, dispersal, curve, result.lambda0);

  result.sim = run(model, dispersal, config.run_settings(), config.initial);
  std::vector<SpeedEstimate> estimates;
  for (const auto& trace : result.sim.traces) {
    estimates.push_back(config.fit_t_lo ? estimate_speed(trace, *config.fit_t_lo, *config.fit_t_hi)
                                        : estimate_speed(trace, config.window_fraction));
  }
  result.verdict = uniform_speed_verdict(estimates, predicted, config.rtol);
  return result;
}

SweepResult sweep(const ExperimentConfig& config, std::size_t jobs) {
  if (config.sweep_lambdas.empty()) {
    throw Error(ErrorKind::ValidationError, "[sweep] lambda0: the sweep needs at least one rate");
  }
  std::vector<double> lambdas = config.sweep_lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  auto one = [&config](double lambda0) {
    const VerifyResult r = verify_theorem(config.with_smallest_rate(lambda0));
    SweepRow row;
    row.lambda0 = lambda0;
    row.predicted = r.verdict.predicted;
    row.uniform = r.verdict.uniform;
    const std::size_t m = config.components;
    std::vector<double> sums(m, 0.0);
    std::vector<int> counts(m, 0);
    double total = 0.0;
    for (const auto& e : r.verdict.per_component) {
      sums[e.component] += std::abs(e.speed);
      ++counts[e.component];
      total += std::abs(e.speed);
    }
    for (std::size_t j = 0; j < m; ++j) row.component_speeds.push_back(counts[j] ? sums[j] / counts[j] : 0.0);
    row.measured = total / static_cast<double>(r.verdict.per_component.size());
    return row;
  };

  SweepResult result;
  result.rows.resize(lambdas.size());
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < lambdas.size(); start += jobs) {
    const std::size_t stop = std::min(lambdas.size(), start + jobs);
    std::vector<std::future<SweepRow>> futures;
    for (std::size_t k = start; k < stop; ++k) futures.push_back(std::async(std::launch::async, one, lambdas[k]));
    for (std::size_t k = start; k < stop; ++k) result.rows[k] = futures[k - start].get();
  }
  result.strictly_decreasing = true;
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    if (!(result.rows[k].measured < result.rows[k - 1].measured)) result.strictly_decreasing = false;
  }
  return result;
}

AssumptionsResult check_assumptions(const ExperimentConfig& config) {
  const ReactionModel model = config.make_model();
  const Dispersal dispersal = config.make_dispersal();
  AssumptionsResult result;
  result.reports = check_A1(model, config.samples, config.seed);

  double lambda_star = 0.0;
  try {
    lambda_star = minimize_speed(model, dispersal, config.search).lambda_star;
  } catch (const Error& e) {
    AssumptionReport a2;
    a2.assumption = Assumption::A2;
    a2.passed = false;
    a2.note = std::string("dispersion minimum unavailable: ") + e.what();
    result.reports.push_back(a2);
  }
  if (lambda_star > 0.0) {
    result.reports.push_back(
        check_A2(model, dispersal, default_A2_lambda_grid(lambda_star), default_A2_q_grid()));
  }

  try {
    result.reports.push_back(check_A3(model, resolve_A3(config, model), config.samples, config.seed));
  } catch (const Error& e) {
    AssumptionReport a3;
    a3.assumption = Assumption::A3;
    a3.passed = false;
    a3.note = e.what();
    result.reports.push_back(a3);
  }

  result.passed = std::all_of(result.reports.begin(), result.reports.end(),
                              [](const AssumptionReport& r) { return r.passed; });
  return result;
}

BoundsResult bounds_check(const ExperimentConfig& config) {
  const ReactionModel model = config.make_model();
  const Dispersal dispersal = config.make_dispersal();
  const Grid grid = config.make_grid();
  const std::size_t m = model.size();
  const DispersionCurve curve = minimize_speed(model, dispersal, config.search);
  const double tol = residual_tolerance(model, grid.dx);
  const double tau = std::log(2.0);
  const double cascade_T = 1.0 + static_cast<double>(m - 1) * tau;
  const auto smallest = config.smallest_rate();

  RunSettings settings = config.run_settings();
  settings.extra_snapshot_times = {1.0, cascade_T};
  const SimulationOutput sim = run(model, dispersal, settings, config.initial);

  json report;
  report["residual_tolerance"] = tol;
  report["lambda_star"] = curve.lambda_star;
  report["run"] = meta_json(sim.meta);
  bool passed = true;

  const double lambda = config.bounds_lambda.value_or(smallest.value_or(curve.lambda_star));
  report["lambda"] = lambda;

  SandwichOptions sopts;
  sopts.slack = config.slack;
  if (config.kink_slack) sopts.kink_slack = *config.kink_slack;

  // Upper profile.
  std::optional<AnalyticProfile> upper;
  try {
    upper = build_upper(model, dispersal, lambda, config.initial, grid);
    const auto res = residual(*upper, model, dispersal, grid, config.residual_times, config.tail_tol);
    json u = residual_json(res, tol, false);
    u["Gamma"] = upper->amplitude;
    u["speed"] = upper->speed;
    report["upper"] = u;
    passed = passed && u["passed"].get<bool>();
  } catch (const Error& e) {
    report["upper"] = {{"skipped", std::string(to_string(e.kind())) + ": " + e.what()}};
  }

  // Two-exponential lower profile, started from the simulated state at t = 1.
  std::optional<AnalyticProfile> lower;
  if (lambda < curve.lambda_star) {
    const A3Params a3 = resolve_A3(config, model);
    const AssumptionReport a3_report = check_A3(model, a3, config.samples, config.seed);

    const WaveSpeed ws = wave_speed(model, dispersal, lambda);
    const FieldState& at_one = snapshot_near(sim, 1.0);
    const double gamma = lower_amplitude_from_state(at_one, grid, lambda, ws.vector, config.y0);
    lower = build_lower(model, dispersal, lambda, curve.lambda_star, gamma, config.y0, a3, 1.0);
    std::vector<double> times;
    for (double t : config.residual_times) times.push_back(t + lower->t_origin);
    const auto res = residual(*lower, model, dispersal, grid, times, config.tail_tol);
    json l = residual_json(res, tol, true);
    l["gamma"] = lower->amplitude;
    l["L"] = lower->L;
    l["delta"] = lower->delta;
    l["mu"] = lower->mu;
    l["y0"] = lower->y0;
    l["roots"] = lower->roots;
    l["peaks"] = lower->peaks;
    l["a3"] = {{"q0", a3.q0}, {"delta0", a3.delta0}, {"M", a3.M}, {"sampled_check_passed", a3_report.passed}};
    report["lower"] = l;
    passed = passed && l["passed"].get<bool>();
  } else {
    report["lower"] = {{"skipped", "lambda is not below lambda_star"}};
  }

  const SandwichReport analytic = sandwich_test(sim, model, lower ? &*lower : nullptr,
                                                upper ? &*upper : nullptr, sopts);
  report["sandwich"] = to_json(analytic);
  passed = passed && analytic.passed();

  // Staged cascade profile along the component order.
  if (smallest) {
    const ComponentOrder order = reorder_components(model.jacobian0(), config.decay_rates());
    const double q3 = find_cascade_q3(model, config.samples, config.seed);
    const FieldState& at_one = snapshot_near(sim, 1.0);
    const double c0 = cascade_seed(at_one, grid, order.permutation.front(), *smallest);
    const CascadeProfile cascade = build_cascade(model, order, *smallest, std::min(c0, q3), q3);

    std::vector<double> times;
    for (int k = 0; k <= 8; ++k) times.push_back(1.0 + cascade.T * k / 8.0);
    const auto res = residual(cascade, model, dispersal, grid, times, config.tail_tol);
    json c = residual_json(res, tol, true);

    double floor_gap = std::numeric_limits<double>::infinity();
    double solution_gap = std::numeric_limits<double>::infinity();
    const FieldState& at_T = snapshot_near(sim, cascade.T);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double floor = cascade.M0 * cascade.p(grid.x(i));
        floor_gap = std::min(floor_gap, cascade.value(j, cascade.T, grid.x(i)) - floor * (1.0 - 1e-12));
        solution_gap = std::min(solution_gap, at_T.components[j][i] - floor);
      }
    }
    const SandwichReport cs = sandwich_test(sim, model, &cascade, nullptr, sopts);
    std::vector<std::size_t> order1;
    for (std::size_t k = 0; k < m; ++k) order1.push_back(order.permutation[k] + 1);
    c["order"] = order1;
    c["alpha"] = cascade.alpha;
    c["betas"] = cascade.betas;
    c["amplitudes"] = cascade.amps;
    c["origins"] = cascade.origins;
    c["q3"] = q3;
    c["seed_C0"] = c0;
    c["halvings"] = cascade.halvings;
    c["T"] = cascade.T;
    c["M0"] = cascade.M0;
    c["floor_holds"] = floor_gap >= 0.0;
    c["solution_above_floor"] = solution_gap >= -sopts.slack;
    c["sandwich"] = to_json(cs);
    report["cascade"] = c;
    passed = passed && c["passed"].get<bool>() && floor_gap >= 0.0 && cs.passed();
  } else {
    report["cascade"] = {{"skipped", "initial data has no exponential decay rate"}};
  }

  report["passed"] = passed;
  return {report, passed};
}

int execute(Command command, const ExperimentConfig& config, const std::string& out_dir) {
  const fs::path dir = prepare_dir(out_dir);
  const json cfg = config.to_json();
  write_json(dir / "config.json", cfg);

  switch (command) {
    case Command::Dispersion: {
      const ReactionModel model = config.make_model();
      const Dispersal dispersal = config.make_dispersal();
      const DispersionCurve curve = minimize_speed(model, dispersal, config.search);
      std::ostringstream csv;
      csv << "lambda,gamma,c";
      for (std::size_t j = 0; j < model.size(); ++j) csv << ",v_" << j + 1;
      csv << '\n';
      for (const auto& s : curve.samples) {
        csv << num(s.lambda) << ',' << num(s.gamma) << ',' << num(s.speed);
        for (Eigen::Index j = 0; j < s.vector.size(); ++j) csv << ',' << num(s.vector(j));
        csv << '\n';
      }
      write_text(dir / "dispersion.csv", csv.str());
      json summary{{"lambda_star", curve.lambda_star},
                   {"c_star", curve.c_star},
                   {"bracket", {curve.bracket_lo, curve.bracket_hi}},
                   {"decreasing_below_star", curve.decreasing_below_star},
                   {"convex_below_star", curve.convex_below_star},
                   {"config", cfg}};
      if (const auto l0 = config.smallest_rate()) {
        summary["lambda0"] = *l0;
        summary["predicted_speed"] = predicted_speed(model, dispersal, curve, *l0);
      }
      write_json(dir / "dispersion_summary.json", summary);
      return kExitOk;
    }
    case Command::Simulate: {
      const SimulationOutput sim =
          run(config.make_model(), config.make_dispersal(), config.run_settings(), config.initial);
      write_snapshots(dir, sim, config.binary_snapshots, cfg);
      write_text(dir / "fronts.csv", fronts_csv(sim.traces));
      write_json(dir / "simulate.json", {{"run", meta_json(sim.meta)}, {"config", cfg}});
      return kExitOk;
    }
    case Command::VerifyTheorem: {
      const VerifyResult r = verify_theorem(config);
      json v = to_json(r.verdict);
      v["lambda0"] = r.lambda0;
      v["lambda_star"] = r.lambda_star;
      v["c_star"] = r.c_star;
      v["run"] = meta_json(r.sim.meta);
      v["config"] = cfg;
      write_json(dir / "verdict.json", v);
      write_text(dir / "fronts.csv", fronts_csv(r.sim.traces));
      return r.verdict.uniform ? kExitOk : kExitNegative;
    }
    case Command::CheckAssumptions: {
      const AssumptionsResult r = check_assumptions(config);
      json reports = json::array();
      for (const auto& rep : r.reports) reports.push_back(to_json(rep));
      write_json(dir / "assumptions.json", {{"passed", r.passed}, {"reports", reports}, {"config", cfg}});
      return r.passed ? kExitOk : kExitNegative;
    }
    case Command::BoundsCheck: {
      BoundsResult r = bounds_check(config);
      r.report["config"] = cfg;
      write_json(dir / "bounds.json", r.report);
      return r.passed ? kExitOk : kExitNegative;
    }
    case Command::Sweep: {
      const SweepResult r = sweep(config, config.jobs);
      std::ostringstream csv;
      csv << "lambda0,predicted,measured,uniform";
      for (std::size_t j = 0; j < config.components; ++j) csv << ",speed_" << j + 1;
      csv << '\n';
      json rows = json::array();
      for (const auto& row : r.rows) {
        csv << num(row.lambda0) << ',' << num(row.predicted) << ',' << num(row.measured) << ','
            << (row.uniform ? "true" : "false");
        for (double s : row.component_speeds) csv << ',' << num(s);
        csv << '\n';
        rows.push_back({{"lambda0", row.lambda0},
                        {"predicted", row.predicted},
                        {"measured", row.measured},
                        {"component_speeds", row.component_speeds},
                        {"uniform", row.uniform}});
      }
      write_text(dir / "sweep.csv", csv.str());
      write_json(dir / "sweep.json",
                 {{"rows", rows}, {"strictly_decreasing", r.strictly_decreasing}, {"config", cfg}});
      return r.strictly_decreasing ? kExitOk : kExitNegative;
    }
  }
  return kExitError;
}

void write_error(const std::string& out_dir, const std::string& kind, const std::string& message) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream out(fs::path(out_dir) / "error.json");
  if (out) out << json{{"error", kind}, {"message", message}}.dump(2) << '\n';
}

}  // namespace frontlab
