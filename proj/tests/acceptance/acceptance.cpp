// Acceptance runs: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "frontlab/bounds.hpp"
#include "frontlab/commands.hpp"
#include "frontlab/config.hpp"
#include "frontlab/error.hpp"
#include "frontlab/simulate.hpp"
#include "frontlab/spectral.hpp"
#include "json.hpp"

using namespace frontlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<double> clamps;  // max clamp of every simulation run here

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(const std::string& id, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("error ") + std::string(to_string(e.kind())) + ": " + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s  %s  [%.1f s]\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config(const std::string& name) {
  return load_config(std::string(FRONTLAB_CONFIG_DIR) + "/" + name + ".ini");
}

// Mean outward speed of one component over both sides.
double component_speed(const UniformSpeedVerdict& v, std::size_t component) {
  double sum = 0.0;
  int count = 0;
  for (const auto& e : v.per_component) {
    if (e.component != component) continue;
    sum += std::abs(e.speed);
    ++count;
  }
  return count ? sum / count : 0.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

VerifyResult verify(const ExperimentConfig& c) {
  VerifyResult r = verify_theorem(c);
  clamps.push_back(r.sim.meta.max_clamp);
  return r;
}

Kernel gaussian(double s) {
  const double p[] = {s};
  return make_kernel(KernelFamily::Gaussian, p);
}

}  // namespace

int main() {
  const double pred_a1 = 2.0 * std::exp(0.125);
  const double pred_a2 = std::exp(0.08) / 0.4;
  const double pred_a3 = std::exp(0.045) / 0.3;
  const double c_star = std::exp(0.5);
  double a2_component2 = 0.0;

  report("A1", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const VerifyResult r = verify(config("scalar_speed"));
    const double secs = seconds_since(t0);
    const double speed = component_speed(r.verdict, 0);
    const double err = rel(speed, pred_a1);
    const bool ok = std::abs(r.verdict.predicted - pred_a1) <= 1e-9 && err <= 0.03 && secs <= 120.0;
    return Outcome{ok, fmt("scalar speed %.5f vs %.5f, rel err %.4f (<= 0.03), %.1f s (<= 120)", speed, pred_a1,
                           err, secs)};
  });

  report("A2", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = fs::temp_directory_path() / "frontlab_acceptance_a2";
    fs::remove_all(out);
    const int code = execute(Command::VerifyTheorem, config("uniform_speed"), out.string());
    const double secs = seconds_since(t0);
    std::ifstream in(out / "verdict.json");
    const json v = json::parse(in);
    clamps.push_back(v["run"]["max_clamp"].get<double>());
    const double pair = v["deviations"]["max_pairwise_rel_dev"].get<double>();
    const double dev = v["deviations"]["max_rel_dev_from_predicted"].get<double>();
    double s1 = 0.0, s2 = 0.0;
    for (const auto& e : v["estimates"]) {
      (e["component"].get<int>() == 1 ? s1 : s2) += 0.5 * std::abs(e["speed"].get<double>());
    }
    a2_component2 = s2;
    const bool ok = code == kExitOk && std::abs(v["predicted"].get<double>() - pred_a2) <= 1e-9 && pair <= 0.02 &&
                    dev <= 0.04 && secs <= 240.0;
    return Outcome{ok, fmt("speeds %.5f, %.5f vs %.5f; pairwise %.4f (<= 0.02), vs predicted %.4f (<= 0.04), "
                           "exit %d, %.1f s (<= 240)",
                           s1, s2, pred_a2, pair, dev, code, secs)};
  });

  report("A3", [&] {
    const VerifyResult r = verify(config("accelerated"));
    const double s2 = component_speed(r.verdict, 1);
    const double gain = a2_component2 > 0.0 ? s2 / a2_component2 - 1.0 : 0.0;
    ExperimentConfig sc = config("uniform_speed");
    const std::size_t jobs = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 3);
    const SweepResult sw = sweep(sc, jobs);
    std::string speeds;
    for (const auto& row : sw.rows) speeds += fmt("%s%.2f:%.4f", speeds.empty() ? "" : ", ", row.lambda0, row.measured);
    const bool ok = std::abs(r.verdict.predicted - pred_a3) <= 1e-9 && gain >= 0.20 && sw.strictly_decreasing &&
                    sw.rows.size() == 3;
    return Outcome{ok, fmt("component 2 speed %.5f vs %.5f in A2, gain %.3f (>= 0.20); sweep %s %s", s2,
                           a2_component2, gain, speeds.c_str(),
                           sw.strictly_decreasing ? "strictly decreasing" : "NOT strictly decreasing")};
  });

  report("A4", [&] {
    const VerifyResult r = verify(config("single_seed"));
    const double s1 = component_speed(r.verdict, 0), s2 = component_speed(r.verdict, 1);
    const double dev = r.verdict.max_rel_dev_from_predicted;
    const bool ok = std::abs(r.verdict.predicted - pred_a2) <= 1e-9 && dev <= 0.04;
    return Outcome{ok, fmt("second component starts at zero; speeds %.5f, %.5f vs %.5f, dev %.4f (<= 0.04)", s1,
                           s2, pred_a2, dev)};
  });

  report("A5", [&] {
    const VerifyResult r = verify(config("compact_data"));
    const double speed = component_speed(r.verdict, 0);
    const double dev = rel(speed, c_star);
    const bool ok = std::abs(r.c_star - c_star) <= 1e-9 && std::abs(r.lambda_star - 1.0) <= 1e-6 && dev <= 0.04;
    return Outcome{ok, fmt("compact data speed %.5f vs c* %.5f, dev %.4f (<= 0.04), lambda* %.6f", speed, c_star,
                           dev, r.lambda_star)};
  });

  report("A6", [&] {
    const ReactionModel chain = builtin_model("chain", {{"m", 3}, {"kappa", 0.25}}, {1.0, 0.5, 2.0});
    const Dispersal disp = Dispersal::nonlocal({gaussian(1.0), gaussian(0.5), gaussian(2.0)});
    const double ls = minimize_speed(chain, disp).lambda_star;
    double eig = 0.0, g_zero = 0.0, g_pos = 1e300;
    for (int i = 1; i <= 50; ++i) {
      const double lambda = ls * i / 50.0;
      const SpeedMatrix K = build_speed_matrix(chain, disp, lambda);
      const WaveSpeed ws = wave_speed(chain, disp, lambda);
      eig = std::max(eig, (ws.speed * lambda * ws.vector - K.entries * ws.vector).norm());
      for (std::size_t j = 0; j < 3; ++j) g_zero = std::max(g_zero, std::abs(G_value(chain, disp, ws.speed, lambda, j, ws.vector)));
      if (i < 50) {
        const double mu = 0.5 * (lambda + ls);
        const WaveSpeed wm = wave_speed(chain, disp, mu);
        for (std::size_t j = 0; j < 3; ++j) g_pos = std::min(g_pos, G_value(chain, disp, ws.speed, mu, j, wm.vector));
      }
    }
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0), diag(-2.0, 2.0);
    double perron = 0.0;
    int tested = 0;
    while (tested < 100) {
      const int m = 2 + tested % 4;
      Eigen::MatrixXd A(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = i == j ? diag(rng) : (u(rng) < 0.7 ? u(rng) : 0.0);
      if (!check_irreducible(A)) continue;
      Eigen::EigenSolver<Eigen::MatrixXd> es(A);
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < m; ++i)
        if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
      Eigen::VectorXd v = es.eigenvectors().col(best).real();
      if (v.sum() < 0) v = -v;
      v.normalize();
      const PerronPair pp = perron_eigenpair(A);
      perron = std::max({perron, std::abs(pp.gamma - es.eigenvalues()(best).real()), (pp.vector - v).norm()});
      ++tested;
    }
    const bool ok = eig <= 1e-9 && g_zero <= 1e-9 && g_pos > 0.0 && perron <= 1e-8;
    return Outcome{ok, fmt("eigen-identity %.1e (<= 1e-9), |G| on pair %.1e (<= 1e-9), min G at mu %.3e (> 0), "
                           "power iteration vs dense %.1e (<= 1e-8)",
                           eig, g_zero, g_pos, perron)};
  });

  report("A7", [&] {
    std::vector<std::string> parts;
    bool ok = true;
    auto suite = [&](const char* name, auto body) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto [pass, text] = body();
      const double secs = seconds_since(t0);
      ok = ok && pass && secs <= 60.0;
      parts.push_back(fmt("%s %s (%.1f s)", name, text.c_str(), secs));
    };
    const ReactionModel model = builtin_model("coupled_logistic");
    const Dispersal disp = Dispersal::nonlocal({gaussian(1.0), gaussian(1.0)});

    suite("comparison", [&] {
      const Grid grid = Grid::make(20.0, 0.1);
      Stepper st(model, disp, grid, auto_time_step(dt_max(model, DispersalMode::Nonlocal, grid.dx)));
      FieldState lo = init_state(grid, model, {CompactData{3.0, {0.3, 0.1}}});
      FieldState hi = init_state(grid, model, {ExponentialDecay{{0.5, 0.9}, {0.8, 0.6}}});
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < grid.n; ++i) hi.components[j][i] = std::max(hi.components[j][i], lo.components[j][i]);
      double worst = 0.0;
      for (int s = 0; s < 1000; ++s) {
        st.advance(lo);
        st.advance(hi);
        for (std::size_t j = 0; j < 2; ++j)
          for (std::size_t i = 0; i < grid.n; ++i) worst = std::max(worst, lo.components[j][i] - hi.components[j][i]);
      }
      return std::pair{worst <= 1e-12, fmt("%.1e", worst)};
    });

    suite("symmetry/monotone", [&] {
      const Grid grid = Grid::make(40.0, 0.1);
      double worst = 0.0;
      for (Engine e : {Engine::Direct, Engine::FFT}) {
        Stepper st(model, disp, grid, 0.01, e);
        FieldState s = init_state(grid, model, {ExponentialDecay{{0.4, 1.5}, {1.0, 1.0}}});
        for (int k = 0; k < 1000; ++k) st.advance(s);
        const std::size_t c = grid.center();
        for (const auto& u : s.components) {
          for (std::size_t k = 1; k <= c; ++k) {
            worst = std::max({worst, std::abs(u[c + k] - u[c - k]), u[c + k] - u[c + k - 1]});
          }
        }
      }
      return std::pair{worst <= 1e-10, fmt("%.1e", worst)};
    });

    suite("invariance", [&] {
      const Grid grid = Grid::make(20.0, 0.1);
      bool exact = true;
      for (Engine e : {Engine::Direct, Engine::FFT}) {
        Stepper st(model, disp, grid, 0.01, e);
        FieldState one{0.0, {std::vector<double>(grid.n, 1.0), std::vector<double>(grid.n, 1.0)}};
        FieldState zero{0.0, {std::vector<double>(grid.n, 0.0), std::vector<double>(grid.n, 0.0)}};
        for (int k = 0; k < 100; ++k) {
          st.advance(one);
          st.advance(zero);
        }
        for (std::size_t j = 0; j < 2; ++j) {
          for (std::size_t i = 0; i < grid.n; ++i) exact = exact && one.components[j][i] == 1.0 && zero.components[j][i] == 0.0;
        }
        const std::vector<double> c(grid.n, 0.37);
        for (double y : convolve(c, discretize(gaussian(1.0), grid.dx, 1e-12), e)) exact = exact && y == 0.37;
      }
      return std::pair{exact, std::string(exact ? "exact" : "not exact")};
    });

    suite("fft-vs-direct", [&] {
      std::mt19937_64 rng(3);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double worst = 0.0;
      for (double s : {0.5, 1.0, 4.0}) {
        const DiscreteKernel k = discretize(gaussian(s), 0.1, 1e-12);
        std::vector<double> f(8001);
        for (auto& v : f) v = u(rng);
        const auto a = convolve(f, k, Engine::FFT), b = convolve(f, k, Engine::Direct);
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      }
      return std::pair{worst <= 1e-10, fmt("%.1e", worst)};
    });

    suite("clamp audit", [&] {
      const double worst = clamps.empty() ? 0.0 : *std::max_element(clamps.begin(), clamps.end());
      return std::pair{!clamps.empty() && worst <= 1e-12, fmt("%.1e over %zu runs", worst, clamps.size())};
    });

    std::string text;
    for (const auto& p : parts) text += (text.empty() ? "" : "; ") + p;
    return Outcome{ok, text};
  });

  report("A8", [&] {
    bool ok = true;
    std::string text;
    for (const char* name : {"scalar_speed", "bounds"}) {
      const BoundsResult r = bounds_check(config(name));
      const json& j = r.report;
      const double clamp = j["run"]["max_clamp"].get<double>();
      const bool up = j["upper"].value("passed", false);
      const bool lo = j["lower"].value("passed", false);
      const json& sw = j["sandwich"];
      ok = ok && up && lo && sw["passed"].get<bool>() && clamp <= 1e-12;
      text += fmt("%s: upper residual min %.2e, lower residual max %.2e (tol %.2f), sandwich %zu violations; ",
                  name, j["upper"]["min"].get<double>(), j["lower"]["max"].get<double>(),
                  j["residual_tolerance"].get<double>(), sw["violation_count"].get<std::size_t>());
    }
    const BoundsResult r = bounds_check(config("single_seed"));
    const json& c = r.report["cascade"];
    const bool cascade_ok = r.report["run"]["max_clamp"].get<double>() <= 1e-12 && c.value("passed", false) &&
                            c.value("floor_holds", false) && c.value("solution_above_floor", false) &&
                            c["sandwich"]["passed"].get<bool>();
    ok = ok && cascade_ok;
    text += fmt("cascade: T %.4f, M0 %.3e, floor %s, solution above W(T) %s, sandwich %zu violations",
                c["T"].get<double>(), c["M0"].get<double>(), c.value("floor_holds", false) ? "holds" : "fails",
                c.value("solution_above_floor", false) ? "yes" : "no",
                c["sandwich"]["violation_count"].get<std::size_t>());
    return Outcome{ok, text};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
