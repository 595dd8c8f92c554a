#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "frontlab/assumptions.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/reactions.hpp"
#include "frontlab/simulate.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  std::vector<double> params;
  std::string text;  // as written, for the config echo
};

/// A fully validated experiment description. Built by parse_config; see the
/// README for the file format.
struct ExperimentConfig {
  // [model]
  std::string model_name;
  ModelParams model_params;
  std::vector<double> diffusion;  // empty: model default
  DispersalMode mode = DispersalMode::Nonlocal;
  std::size_t components = 0;

  // [kernels], one per component after resolution
  std::vector<KernelSpec> kernels;

  // [grid]
  double half_extent = 400.0;
  double dx = 0.1;

  // [time]
  std::optional<double> dt;
  double dt_accuracy = 0.01;
  double t_final = 60.0;
  double snapshot_interval = 10.0;
  double trace_interval = 0.25;
  double tail_tol = 1e-12;

  // [initial]
  InitialData initial;

  // [fronts]
  std::optional<double> theta;
  double window_fraction = 0.5;
  std::optional<double> fit_t_lo;
  std::optional<double> fit_t_hi;
  double rtol = 0.04;

  // [spectral]
  SpeedSearch search;

  // [assumptions]
  std::size_t samples = 2000;
  std::optional<double> q0;
  std::optional<double> delta0;
  std::optional<double> M;

  // [bounds]
  std::optional<double> bounds_lambda;
  double y0 = 10.0;
  double slack = 1e-8;
  std::optional<double> kink_slack;
  std::vector<double> residual_times{0.0, 5.0, 10.0, 20.0};

  // [sweep]
  std::vector<double> sweep_lambdas;

  // [run]
  Engine engine = Engine::Direct;
  bool strict = false;
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
  bool binary_snapshots = false;

  ReactionModel make_model() const;
  Dispersal make_dispersal() const;
  Grid make_grid() const;
  RunSettings run_settings() const;

  /// Smallest decay rate of the initial data, if it decays exponentially.
  std::optional<double> smallest_rate() const;
  /// Per-component decay rates (infinity for non-decaying components).
  std::vector<double> decay_rates() const;
  /// Copy with the smallest decay rate replaced by lambda0.
  ExperimentConfig with_smallest_rate(double lambda0) const;

  nlohmann::json to_json() const;
};

/// Parses the sectioned `key = value` format. Throws ParseError (with the
/// line number) on malformed input and ValidationError naming the offending
/// key on semantic problems.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

KernelSpec parse_kernel_spec(const std::string& text);

}  // namespace frontlab
