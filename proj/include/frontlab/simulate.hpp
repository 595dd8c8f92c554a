#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "frontlab/fronts.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/reactions.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

enum class Engine { Direct, FFT };

std::string to_string(Engine engine);
Engine engine_from_string(const std::string& name);

struct FieldState {
  double time = 0.0;
  std::vector<std::vector<double>> components;  // m arrays of grid length
};

/// u_j(x) = C_j e^{-rate_j |x|}.
struct ExponentialDecay {
  std::vector<double> rates;
  std::vector<double> amplitudes;
};

/// Component `j0` decays like C e^{-lambda0 |x|}; every other component is a
/// plateau of height `others_height` on |x| <= `others_radius` (zero when the
/// height is zero).
struct HypothesisH {
  std::size_t j0 = 0;
  double lambda0 = 0.0;
  double amplitude = 1.0;
  double others_height = 0.0;
  double others_radius = 0.0;
};

/// u_j = heights_j on |x| <= radius, zero outside.
struct CompactData {
  double radius = 0.0;
  std::vector<double> heights;
};

struct InitialData {
  std::variant<ExponentialDecay, HypothesisH, CompactData> profile;
  bool clamp = true;  // cap at P; otherwise values above P are rejected
};

/// Throws InvalidRates for nonpositive rates or amplitudes.
FieldState init_state(const Grid& grid, const ReactionModel& model, const InitialData& data);

/// Convolution of a grid field with a stencil, the field being continued by
/// its end values beyond the domain. The FFT engine works on the field minus
/// its left end value, so constants are reproduced exactly by both engines.
class Convolver {
 public:
  Convolver(std::size_t n, DiscreteKernel kernel, Engine engine);
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  void apply(std::span<const double> field, std::span<double> out);

  std::size_t size() const noexcept { return n_; }
  const DiscreteKernel& kernel() const noexcept { return kernel_; }
  Engine engine() const noexcept { return engine_; }

 private:
  struct FftPlan;

  std::size_t n_;
  DiscreteKernel kernel_;
  Engine engine_;
  std::vector<double> extended_;
  std::unique_ptr<FftPlan> fft_;
};

std::vector<double> convolve(std::span<const double> field, const DiscreteKernel& kernel,
                             Engine engine);

/// Monotone step bound: 0.9 / max_j (d_j + Lip_j); in Laplacian mode also
/// 0.4 dx^2 / max d_j and 0.9 / max_j (2 d_j / dx^2 + Lip_j).
double dt_max(const ReactionModel& model, DispersalMode mode, double dx,
              std::size_t lipschitz_samples = 4096);
double dt_max(const std::vector<double>& diffusion, const std::vector<double>& lipschitz,
              DispersalMode mode, double dx);

/// Largest 1/k not above min(bound, accuracy), so output times land on
/// integers.
double auto_time_step(double bound, double accuracy = 0.01);

/// Explicit Euler stepper for U_t = D (K*U - U) + F(U), or D U_xx + F(U).
class Stepper {
 public:
  static constexpr double kClampLimit = 1e-6;

  Stepper(const ReactionModel& model, const Dispersal& dispersal, const Grid& grid, double dt,
          Engine engine = Engine::Direct, double tail_tol = 1e-12);

  /// Advances one step in place and returns the largest amount clipped to
  /// keep the state in [0, P]. Throws UnstableStep above kClampLimit.
  double advance(FieldState& state);

  double dt() const noexcept { return dt_; }
  /// Largest stencil half-width in nodes (1 for the Laplacian).
  std::size_t half_width() const noexcept;
  const std::vector<DiscreteKernel>& stencils() const noexcept { return stencils_; }

 private:
  const ReactionModel* model_;
  DispersalMode mode_;
  Grid grid_;
  double dt_;
  std::vector<DiscreteKernel> stencils_;
  std::vector<Convolver> convolvers_;
  std::vector<std::vector<double>> conv_;
  std::vector<double> node_u_;
  std::vector<double> node_f_;
};

struct StepOutcome {
  FieldState state;
  double clamp = 0.0;
};

/// One step from `state` without modifying it.
StepOutcome step(const FieldState& state, const ReactionModel& model, const Dispersal& dispersal,
                 const Grid& grid, double dt, Engine engine = Engine::Direct);

struct RunSettings {
  Grid grid;
  double t_final = 0.0;
  std::optional<double> dt;  // auto when empty
  double dt_accuracy = 0.01;
  double tail_tol = 1e-12;
  Engine engine = Engine::Direct;
  double snapshot_interval = 0.0;  // 0: initial and final state only
  std::vector<double> extra_snapshot_times;
  double trace_interval = 0.25;
  std::vector<double> thetas;  // front levels; default 0.5 min p_j
  bool strict = false;         // DomainTooSmall becomes an error
  std::size_t lipschitz_samples = 4096;
};

struct SnapshotStats {
  double time = 0.0;
  std::vector<double> mass;
  std::vector<double> min;
  std::vector<double> max;
};

struct RunMeta {
  double dt = 0.0;
  double dt_max = 0.0;
  std::size_t steps = 0;
  double max_clamp = 0.0;
  std::size_t half_width = 0;
  double boundary_margin = 0.0;  // smallest distance from a front to the domain edge
  std::vector<SnapshotStats> stats;
  std::vector<std::string> warnings;
};

struct SimulationOutput {
  Grid grid;
  std::vector<FieldState> snapshots;  // strictly increasing times
  std::vector<FrontTrace> traces;     // ordered by theta, component, side
  RunMeta meta;
};

SimulationOutput run(const ReactionModel& model, const Dispersal& dispersal,
                     const RunSettings& settings, const InitialData& initial);

}  // namespace frontlab
