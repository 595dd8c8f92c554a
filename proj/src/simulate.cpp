#include "frontlab/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <set>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fill_extended(std::span<const double> field, std::size_t h, std::vector<double>& ext) {
  const std::size_t n = field.size();
  ext.resize(n + 2 * h);
  std::fill(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(h), field.front());
  std::copy(field.begin(), field.end(), ext.begin() + static_cast<std::ptrdiff_t>(h));
  std::fill(ext.begin() + static_cast<std::ptrdiff_t>(h + n), ext.end(), field.back());
}

std::size_t step_index(double t, double dt) {
  return static_cast<std::size_t>(std::llround(t / dt));
}

}  // namespace

std::string to_string(Engine engine) { return engine == Engine::FFT ? "fft" : "direct"; }

Engine engine_from_string(const std::string& name) {
  if (name == "fft") return Engine::FFT;
  if (name == "direct") return Engine::Direct;
  throw Error(ErrorKind::InvalidParam, "unknown engine '" + name + "' (expected fft or direct)");
}

FieldState init_state(const Grid& grid, const ReactionModel& model, const InitialData& data) {
  const std::size_t m = model.size();
  const auto& p = model.equilibrium();
  FieldState state;
  state.components.assign(m, std::vector<double>(grid.n, 0.0));

  auto check_positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << what << " must be positive and finite, got " << v;
      throw Error(ErrorKind::InvalidRates, msg.str());
    }
  };
  auto fill_exponential = [&](std::size_t j, double rate, double amp) {
    for (std::size_t i = 0; i < grid.n; ++i) {
      state.components[j][i] = amp * std::exp(-rate * std::abs(grid.x(i)));
    }
  };
  auto fill_plateau = [&](std::size_t j, double radius, double height) {
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (std::abs(grid.x(i)) <= radius) state.components[j][i] = height;
    }
  };

  if (const auto* e = std::get_if<ExponentialDecay>(&data.profile)) {
    if (e->rates.size() != m || e->amplitudes.size() != m) {
      throw Error(ErrorKind::InvalidRates, "need one decay rate and one amplitude per component");
    }
    for (std::size_t j = 0; j < m; ++j) {
      check_positive(e->rates[j], "decay rate");
      check_positive(e->amplitudes[j], "amplitude");
      fill_exponential(j, e->rates[j], e->amplitudes[j]);
    }
  } else if (const auto* h = std::get_if<HypothesisH>(&data.profile)) {
    if (h->j0 >= m) throw Error(ErrorKind::InvalidParam, "decaying component index out of range");
    check_positive(h->lambda0, "decay rate");
    check_positive(h->amplitude, "amplitude");
    if (h->others_height < 0.0 || h->others_radius < 0.0) {
      throw Error(ErrorKind::InvalidParam, "plateau height and radius must be nonnegative");
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (j == h->j0) {
        fill_exponential(j, h->lambda0, h->amplitude);
      } else if (h->others_height > 0.0) {
        fill_plateau(j, h->others_radius, h->others_height);
      }
    }
  } else {
    const auto& c = std::get<CompactData>(data.profile);
    if (c.heights.size() != m) throw Error(ErrorKind::InvalidParam, "need one height per component");
    if (c.radius < 0.0) throw Error(ErrorKind::InvalidParam, "plateau radius must be nonnegative");
    for (std::size_t j = 0; j < m; ++j) {
      if (c.heights[j] < 0.0) throw Error(ErrorKind::InvalidParam, "heights must be nonnegative");
      fill_plateau(j, c.radius, c.heights[j]);
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    for (double& v : state.components[j]) {
      if (v > p[j]) {
        if (!data.clamp) {
          std::ostringstream msg;
          msg << "initial component " << j + 1 << " exceeds its equilibrium value " << p[j];
          throw Error(ErrorKind::InvalidParam, msg.str());
        }
        v = p[j];
      }
    }
  }
  return state;
}

struct Convolver::FftPlan {
  std::size_t size = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  std::vector<std::complex<double>> kernel_spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FftPlan(std::size_t n, const DiscreteKernel& kernel) {
    const std::size_t h = kernel.half_width;
    size = next_power_of_two(n + 4 * h);
    const std::size_t bins = size / 2 + 1;
    real = fftw_alloc_real(size);
    spectrum = fftw_alloc_complex(bins);
    {
      std::lock_guard lock(fftw_planner_mutex());
      const int len = static_cast<int>(size);
      forward = fftw_plan_dft_r2c_1d(len, real, spectrum, FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_1d(len, spectrum, real, FFTW_ESTIMATE);
    }
    std::fill(real, real + size, 0.0);
    std::copy(kernel.weights.begin(), kernel.weights.end(), real);
    fftw_execute(forward);
    kernel_spectrum.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      kernel_spectrum[b] = {spectrum[b][0], spectrum[b][1]};
    }
  }

  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spectrum);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

Convolver::Convolver(std::size_t n, DiscreteKernel kernel, Engine engine)
    : n_(n), kernel_(std::move(kernel)), engine_(engine) {
  if (n_ == 0) throw Error(ErrorKind::InvalidParam, "cannot convolve an empty field");
  if (kernel_.weights.size() != 2 * kernel_.half_width + 1) {
    throw Error(ErrorKind::InvalidParam, "stencil size does not match its half-width");
  }
  if (engine_ == Engine::FFT) fft_ = std::make_unique<FftPlan>(n_, kernel_);
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

void Convolver::apply(std::span<const double> field, std::span<double> out) {
  if (field.size() != n_ || out.size() != n_) {
    throw Error(ErrorKind::InvalidParam, "field length differs from convolver size");
  }
  const std::size_t h = kernel_.half_width;
  fill_extended(field, h, extended_);
  const double* g = extended_.data() + h;  // g[i] == field[i] for 0 <= i < n

  if (engine_ == Engine::Direct) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto hw = static_cast<std::ptrdiff_t>(h);
    const auto n = static_cast<std::ptrdiff_t>(n_);
    // Pairs +k and -k so that mirrored fields give mirrored results exactly.
    for (std::ptrdiff_t k = hw; k >= 1; --k) {
      const double wp = kernel_[k];
      const double wm = kernel_[-k];
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] += wp * (g[i - k] - g[i]) + wm * (g[i + k] - g[i]);
      }
    }
    for (std::size_t i = 0; i < n_; ++i) out[i] += field[i];
    return;
  }

  auto& plan = *fft_;
  const double base = field.front();
  std::fill(plan.real, plan.real + plan.size, 0.0);
  for (std::size_t e = 0; e < extended_.size(); ++e) plan.real[e] = extended_[e] - base;
  fftw_execute(plan.forward);
  const std::size_t bins = plan.size / 2 + 1;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::complex<double> z(plan.spectrum[b][0], plan.spectrum[b][1]);
    const auto prod = z * plan.kernel_spectrum[b];
    plan.spectrum[b][0] = prod.real();
    plan.spectrum[b][1] = prod.imag();
  }
  fftw_execute(plan.backward);
  const double scale = 1.0 / static_cast<double>(plan.size);
  for (std::size_t i = 0; i < n_; ++i) out[i] = plan.real[i + 2 * h] * scale + base;
}

std::vector<double> convolve(std::span<const double> field, const DiscreteKernel& kernel,
                             Engine engine) {
  Convolver conv(field.size(), kernel, engine);
  std::vector<double> out(field.size());
  conv.apply(field, out);
  return out;
}

double dt_max(const std::vector<double>& diffusion, const std::vector<double>& lipschitz,
              DispersalMode mode, double dx) {
  if (diffusion.size() != lipschitz.size() || diffusion.empty()) {
    throw Error(ErrorKind::InvalidParam, "diffusion and Lipschitz bounds differ in length");
  }
  double rate = 0.0;
  double d_max = 0.0;
  for (std::size_t j = 0; j < diffusion.size(); ++j) {
    const double d = diffusion[j];
    d_max = std::max(d_max, d);
    const double local = mode == DispersalMode::Laplacian ? 2.0 * d / (dx * dx) : d;
    rate = std::max(rate, local + lipschitz[j]);
  }
  double bound = rate > 0.0 ? 0.9 / rate : kInfinity;
  if (mode == DispersalMode::Laplacian && d_max > 0.0) {
    bound = std::min(bound, 0.4 * dx * dx / d_max);
  }
  return bound;
}

double dt_max(const ReactionModel& model, DispersalMode mode, double dx,
              std::size_t lipschitz_samples) {
  return dt_max(model.diffusion(), lipschitz_bounds(model, lipschitz_samples), mode, dx);
}

double auto_time_step(double bound, double accuracy) {
  const double target = std::min(bound, accuracy);
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidParam, "time step bound must be positive");
  return 1.0 / std::ceil(1.0 / target);
}

Stepper::Stepper(const ReactionModel& model, const Dispersal& dispersal, const Grid& grid,
                 double dt, Engine engine, double tail_tol)
    : model_(&model), mode_(dispersal.mode), grid_(grid), dt_(dt) {
  const std::size_t m = model.size();
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParam, "time step must be positive");
  if (mode_ == DispersalMode::Nonlocal) {
    if (dispersal.kernels.size() != m) {
      throw Error(ErrorKind::InvalidParam, "need one kernel per component");
    }
    for (const auto& k : dispersal.kernels) {
      stencils_.push_back(discretize(k, grid.dx, tail_tol));
      if (2 * stencils_.back().half_width + 1 > grid.n) {
        throw Error(ErrorKind::DomainTooSmall, "kernel stencil is wider than the grid");
      }
      convolvers_.emplace_back(grid.n, stencils_.back(), engine);
    }
  }
  conv_.assign(m, std::vector<double>(grid.n));
  node_u_.resize(m);
  node_f_.resize(m);
}

std::size_t Stepper::half_width() const noexcept {
  std::size_t h = 1;
  for (const auto& s : stencils_) h = std::max(h, s.half_width);
  return h;
}

double Stepper::advance(FieldState& state) {
  const std::size_t m = model_->size();
  const std::size_t n = grid_.n;
  const auto& d = model_->diffusion();
  const auto& p = model_->equilibrium();

  for (std::size_t j = 0; j < m; ++j) {
    auto& u = state.components[j];
    auto& c = conv_[j];
    if (mode_ == DispersalMode::Nonlocal) {
      convolvers_[j].apply(u, c);
      for (std::size_t i = 0; i < n; ++i) c[i] = d[j] * (c[i] - u[i]);
    } else {
      const double scale = d[j] / (grid_.dx * grid_.dx);
      for (std::size_t i = 0; i < n; ++i) {
        const double left = u[i == 0 ? 0 : i - 1];
        const double right = u[i + 1 == n ? i : i + 1];
        c[i] = scale * ((left - u[i]) + (right - u[i]));
      }
    }
  }

  double clamp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) node_u_[j] = state.components[j][i];
    model_->eval(node_u_, node_f_);
    for (std::size_t j = 0; j < m; ++j) {
      double v = node_u_[j] + dt_ * (conv_[j][i] + node_f_[j]);
      if (v < 0.0) {
        clamp = std::max(clamp, -v);
        v = 0.0;
      } else if (v > p[j]) {
        clamp = std::max(clamp, v - p[j]);
        v = p[j];
      }
      state.components[j][i] = v;
    }
  }
  state.time += dt_;
  if (clamp > kClampLimit) {
    std::ostringstream msg;
    msg << "step clipped " << clamp << " to stay in [0, P]; the time step is too large for a "
        << "monotone update or the reaction is not cooperative";
    throw Error(ErrorKind::UnstableStep, msg.str());
  }
  return clamp;
}

StepOutcome step(const FieldState& state, const ReactionModel& model, const Dispersal& dispersal,
                 const Grid& grid, double dt, Engine engine) {
  Stepper stepper(model, dispersal, grid, dt, engine);
  StepOutcome outcome{state, 0.0};
  outcome.clamp = stepper.advance(outcome.state);
  return outcome;
}

SimulationOutput run(const ReactionModel& model, const Dispersal& dispersal,
                     const RunSettings& settings, const InitialData& initial) {
  const Grid& grid = settings.grid;
  const std::size_t m = model.size();
  const auto& p = model.equilibrium();
  if (!(settings.t_final > 0.0)) throw Error(ErrorKind::InvalidParam, "final time must be positive");

  SimulationOutput out;
  out.grid = grid;
  auto& meta = out.meta;
  meta.dt_max = dt_max(model.diffusion(), lipschitz_bounds(model, settings.lipschitz_samples),
                       dispersal.mode, grid.dx);
  if (settings.dt) {
    if (!(*settings.dt > 0.0) || *settings.dt > meta.dt_max) {
      std::ostringstream msg;
      msg << "dt = " << *settings.dt << " exceeds the monotone step bound " << meta.dt_max;
      throw Error(ErrorKind::InvalidParam, msg.str());
    }
    meta.dt = *settings.dt;
  } else {
    meta.dt = auto_time_step(meta.dt_max, settings.dt_accuracy);
  }
  const double dt = meta.dt;
  const std::size_t total = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::ceil(settings.t_final / dt - 1e-9)));
  meta.steps = total;

  std::set<std::size_t> snapshot_steps{0, total};
  if (settings.snapshot_interval > 0.0) {
    const std::size_t stride = std::max<std::size_t>(1, step_index(settings.snapshot_interval, dt));
    for (std::size_t s = stride; s < total; s += stride) snapshot_steps.insert(s);
  }
  for (double t : settings.extra_snapshot_times) {
    if (t >= 0.0 && t <= settings.t_final + 0.5 * dt) snapshot_steps.insert(std::min(total, step_index(t, dt)));
  }
  const std::size_t trace_stride =
      settings.trace_interval > 0.0 ? std::max<std::size_t>(1, step_index(settings.trace_interval, dt))
                                    : 0;

  std::vector<double> thetas = settings.thetas;
  if (thetas.empty()) thetas.push_back(0.5 * *std::min_element(p.begin(), p.end()));
  for (double th : thetas) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!(th > 0.0 && th < p[j])) {
        throw Error(ErrorKind::InvalidParam, "front level must lie strictly between 0 and every p_j");
      }
    }
  }
  for (double th : thetas) {
    for (std::size_t j = 0; j < m; ++j) {
      for (Side side : {Side::Right, Side::Left}) out.traces.push_back({j, side, th, {}});
    }
  }

  Stepper stepper(model, dispersal, grid, dt, settings.engine, settings.tail_tol);
  meta.half_width = stepper.half_width();
  meta.boundary_margin = grid.half_extent;

  FieldState state = init_state(grid, model, initial);

  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * dt;
    if (snapshot_steps.count(k)) {
      FieldState snap = state;
      snap.time = t;
      SnapshotStats stats;
      stats.time = t;
      for (const auto& u : state.components) {
        double mass = 0.0;
        for (double v : u) mass += v;
        stats.mass.push_back(mass * grid.dx);
        stats.min.push_back(*std::min_element(u.begin(), u.end()));
        stats.max.push_back(*std::max_element(u.begin(), u.end()));
      }
      meta.stats.push_back(std::move(stats));
      out.snapshots.push_back(std::move(snap));
    }
    if (trace_stride > 0 && (k % trace_stride == 0 || k == total)) {
      for (auto& trace : out.traces) {
        try {
          const double x =
              front_position(state.components[trace.component], grid, trace.theta, trace.side);
          if (!trace.points.empty() && trace.points.back().time >= t) continue;
          trace.points.push_back({t, x});
          meta.boundary_margin = std::min(meta.boundary_margin, grid.half_extent - std::abs(x));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoCrossing) throw;
        }
      }
    }
  };

  record(0);
  for (std::size_t k = 1; k <= total; ++k) {
    meta.max_clamp = std::max(meta.max_clamp, stepper.advance(state));
    state.time = static_cast<double>(k) * dt;
    record(k);
  }

  const double required = 10.0 * static_cast<double>(meta.half_width) * grid.dx;
  if (meta.boundary_margin < required) {
    std::ostringstream msg;
    msg << "front came within " << meta.boundary_margin << " of the domain edge; at least "
        << required << " (10 stencil half-widths) is needed";
    if (settings.strict) throw Error(ErrorKind::DomainTooSmall, msg.str());
    meta.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace frontlab
