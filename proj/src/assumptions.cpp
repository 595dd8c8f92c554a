#include "frontlab/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr double kCooperativityTol = 1e-8;
constexpr double kInequalityTol = 1e-10;
constexpr double kJacobianTol = 1e-6;
constexpr std::size_t kMaxWitnesses = 32;

void finalize(AssumptionReport& report) {
  std::stable_sort(report.witnesses.begin(), report.witnesses.end(),
                   [](const Witness& a, const Witness& b) { return a.magnitude > b.magnitude; });
  if (report.witnesses.size() > kMaxWitnesses) report.witnesses.resize(kMaxWitnesses);
  report.passed = report.witnesses.empty();
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

AssumptionReport check_interior_equilibria(const ReactionModel& model, std::size_t sample_count) {
  AssumptionReport report;
  report.assumption = Assumption::A1a;
  report.note = "heuristic lattice scan for interior local minima of |F|; sampled, not proved";

  const std::size_t m = model.size();
  const auto& p = model.equilibrium();
  std::size_t k = 3;
  auto fits = [&](std::size_t per_dim) {
    return std::pow(static_cast<double>(per_dim), static_cast<double>(m)) <=
           static_cast<double>(std::max<std::size_t>(sample_count, 27));
  };
  while (fits(k + 1)) ++k;

  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= k;
  std::vector<double> residual(total);
  std::vector<double> u(m), f(m);
  auto decode = [&](std::size_t flat, std::vector<std::size_t>& idx) {
    for (std::size_t j = 0; j < m; ++j) {
      idx[j] = flat % k;
      flat /= k;
    }
  };
  std::vector<std::size_t> idx(m);
  double cell = 0.0;
  for (std::size_t j = 0; j < m; ++j) cell = std::max(cell, p[j] / static_cast<double>(k - 1));
  for (std::size_t flat = 0; flat < total; ++flat) {
    decode(flat, idx);
    for (std::size_t j = 0; j < m; ++j) u[j] = p[j] * static_cast<double>(idx[j]) / static_cast<double>(k - 1);
    model.eval(u, f);
    residual[flat] = norm(f);
  }
  const auto lips = lipschitz_bounds(model, 1024);
  const double lip = *std::max_element(lips.begin(), lips.end());
  const double threshold = lip * cell * std::sqrt(static_cast<double>(m));

  std::vector<std::size_t> nidx(m);
  for (std::size_t flat = 0; flat < total; ++flat) {
    decode(flat, idx);
    const bool interior = std::all_of(idx.begin(), idx.end(),
                                      [&](std::size_t i) { return i > 0 && i + 1 < k; });
    if (!interior || residual[flat] > threshold) continue;
    bool local_min = true;
    std::size_t neighbours = 1;
    for (std::size_t j = 0; j < m; ++j) neighbours *= 3;
    for (std::size_t code = 0; code < neighbours && local_min; ++code) {
      std::size_t c = code;
      std::size_t nflat = 0, stride = 1;
      bool self = true;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t offset = c % 3;
        c /= 3;
        if (offset != 1) self = false;
        nflat += (idx[j] + offset - 1) * stride;
        stride *= k;
      }
      if (!self && residual[nflat] < residual[flat]) local_min = false;
    }
    if (!local_min) continue;
    std::vector<double> point(m);
    for (std::size_t j = 0; j < m; ++j) point[j] = p[j] * static_cast<double>(idx[j]) / static_cast<double>(k - 1);
    report.witnesses.push_back({point, residual[flat], "possible interior equilibrium"});
  }
  finalize(report);
  return report;
}

AssumptionReport check_cooperative(const ReactionModel& model, std::size_t sample_count,
                                   std::uint64_t seed) {
  AssumptionReport report;
  report.assumption = Assumption::A1b;
  report.note = "central-difference cross derivatives on lattice and random points in [0, P]; sampled, not proved";
  const std::size_t m = model.size();
  const double h = derivative_step(model);
  for (const auto& point : sample_box(model.equilibrium(), sample_count, seed)) {
    const Eigen::MatrixXd jac = finite_difference_jacobian(model, point, h);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const double d = jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        if (i != j && d < -kCooperativityTol) {
          std::ostringstream detail;
          detail << "df_" << j + 1 << "/du_" << i + 1 << " = " << d;
          report.witnesses.push_back({point, -d, detail.str()});
        }
      }
    }
  }
  finalize(report);
  return report;
}

AssumptionReport check_linearization(const ReactionModel& model) {
  AssumptionReport report;
  report.assumption = Assumption::A1c;
  report.note = "irreducibility of F'(0), positive spectral abscissa, F'(0) against central differences at 0";
  const std::size_t m = model.size();
  const std::vector<double> zero(m, 0.0);
  if (!check_irreducible(model.jacobian0())) {
    report.witnesses.push_back({zero, 1.0, "F'(0) is reducible"});
  }
  const double abscissa = spectral_abscissa(model.jacobian0());
  if (!(abscissa > 0.0)) {
    report.witnesses.push_back({zero, -abscissa, "spectral abscissa of F'(0) is not positive"});
  }
  const Eigen::MatrixXd fd = finite_difference_jacobian(model, zero, derivative_step(model));
  const double mismatch = (fd - model.jacobian0()).cwiseAbs().maxCoeff();
  if (mismatch > kJacobianTol) {
    report.witnesses.push_back({zero, mismatch, "declared F'(0) differs from central differences"});
  }
  finalize(report);
  return report;
}

std::vector<std::vector<double>> ball_samples(const ReactionModel& model, double q0,
                                              std::size_t sample_count, std::uint64_t seed) {
  const std::size_t m = model.size();
  std::vector<double> box(m);
  for (std::size_t j = 0; j < m; ++j) box[j] = std::min(model.equilibrium()[j], q0);
  std::vector<std::vector<double>> out;
  for (auto& point : sample_box(box, sample_count, seed)) {
    if (norm(point) <= q0) out.push_back(std::move(point));
  }
  // Points on the sphere ||U|| = q0 along the diagonal and coordinate axes.
  std::vector<double> diagonal(m, q0 / std::sqrt(static_cast<double>(m)));
  bool inside = true;
  for (std::size_t j = 0; j < m; ++j) inside = inside && diagonal[j] <= model.equilibrium()[j];
  if (inside) out.push_back(diagonal);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> axis(m, 0.0);
    axis[j] = std::min(q0, model.equilibrium()[j]);
    out.push_back(std::move(axis));
  }
  return out;
}

}  // namespace

std::string to_string(Assumption assumption) {
  switch (assumption) {
    case Assumption::A1a: return "A1a";
    case Assumption::A1b: return "A1b";
    case Assumption::A1c: return "A1c";
    case Assumption::A2: return "A2";
    case Assumption::A3: return "A3";
  }
  return "unknown";
}

std::vector<AssumptionReport> check_A1(const ReactionModel& model, std::size_t sample_count,
                                       std::uint64_t seed) {
  if (sample_count == 0) throw Error(ErrorKind::InvalidParam, "sample_count must be >= 1");
  return {check_interior_equilibria(model, sample_count),
          check_cooperative(model, sample_count, seed), check_linearization(model)};
}

AssumptionReport check_A2(const ReactionModel& model, const Dispersal& dispersal,
                          const std::vector<double>& lambda_grid,
                          const std::vector<double>& q_grid) {
  AssumptionReport report;
  report.assumption = Assumption::A2;
  report.note = "F(min(P, qV)) <= q F'(0) V on the (lambda, q) grid; sampled, not proved";
  const std::size_t m = model.size();
  const auto& p = model.equilibrium();
  std::vector<double> u(m), f(m);
  for (double lambda : lambda_grid) {
    const WaveSpeed w = wave_speed(model, dispersal, lambda);
    const Eigen::VectorXd linear_dir = model.jacobian0() * w.vector;
    for (double q : q_grid) {
      for (std::size_t j = 0; j < m; ++j) u[j] = std::min(p[j], q * w.vector(static_cast<Eigen::Index>(j)));
      model.eval(u, f);
      for (std::size_t j = 0; j < m; ++j) {
        const double excess = f[j] - q * linear_dir(static_cast<Eigen::Index>(j));
        if (excess > kInequalityTol) {
          std::ostringstream detail;
          detail << "component " << j + 1 << " at lambda = " << lambda << ", q = " << q;
          report.witnesses.push_back({u, excess, detail.str()});
        }
      }
    }
  }
  finalize(report);
  return report;
}

AssumptionReport check_A3(const ReactionModel& model, const A3Params& params,
                          std::size_t sample_count, std::uint64_t seed) {
  if (!(params.q0 > 0.0) || !(params.delta0 > 0.0 && params.delta0 <= 1.0) || !(params.M > 0.0)) {
    throw Error(ErrorKind::InvalidParam, "A3 needs q0 > 0, delta0 in (0, 1] and M > 0");
  }
  AssumptionReport report;
  report.assumption = Assumption::A3;
  report.params_used = params;
  report.note = "F(U) >= F'(0)U - M U^(1+delta0) for ||U|| <= q0; sampled, not proved";
  const std::size_t m = model.size();
  std::vector<double> f(m);
  for (const auto& u : ball_samples(model, params.q0, sample_count, seed)) {
    model.eval(u, f);
    const Eigen::VectorXd linear = model.jacobian0() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const double bound = linear(static_cast<Eigen::Index>(j)) - params.M * std::pow(u[j], 1.0 + params.delta0);
      const double deficit = bound - f[j];
      if (deficit > kInequalityTol) {
        std::ostringstream detail;
        detail << "component " << j + 1;
        report.witnesses.push_back({u, deficit, detail.str()});
      }
    }
  }
  finalize(report);
  return report;
}

double fit_A3_constant(const ReactionModel& model, double q0, double delta0,
                       std::size_t sample_count, std::uint64_t seed) {
  const std::size_t m = model.size();
  std::vector<double> f(m);
  double sup = 0.0;
  for (const auto& u : ball_samples(model, q0, sample_count, seed)) {
    model.eval(u, f);
    const Eigen::VectorXd linear = model.jacobian0() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const double gap = linear(static_cast<Eigen::Index>(j)) - f[j];
      if (gap <= kInequalityTol) continue;
      const double scale = std::pow(u[j], 1.0 + delta0);
      if (scale <= 0.0) {
        throw Error(ErrorKind::ValidationError,
                    "no finite A3 constant: F falls below F'(0)U where u_j = 0");
      }
      sup = std::max(sup, gap / scale);
    }
  }
  if (sup <= 0.0) return 1.0;
  return std::exp2(std::ceil(std::log2(sup * (1.0 - 1e-8))));
}

A3Params default_A3_params(const ReactionModel& model, std::size_t sample_count,
                           std::uint64_t seed) {
  A3Params params;
  params.q0 = 0.5 * *std::min_element(model.equilibrium().begin(), model.equilibrium().end());
  params.delta0 = 1.0;
  params.M = fit_A3_constant(model, params.q0, params.delta0, sample_count, seed);
  return params;
}

std::vector<double> default_A2_lambda_grid(double lambda_star) {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(lambda_star * i / 10.0);
  return grid;
}

std::vector<double> default_A2_q_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(std::pow(10.0, -3.0 + 6.0 * i / 40.0));
  return grid;
}

}  // namespace frontlab
