#include "frontlab/reactions.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr double kEquilibriumTol = 1e-10;

double param(const ModelParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& model, const ModelParams& params,
                    std::initializer_list<const char*> allowed) {
  std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : params) {
    if (!names.contains(key)) {
      throw Error(ErrorKind::InvalidParam,
                  "model '" + model + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::InvalidParam,
                  "model '" + model + "' parameter '" + key + "' is not finite");
    }
  }
}

std::vector<double> resolve_diffusion(const std::string& model, std::size_t m,
                                      const std::vector<double>& diffusion, double fallback) {
  if (diffusion.empty()) return std::vector<double>(m, fallback);
  if (diffusion.size() != m) {
    std::ostringstream msg;
    msg << "model '" << model << "' has " << m << " components but " << diffusion.size()
        << " diffusion coefficients were given";
    throw Error(ErrorKind::InvalidParam, msg.str());
  }
  return diffusion;
}

void require_kappa(const std::string& model, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error(ErrorKind::InvalidParam,
                "model '" + model + "' needs coupling kappa in (0, 1)");
  }
}

}  // namespace

ReactionModel::ReactionModel(std::string name, std::vector<double> diffusion,
                             Evaluator reaction, Eigen::MatrixXd jacobian0,
                             std::vector<double> equilibrium)
    : name_(std::move(name)),
      diffusion_(std::move(diffusion)),
      reaction_(std::move(reaction)),
      jacobian0_(std::move(jacobian0)),
      equilibrium_(std::move(equilibrium)) {
  const std::size_t m = diffusion_.size();
  if (m == 0) throw Error(ErrorKind::InvalidParam, "reaction model needs m >= 1");
  if (equilibrium_.size() != m || static_cast<std::size_t>(jacobian0_.rows()) != m ||
      static_cast<std::size_t>(jacobian0_.cols()) != m) {
    throw Error(ErrorKind::InvalidParam, "reaction model dimensions disagree");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(diffusion_[j] > 0.0)) {
      throw Error(ErrorKind::InvalidParam, "diffusion coefficients must be positive");
    }
    if (!(equilibrium_[j] > 0.0)) {
      throw Error(ErrorKind::InvalidParam, "equilibrium P must be strictly positive");
    }
  }
  const std::vector<double> zero(m, 0.0);
  const auto at_zero = eval(zero);
  const auto at_p = eval(equilibrium_);
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(at_zero[j]) > kEquilibriumTol || std::abs(at_p[j]) > kEquilibriumTol) {
      throw Error(ErrorKind::InvalidParam,
                  "model '" + name_ + "' does not vanish at 0 and P");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i != j && jacobian0_(j, i) < 0.0) {
        throw Error(ErrorKind::InvalidParam,
                    "model '" + name_ + "' has a negative off-diagonal entry in F'(0)");
      }
    }
  }
  if (!(spectral_abscissa(jacobian0_) > 0.0)) {
    throw Error(ErrorKind::InvalidParam,
                "model '" + name_ + "' has a stable zero state (F'(0) spectral abscissa <= 0)");
  }
}

std::vector<double> ReactionModel::eval(std::span<const double> u) const {
  std::vector<double> out(size());
  reaction_(u, out);
  return out;
}

double ReactionModel::component(std::size_t j, std::span<const double> u) const {
  return eval(u)[j];
}

ReactionModel builtin_model(const std::string& name, const ModelParams& params,
                            const std::vector<double>& diffusion) {
  if (name == "scalar_kpp") {
    reject_unknown(name, params, {"r", "p", "d"});
    const double r = param(params, "r", 1.0);
    const double p = param(params, "p", 1.0);
    if (!(r > 0.0) || !(p > 0.0)) {
      throw Error(ErrorKind::InvalidParam, "scalar_kpp needs r > 0 and p > 0");
    }
    auto f = [r, p](std::span<const double> u, std::span<double> out) {
      out[0] = r * u[0] * (1.0 - u[0] / p);
    };
    Eigen::MatrixXd j0(1, 1);
    j0(0, 0) = r;
    return ReactionModel(name, resolve_diffusion(name, 1, diffusion, param(params, "d", 1.0)),
                         f, j0, {p});
  }
  if (name == "coupled_logistic" || name == "noncooperative") {
    reject_unknown(name, params, {"kappa", "d"});
    const double kappa = param(params, "kappa", 0.5);
    require_kappa(name, kappa);
    const bool violator = name == "noncooperative";
    auto f = [kappa, violator](std::span<const double> u, std::span<double> out) {
      out[0] = u[0] * (1.0 - u[0]) + kappa * (u[1] - u[0]);
      out[1] = u[1] * (1.0 - u[1]) + kappa * (u[0] - u[1]);
      if (violator) out[0] -= kappa * u[1] * (u[1] - u[0]);
    };
    Eigen::MatrixXd j0(2, 2);
    j0 << 1.0 - kappa, kappa, kappa, 1.0 - kappa;
    return ReactionModel(name, resolve_diffusion(name, 2, diffusion, param(params, "d", 1.0)),
                         f, j0, {1.0, 1.0});
  }
  if (name == "chain") {
    reject_unknown(name, params, {"m", "kappa", "d"});
    const double m_value = param(params, "m", 3.0);
    const double kappa = param(params, "kappa", 0.25);
    require_kappa(name, kappa);
    if (!(m_value >= 2.0) || m_value != std::floor(m_value) || m_value > 64.0) {
      throw Error(ErrorKind::InvalidParam, "chain needs an integer m in [2, 64]");
    }
    const auto m = static_cast<std::size_t>(m_value);
    auto f = [kappa, m](std::span<const double> u, std::span<double> out) {
      for (std::size_t j = 0; j < m; ++j) {
        double coupling = 0.0;
        if (j > 0) coupling += u[j - 1] - u[j];
        if (j + 1 < m) coupling += u[j + 1] - u[j];
        out[j] = u[j] * (1.0 - u[j]) + kappa * coupling;
      }
    };
    Eigen::MatrixXd j0 = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      double degree = 0.0;
      if (j > 0) { j0(j, j - 1) = kappa; degree += 1.0; }
      if (j + 1 < m) { j0(j, j + 1) = kappa; degree += 1.0; }
      j0(j, j) = 1.0 - kappa * degree;
    }
    return ReactionModel(name, resolve_diffusion(name, m, diffusion, param(params, "d", 1.0)),
                         f, j0, std::vector<double>(m, 1.0));
  }
  if (name == "superlinear") {
    reject_unknown(name, params, {"a", "d"});
    const double a = param(params, "a", 2.0);
    if (!(a >= 0.0)) throw Error(ErrorKind::InvalidParam, "superlinear needs a >= 0");
    auto f = [a](std::span<const double> u, std::span<double> out) {
      out[0] = u[0] * (1.0 + a * u[0]) * (1.0 - u[0]);
    };
    Eigen::MatrixXd j0(1, 1);
    j0(0, 0) = 1.0;
    return ReactionModel(name, resolve_diffusion(name, 1, diffusion, param(params, "d", 1.0)),
                         f, j0, {1.0});
  }
  throw Error(ErrorKind::InvalidParam, "unknown model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"scalar_kpp", "coupled_logistic", "chain", "superlinear", "noncooperative"};
}

Eigen::MatrixXd finite_difference_jacobian(const ReactionModel& model,
                                           std::span<const double> u, double h) {
  const std::size_t m = model.size();
  Eigen::MatrixXd jac(m, m);
  std::vector<double> probe(u.begin(), u.end());
  std::vector<double> plus(m), minus(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    model.eval(probe, plus);
    probe[i] = saved - h;
    model.eval(probe, minus);
    probe[i] = saved;
    for (std::size_t j = 0; j < m; ++j) jac(j, i) = (plus[j] - minus[j]) / (2.0 * h);
  }
  return jac;
}

double derivative_step(const ReactionModel& model) {
  double norm = 0.0;
  for (double p : model.equilibrium()) norm += p * p;
  return 1e-5 * (1.0 + std::sqrt(norm));
}

std::vector<std::vector<double>> sample_box(std::span<const double> upper, std::size_t count,
                                            std::uint64_t seed) {
  const std::size_t m = upper.size();
  std::size_t per_dim = 2;
  auto fits = [&](std::size_t k) {
    double total = 1.0;
    for (std::size_t j = 0; j < m; ++j) total *= static_cast<double>(k);
    return total <= static_cast<double>(std::max<std::size_t>(count, 1));
  };
  while (fits(per_dim + 1)) ++per_dim;

  std::vector<std::vector<double>> points;
  std::vector<std::size_t> index(m, 0);
  while (true) {
    std::vector<double> point(m);
    for (std::size_t j = 0; j < m; ++j) {
      point[j] = upper[j] * static_cast<double>(index[j]) / static_cast<double>(per_dim - 1);
    }
    points.push_back(std::move(point));
    std::size_t j = 0;
    while (j < m && ++index[j] == per_dim) index[j++] = 0;
    if (j == m) break;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> point(m);
    for (std::size_t j = 0; j < m; ++j) point[j] = upper[j] * unit(rng);
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<double> lipschitz_bounds(const ReactionModel& model, std::size_t count) {
  const std::size_t m = model.size();
  const double h = derivative_step(model);
  std::vector<double> bounds(m, 0.0);
  for (const auto& point : sample_box(model.equilibrium(), count, 0x5eed)) {
    const Eigen::MatrixXd jac = finite_difference_jacobian(model, point, h);
    for (std::size_t j = 0; j < m; ++j) {
      bounds[j] = std::max(bounds[j], jac.row(static_cast<Eigen::Index>(j)).cwiseAbs().sum());
    }
  }
  return bounds;
}

double spectral_abscissa(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() == 1) return matrix(0, 0);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, /*computeEigenvectors=*/false);
  return solver.eigenvalues().real().maxCoeff();
}

}  // namespace frontlab
