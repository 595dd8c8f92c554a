#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace frontlab {

/// Reaction vector field F on [0, P] with its linearization at zero.
///
/// The evaluator must be pure. Construction checks F(0) = F(P) = 0, that
/// off-diagonal entries of F'(0) are nonnegative and that the spectral
/// abscissa of F'(0) is positive (zero is unstable).
class ReactionModel {
 public:
  using Evaluator = std::function<void(std::span<const double>, std::span<double>)>;

  ReactionModel(std::string name, std::vector<double> diffusion, Evaluator reaction,
                Eigen::MatrixXd jacobian0, std::vector<double> equilibrium);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return diffusion_.size(); }
  const std::vector<double>& diffusion() const noexcept { return diffusion_; }
  const Eigen::MatrixXd& jacobian0() const noexcept { return jacobian0_; }
  const std::vector<double>& equilibrium() const noexcept { return equilibrium_; }

  void eval(std::span<const double> u, std::span<double> out) const { reaction_(u, out); }
  std::vector<double> eval(std::span<const double> u) const;

  /// f_j evaluated at u.
  double component(std::size_t j, std::span<const double> u) const;

 private:
  std::string name_;
  std::vector<double> diffusion_;
  Evaluator reaction_;
  Eigen::MatrixXd jacobian0_;
  std::vector<double> equilibrium_;
};

/// Named parameters for builtin models; unknown names are rejected.
using ModelParams = std::map<std::string, double>;

/// Builtin models:
///   scalar_kpp        f(u) = r u (1 - u/p)                       params r, p, d
///   coupled_logistic  f_j = u_j (1 - u_j) + kappa (u_other - u_j) params kappa, d1, d2
///   chain             nearest-neighbour coupled logistic, m >= 2  params m, kappa, d
///   superlinear       f(u) = u (1 + a u)(1 - u)                   params a, d
///   noncooperative    coupled_logistic with -kappa u2 (u2 - u1) in f_1
/// The last two exist to exercise the assumption checkers.
ReactionModel builtin_model(const std::string& name, const ModelParams& params = {},
                            const std::vector<double>& diffusion = {});

std::vector<std::string> builtin_model_names();

/// Central-difference Jacobian of F at u with step h.
Eigen::MatrixXd finite_difference_jacobian(const ReactionModel& model,
                                           std::span<const double> u, double h);

/// Derivative step 1e-5 (1 + ||P||).
double derivative_step(const ReactionModel& model);

/// Deterministic sample points in the box [0, upper]: a lattice with at most
/// `count` nodes plus `count` pseudo-random points from `seed`.
std::vector<std::vector<double>> sample_box(std::span<const double> upper,
                                            std::size_t count, std::uint64_t seed);

/// Sampled bound of sum_i |df_j/du_i| over [0, P], one entry per component.
std::vector<double> lipschitz_bounds(const ReactionModel& model, std::size_t count = 4096);

/// Largest real part among eigenvalues of a square matrix.
double spectral_abscissa(const Eigen::MatrixXd& matrix);

}  // namespace frontlab
