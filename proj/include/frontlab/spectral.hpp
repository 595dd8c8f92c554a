#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "frontlab/kernels.hpp"
#include "frontlab/reactions.hpp"

namespace frontlab {

enum class DispersalMode { Nonlocal, Laplacian };

/// Dispersal operator of every component: either nonlocal kernels k_j or the
/// local second derivative. Its symbol at rate lambda is mgf_j(lambda) - 1 for
/// kernels and lambda^2 for the Laplacian.
struct Dispersal {
  DispersalMode mode = DispersalMode::Nonlocal;
  std::vector<Kernel> kernels;

  static Dispersal nonlocal(std::vector<Kernel> kernels);
  static Dispersal laplacian();

  double symbol(std::size_t j, double lambda) const;
  /// Minimum over components of the kernels' max_rate.
  double max_rate() const;
};

struct SpeedMatrix {
  double lambda = 0.0;
  Eigen::MatrixXd entries;
};

struct PerronPair {
  double gamma = 0.0;
  Eigen::VectorXd vector;  // strictly positive, unit Euclidean norm
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct PowerIterationOptions {
  double tol = 1e-13;  // residual relative to max(1, ||A||_inf)
  std::size_t max_iterations = 2'000'000;
};

SpeedMatrix build_speed_matrix(const ReactionModel& model, const Dispersal& dispersal,
                               double lambda);
SpeedMatrix build_speed_matrix(const ReactionModel& model, const std::vector<Kernel>& kernels,
                               double lambda);

/// Dominant eigenpair of an irreducible essentially nonnegative matrix by
/// power iteration on A + (1 + max|a_jj|) I.
PerronPair perron_eigenpair(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options = {});
inline PerronPair perron_eigenpair(const SpeedMatrix& matrix,
                                   const PowerIterationOptions& options = {}) {
  return perron_eigenpair(matrix.entries, options);
}

struct WaveSpeed {
  double lambda = 0.0;
  double gamma = 0.0;
  double speed = 0.0;
  Eigen::VectorXd vector;
};

/// c(lambda) = gamma(lambda) / lambda with its Perron vector V(lambda).
WaveSpeed wave_speed(const ReactionModel& model, const Dispersal& dispersal, double lambda);
WaveSpeed wave_speed(const ReactionModel& model, const std::vector<Kernel>& kernels, double lambda);

/// Scalar equation speed (d (mgf(sigma) - 1) + growth) / sigma for decay rate
/// sigma below the kernel's max rate and below the scalar minimizer.
double scalar_speed(const Kernel& kernel, double diffusion, double growth, double sigma);

/// Golden-section minimizer of f on [lo, hi], returning the abscissa.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol);

struct CurveSample {
  double lambda = 0.0;
  double gamma = 0.0;
  double speed = 0.0;
  Eigen::VectorXd vector;
};

struct DispersionCurve {
  std::vector<CurveSample> samples;  // log-spaced over the bracket
  double lambda_star = 0.0;
  double c_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  // Sampled shape checks below lambda_star.
  bool decreasing_below_star = true;
  bool convex_below_star = true;
};

struct SpeedSearch {
  std::optional<double> lo;  // default 1e-3
  std::optional<double> hi;  // default 0.95 * max rate, capped at 50
  double tol = 1e-8;
  std::size_t samples = 200;
};

/// Default upper end of the search bracket: 0.95 * max_rate capped at 50,
/// halved while any dispersal symbol exceeds 1e100 there.
double default_bracket_hi(const Dispersal& dispersal);

/// Minimizes c over the bracket: log-spaced scan, then golden-section search
/// between the neighbours of the best sample. Throws BoundaryMinimum when the
/// minimum sits on the bracket edge.
DispersionCurve minimize_speed(const ReactionModel& model, const Dispersal& dispersal,
                               const SpeedSearch& search = {});

/// True iff the digraph with an edge i -> j whenever jacobian0(j, i) > 0 is
/// strongly connected. A 1x1 matrix counts as irreducible.
bool check_irreducible(const Eigen::MatrixXd& jacobian0);

struct ComponentOrder {
  std::vector<std::size_t> permutation;
  // feeder[k] is the original index of the component feeding permutation[k];
  // empty for the first position.
  std::vector<std::optional<std::size_t>> feeder;
  // Number of feeder hops from permutation[0]; depth[k] pairs with permutation[k].
  std::vector<std::size_t> depth;
};

/// Chain order starting from the smallest decay rate; see README for the rule.
/// Components absent from the data carry an infinite rate.
ComponentOrder reorder_components(const Eigen::MatrixXd& jacobian0,
                                  const std::vector<double>& decay_rates);

}  // namespace frontlab
