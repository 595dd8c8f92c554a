#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "frontlab/assumptions.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/reactions.hpp"
#include "frontlab/simulate.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

/// A closed-form comparison profile Phi_j(t, x), defined for t >= start_time().
class Profile {
 public:
  virtual ~Profile() = default;
  virtual std::size_t size() const = 0;
  virtual double start_time() const = 0;
  virtual double value(std::size_t j, double t, double x) const = 0;
  virtual double time_derivative(std::size_t j, double t, double x) const = 0;
  /// True within `tol` of a point where Phi_j(t, .) is not differentiable.
  virtual bool near_kink(std::size_t j, double t, double x, double tol) const = 0;
};

/// (c lambda - d_j mgf_j(lambda) + d_j) v_j - sum_i f_{j,i} v_i; zero at c = c(lambda)
/// with v = V(lambda). In Laplacian mode mgf_j - 1 is replaced by lambda^2.
double G_value(const ReactionModel& model, const Dispersal& dispersal, double c, double lambda,
               std::size_t j, const Eigen::VectorXd& v);

enum class AnalyticKind { Upper, LowerTwoExp };

/// Upper:       min(p_j, Gamma e^{-lambda z} v_j(lambda))
/// LowerTwoExp: max(0, gamma e^{-lambda z} v_j(lambda) - L e^{-mu z} v_j(mu))
/// with z = |x| - c(lambda) (t - t_origin).
class AnalyticProfile final : public Profile {
 public:
  AnalyticKind kind = AnalyticKind::Upper;
  double lambda = 0.0;
  double speed = 0.0;
  double amplitude = 0.0;  // Gamma or gamma
  double t_origin = 0.0;
  Eigen::VectorXd v_lambda;
  std::vector<double> cap;  // P, upper only

  // Lower profile only.
  double mu = 0.0;
  double delta = 0.0;
  double L = 0.0;
  double y0 = 0.0;
  double q0 = 0.0;
  Eigen::VectorXd v_mu;
  std::vector<double> roots;  // z_j
  std::vector<double> peaks;  // y_j

  std::size_t size() const override { return static_cast<std::size_t>(v_lambda.size()); }
  double start_time() const override { return t_origin; }
  double value(std::size_t j, double t, double x) const override;
  double time_derivative(std::size_t j, double t, double x) const override;
  bool near_kink(std::size_t j, double t, double x, double tol) const override;
};

/// Gamma is the smallest power-of-two multiple of max_j C_j / v_j(lambda) with
/// U_0 <= Gamma e^{-lambda |x|} V(lambda) at every grid node. Throws
/// DominationImpossible when some decay rate is below lambda.
AnalyticProfile build_upper(const ReactionModel& model, const Dispersal& dispersal, double lambda,
                            const InitialData& data, const Grid& grid);

/// Two-exponential lower profile. gamma is halved until gamma e^{-lambda y0} <= q0;
/// delta = min(delta0, (lambda_star / lambda - 1) / 2), mu = lambda (1 + delta).
AnalyticProfile build_lower(const ReactionModel& model, const Dispersal& dispersal, double lambda,
                            double lambda_star, double gamma, double y0, const A3Params& a3,
                            double t_origin = 1.0);

/// Largest power of two gamma with gamma min(e^{-lambda |x|}, e^{-lambda y0}) v_j <= u_j
/// at every node of `state`.
double lower_amplitude_from_state(const FieldState& state, const Grid& grid, double lambda,
                                  const Eigen::VectorXd& v, double y0);

/// Staged lower profile built along a component order: the first component
/// decays like M_1 e^{-alpha (t-1)} p(x), every other one switches on when its
/// feeder is established, p(x) = e^{-lambda0 |x|}.
class CascadeProfile final : public Profile {
 public:
  ComponentOrder order;
  double lambda0 = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  double q3 = 0.0;
  double T = 0.0;
  double M0 = 0.0;
  std::size_t halvings = 0;       // times M_1 was halved to meet the caps
  std::vector<double> betas;      // per order position (unused for the first)
  std::vector<double> amps;       // M_j per order position
  std::vector<double> origins;    // switch-on time per order position
  std::vector<double> floors;     // w_j >= floors * e^{-alpha (t-1)} p(x) once established

  std::size_t size() const override { return order.permutation.size(); }
  double start_time() const override { return 1.0; }
  double value(std::size_t j, double t, double x) const override;
  double time_derivative(std::size_t j, double t, double x) const override;
  bool near_kink(std::size_t j, double t, double x, double tol) const override;

  double p(double x) const;
  /// Order position of original component j.
  std::size_t position(std::size_t j) const;
};

/// Largest q = min p_j / 2^k such that f_j(U) >= (f_jj - 1) u_j + 1/2 sum_{i != j} f_ji u_i
/// at all sampled U in [0, q]^m.
double find_cascade_q3(const ReactionModel& model, std::size_t sample_count = 2000,
                       std::uint64_t seed = 1);

/// Throws Reducible if the order does not cover every component.
CascadeProfile build_cascade(const ReactionModel& model, const ComponentOrder& order,
                             double lambda0, double seed_amp, double q3);

/// Largest C0 <= cap with u_j(x) >= C0 e^{-lambda0 |x|} at every node.
double cascade_seed(const FieldState& state, const Grid& grid, std::size_t component,
                    double lambda0);

struct ResidualSlice {
  double time = 0.0;
  // fields[j][i] = d_t Phi_j - d_j (K*Phi_j - Phi_j) - f_j(Phi); NaN where excluded.
  std::vector<std::vector<double>> fields;
};

struct ResidualReport {
  std::vector<ResidualSlice> slices;
  double min = 0.0;
  double max = 0.0;
  std::size_t nodes_checked = 0;
  std::size_t nodes_excluded = 0;
};

/// Residual of the profile under the discrete dispersal operator with the
/// profile's analytic time derivative. Nodes within 2 dx of a kink or within a
/// stencil half-width of the domain edge are excluded.
ResidualReport residual(const Profile& profile, const ReactionModel& model,
                        const Dispersal& dispersal, const Grid& grid,
                        const std::vector<double>& times, double tail_tol = 1e-12);

/// Tolerance on residual signs: dx * max_j d_j * max_j p_j.
double residual_tolerance(const ReactionModel& model, double dx);

struct SandwichViolation {
  double time = 0.0;
  double x = 0.0;
  std::size_t component = 0;
  std::string bound;  // "lower" or "upper"
  double excess = 0.0;
};

struct SandwichOptions {
  double slack = 1e-8;
  // Slack near kinks; negative means 10 dx max_j Lip_j.
  double kink_slack = -1.0;
  std::size_t lipschitz_samples = 4096;
};

struct SandwichReport {
  std::size_t snapshots_checked = 0;
  std::size_t nodes_checked = 0;
  std::size_t violation_count = 0;
  double slack = 0.0;
  double kink_slack = 0.0;
  double worst_lower_gap = 0.0;  // min over checked nodes of U - lower
  double worst_upper_gap = 0.0;  // min over checked nodes of upper - U
  std::vector<SandwichViolation> violations;  // largest first, capped at 32
  bool passed() const noexcept { return violation_count == 0; }
};

/// Checks lower - slack <= U <= upper + slack at every snapshot node where
/// each profile is defined. Either profile may be null.
SandwichReport sandwich_test(const SimulationOutput& sim, const ReactionModel& model,
                             const Profile* lower, const Profile* upper,
                             const SandwichOptions& options = {});

}  // namespace frontlab
