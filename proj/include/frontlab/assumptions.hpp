#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/reactions.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

enum class Assumption { A1a, A1b, A1c, A2, A3 };

std::string to_string(Assumption assumption);

struct Witness {
  std::vector<double> point;
  double magnitude = 0.0;
  std::string detail;
};

struct A3Params {
  double q0 = 0.0;
  double delta0 = 1.0;
  double M = 1.0;
};

// All checks are sample-based: a passed report means no violation was found
// at the sampled points, not that the assumption is proved.
struct AssumptionReport {
  Assumption assumption = Assumption::A1a;
  bool passed = true;
  std::vector<Witness> witnesses;  // sorted by decreasing magnitude
  std::optional<A3Params> params_used;
  std::string note;
};

/// A1a (no interior equilibrium; lattice heuristic), A1b (cooperativity by
/// central differences) and A1c (irreducible, unstable zero), in that order.
std::vector<AssumptionReport> check_A1(const ReactionModel& model, std::size_t sample_count,
                                       std::uint64_t seed = 1);

/// F(min(P, q V(lambda))) <= q F'(0) V(lambda) on the (lambda, q) grid.
AssumptionReport check_A2(const ReactionModel& model, const Dispersal& dispersal,
                          const std::vector<double>& lambda_grid,
                          const std::vector<double>& q_grid);

/// F(U) >= F'(0) U - M U^{1+delta0} for sampled U in [0, P] with ||U|| <= q0.
AssumptionReport check_A3(const ReactionModel& model, const A3Params& params,
                          std::size_t sample_count, std::uint64_t seed = 1);

/// Smallest power of two M for which the sampled A3 inequality holds.
double fit_A3_constant(const ReactionModel& model, double q0, double delta0,
                       std::size_t sample_count, std::uint64_t seed = 1);

/// Defaults (0.5 min p_j, 1, fitted M).
A3Params default_A3_params(const ReactionModel& model, std::size_t sample_count = 2000,
                           std::uint64_t seed = 1);

/// Default grids: ten rates evenly in (0, lambda_star], 41 log-spaced q in [1e-3, 1e3].
std::vector<double> default_A2_lambda_grid(double lambda_star);
std::vector<double> default_A2_q_grid();

}  // namespace frontlab
