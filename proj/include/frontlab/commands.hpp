#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "frontlab/assumptions.hpp"
#include "frontlab/bounds.hpp"
#include "frontlab/config.hpp"
#include "frontlab/fronts.hpp"
#include "frontlab/simulate.hpp"

namespace frontlab {

enum class Command { Dispersion, Simulate, VerifyTheorem, CheckAssumptions, BoundsCheck, Sweep };

Command command_from_string(const std::string& name);
std::string to_string(Command command);

/// Exit codes: the verdict was positive, negative, or the run failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitError = 2;

struct VerifyResult {
  double lambda0 = 0.0;  // smallest decay rate, or lambda_star for non-decaying data
  double lambda_star = 0.0;
  double c_star = 0.0;
  UniformSpeedVerdict verdict;
  SimulationOutput sim;
};

/// Simulates and compares every component's front speed, on both sides,
/// with c(lambda0) (c_star when lambda0 >= lambda_star).
VerifyResult verify_theorem(const ExperimentConfig& config);

struct SweepRow {
  double lambda0 = 0.0;
  double predicted = 0.0;
  double measured = 0.0;  // mean outward speed over components and sides
  std::vector<double> component_speeds;  // mean of both sides, per component
  bool uniform = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // increasing lambda0
  bool strictly_decreasing = false;
};

/// verify_theorem for each lambda0 of the sweep, `jobs` at a time.
SweepResult sweep(const ExperimentConfig& config, std::size_t jobs);

struct BoundsResult {
  nlohmann::json report;
  bool passed = false;
};

BoundsResult bounds_check(const ExperimentConfig& config);

struct AssumptionsResult {
  std::vector<AssumptionReport> reports;  // A1a, A1b, A1c, A2, A3
  bool passed = false;
};

AssumptionsResult check_assumptions(const ExperimentConfig& config);

nlohmann::json to_json(const UniformSpeedVerdict& verdict);
nlohmann::json to_json(const AssumptionReport& report);
nlohmann::json to_json(const SandwichReport& report);

/// Runs a command and writes its files into `out_dir`. Returns the exit code;
/// module errors propagate as exceptions.
int execute(Command command, const ExperimentConfig& config, const std::string& out_dir);

/// Writes {"error": kind, "message": ...} to out_dir/error.json (best effort).
void write_error(const std::string& out_dir, const std::string& kind, const std::string& message);

}  // namespace frontlab
