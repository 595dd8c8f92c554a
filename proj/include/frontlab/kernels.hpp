#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace frontlab {

enum class KernelFamily { Gaussian, Laplace, CompactBump, Tabulated };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Symmetric, unimodal dispersal density k(x) with unit mass.
///
/// CompactBump is the raised cosine (1 + cos(pi x / R)) / (2R) on [-R, R].
/// Tabulated densities are piecewise linear between the given samples and
/// vanish outside the tabulated range; they are renormalized to unit mass.
class Kernel {
 public:
  struct Gaussian { double stddev; };
  struct Laplace { double rate; };
  struct CompactBump { double radius; };
  struct Tabulated {
    std::vector<double> positions;  // strictly increasing
    std::vector<double> densities;  // normalized
  };

  using Params = std::variant<Gaussian, Laplace, CompactBump, Tabulated>;

  explicit Kernel(Params params);

  KernelFamily family() const noexcept;
  const Params& params() const noexcept { return params_; }

  double density(double x) const;

  /// Supremum of rates with a finite exponential moment.
  double max_rate() const noexcept;

  /// Mass of k outside [-x, x] for x >= 0.
  double tail_mass(double x) const;

  /// Smallest r with k(y) = 0 for |y| > r, or +inf.
  double support_radius() const noexcept;

 private:
  Params params_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Builds and validates a kernel. For Tabulated, `params` is a flat list
/// (x0, k0, x1, k1, ...); otherwise it holds the single scale parameter.
Kernel make_kernel(KernelFamily family, std::span<const double> params);
Kernel make_tabulated_kernel(std::vector<std::pair<double, double>> points);

/// Exponential moment ∫ k(y) e^{lambda y} dy for 0 <= lambda < max_rate.
double mgf(const Kernel& kernel, double lambda);

/// Stencil weights w_{-h..h} of a kernel sampled on spacing dx.
struct DiscreteKernel {
  double dx = 0.0;
  std::size_t half_width = 0;
  std::vector<double> weights;  // size 2*half_width + 1, center at half_width

  // Kernel mass beyond half_width*dx, before renormalization.
  double tail_mass = 0.0;
  // dx * sum of raw samples, before renormalization.
  double raw_sum = 0.0;

  double operator[](std::ptrdiff_t offset) const {
    return weights[static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(half_width) + offset)];
  }
};

struct DiscretizeOptions {
  std::size_t max_half_width = 200000;
};

DiscreteKernel discretize(const Kernel& kernel, double dx, double tail_tol,
                          const DiscretizeOptions& options = {});

}  // namespace frontlab
