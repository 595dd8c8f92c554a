#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/quadrature.hpp"

using namespace frontlab;

namespace {

// Composite Simpson rule on [-R, R]; independent of the library's quadrature.
double simpson_mgf(const Kernel& k, double lambda, double R, int panels = 200000) {
  const double h = 2.0 * R / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double y = -R + i * h;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * k.density(y) * std::exp(lambda * y);
  }
  return sum * h / 3.0;
}

Kernel gaussian(double s) {
  const double p[] = {s};
  return make_kernel(KernelFamily::Gaussian, p);
}

Kernel laplace(double a) {
  const double p[] = {a};
  return make_kernel(KernelFamily::Laplace, p);
}

Kernel bump(double r) {
  const double p[] = {r};
  return make_kernel(KernelFamily::CompactBump, p);
}

}  // namespace

TEST_CASE("closed-form exponential moments") {
  CHECK(mgf(gaussian(1.0), 0.5) == doctest::Approx(std::exp(0.125)).epsilon(1e-14));
  CHECK(mgf(gaussian(2.0), 0.3) == doctest::Approx(std::exp(0.18)).epsilon(1e-14));
  CHECK(mgf(laplace(2.0), 1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(mgf(gaussian(1.0), 0.0) == 1.0);
}

TEST_CASE("exponential moments agree with a Simpson oracle") {
  for (double lambda : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(mgf(gaussian(1.0), lambda) == doctest::Approx(simpson_mgf(gaussian(1.0), lambda, 40.0)).epsilon(1e-9));
    CHECK(mgf(bump(3.0), lambda) == doctest::Approx(simpson_mgf(bump(3.0), lambda, 3.0)).epsilon(1e-9));
  }
  for (double lambda : {0.2, 0.9, 1.5}) {
    CHECK(mgf(laplace(2.0), lambda) == doctest::Approx(simpson_mgf(laplace(2.0), lambda, 80.0)).epsilon(1e-7));
  }
  const Kernel tab = make_tabulated_kernel({{-1.0, 0.5}, {0.0, 1.0}, {1.0, 0.5}});
  CHECK(mgf(tab, 0.7) == doctest::Approx(simpson_mgf(tab, 0.7, 1.0)).epsilon(1e-9));
}

TEST_CASE("kernels integrate to one and are symmetric") {
  for (const Kernel& k : {gaussian(1.5), laplace(0.7), bump(2.0)}) {
    const double R = std::isfinite(k.support_radius()) ? k.support_radius() : 200.0;
    CHECK(simpson_mgf(k, 0.0, R) == doctest::Approx(1.0).epsilon(1e-8));
    for (double x : {0.3, 1.0, 1.9}) CHECK(k.density(x) == k.density(-x));
  }
}

TEST_CASE("rates at or beyond the exponential moment bound are rejected") {
  CHECK_THROWS_AS(mgf(laplace(2.0), 2.0), Error);
  CHECK_THROWS_AS(mgf(gaussian(1.0), -0.1), Error);
  try {
    (void)mgf(laplace(2.0), 2.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RateOutOfRange);
  }
}

TEST_CASE("tabulated kernel validation") {
  auto kind_of = [](std::vector<std::pair<double, double>> pts) {
    try {
      (void)make_tabulated_kernel(std::move(pts));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;  // sentinel: no error
  };
  CHECK(kind_of({{-1.0, 0.2}, {0.0, 1.0}, {1.0, 0.5}}) == ErrorKind::NonSymmetric);
  CHECK(kind_of({{-2.0, 0.5}, {-1.0, 0.1}, {0.0, 1.0}, {1.0, 0.1}, {2.0, 0.5}}) == ErrorKind::NotUnimodal);
  CHECK(kind_of({{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}) == ErrorKind::NonNormalizable);
  const Kernel k = make_tabulated_kernel({{1.0, 0.5}, {-1.0, 0.5}, {0.0, 1.0}});
  CHECK(k.density(0.0) == doctest::Approx(2.0 / 3.0));  // piecewise-linear mass before scaling is 1.5
  CHECK(k.density(2.0) == 0.0);
}

TEST_CASE("discretized stencils sum to one and capture the tail") {
  const DiscreteKernel dk = discretize(gaussian(1.0), 0.1, 1e-12);
  CHECK(std::accumulate(dk.weights.begin(), dk.weights.end(), 0.0) == 1.0);
  CHECK(dk.weights.size() == 2 * dk.half_width + 1);
  CHECK(dk.tail_mass < 1e-12);
  CHECK(gaussian(1.0).tail_mass(static_cast<double>(dk.half_width - 1) * 0.1) >= 1e-12);
  CHECK(dk[3] == dk[-3]);
  // Trapezoid sums of smooth rapidly decaying densities are very accurate.
  CHECK(dk.raw_sum == doctest::Approx(1.0).epsilon(1e-10));

  const DiscreteKernel db = discretize(bump(1.0), 0.1, 1e-12);
  CHECK(db.half_width == 10);
}

TEST_CASE("stencil half-width overflow is reported") {
  DiscretizeOptions opts;
  opts.max_half_width = 50;
  try {
    (void)discretize(laplace(0.01), 0.1, 1e-12, opts);
    FAIL("expected HalfWidthOverflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HalfWidthOverflow);
  }
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0) ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}
