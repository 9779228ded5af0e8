#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qheat/error.hpp"

namespace qheat {

/// Taylor coefficients of an analytic function at 0 from samples on a circle:
/// returns d^n f(0) for n = 0..max_order via the trapezoidal Cauchy integral.
/// The error decays geometrically in `points` for entire functions.
template <typename Fn>
std::vector<std::complex<double>> contour_derivatives(Fn&& f, int max_order, double radius, int points = 64) {
  require(max_order >= 0 && points > max_order && radius > 0.0, "bad contour parameters");
  std::vector<std::complex<double>> samples(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / points;
    samples[static_cast<std::size_t>(j)] = f(std::polar(radius, theta));
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(max_order) + 1);
  double factorial = 1.0;
  for (int n = 0; n <= max_order; ++n) {
    if (n > 0) factorial *= n;
    std::complex<double> acc = 0.0;
    for (int j = 0; j < points; ++j) acc += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * n * j / points);
    out[static_cast<std::size_t>(n)] = acc * factorial / (points * std::pow(radius, n));
  }
  return out;
}

/// Central finite-difference estimate of d^order f at u0 (orders 1-4),
/// with one Richardson step combining steps h and h/2.
template <typename Fn>
std::complex<double> central_difference(Fn&& f, int order, std::complex<double> u0, double h = 1e-3) {
  require(order >= 1 && order <= 4, "finite-difference order must be in 1..4");
  auto stencil = [&](double s) -> std::complex<double> {
    auto at = [&](double k) { return f(u0 + k * s); };
    switch (order) {
      case 1: return (at(1) - at(-1)) / (2.0 * s);
      case 2: return (at(1) - 2.0 * at(0) + at(-1)) / (s * s);
      case 3: return (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * s * s * s);
      default: return (at(2) - 4.0 * at(1) + 6.0 * at(0) - 4.0 * at(-1) + at(-2)) / (s * s * s * s);
    }
  };
  return (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0;
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qheat
