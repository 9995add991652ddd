#include "jetlag/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "jetlag/errors.hpp"

namespace jetlag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSeriesLimit = 40.0;

// γ + ln|z| + Σ zᵏ/(k·k!), used for 0 < z ≤ 40 (all terms positive) and −1 ≤ z < 0.
double ei_series(double z) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= z / k;
    const double contrib = term / k;
    sum += contrib;
    if (std::abs(contrib) < kEps * std::abs(sum)) break;
  }
  return std::numbers::egamma + std::log(std::abs(z)) + sum;
}

// E₁(x) for x > 1 by the modified Lentz continued fraction.
double e1_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x);
}

// z·e^(−z)·Ei(z) ≈ Σ k!/zᵏ, truncated at the smallest term.
double ei_asymptotic_scaled(double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * k / z;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

}  // namespace

double exp_integral_f(double z) {
  if (z == 0.0) throw DomainError("exp_integral_f: logarithmic singularity at z = 0");
  if (std::isnan(z)) return z;
  if (z < 0.0) {
    const double x = -z;
    return x <= 1.0 ? ei_series(z) : -e1_continued_fraction(x);
  }
  if (z <= kSeriesLimit) return ei_series(z);
  return std::exp(z) / z * ei_asymptotic_scaled(z);
}

double exp_neg_times_f(double z) {
  if (z > kSeriesLimit) return ei_asymptotic_scaled(z) / z;
  return std::exp(-z) * exp_integral_f(z);
}

}  // namespace jetlag
