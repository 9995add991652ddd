#pragma once

// Independent reference implementations used only by the tests.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "jetlag/jet_point.hpp"

namespace oracle {

inline double gk(auto f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-15);
}

inline double e1(double x) {
  return gk([](double u) { return std::exp(-u) / u; }, x, std::numeric_limits<double>::infinity());
}

// Principal value of ∫₋∞ˣ eᵘ/u du, split around the pole at 0.
inline double ei(double x) {
  if (x < 0.0) return -e1(-x);
  const double pv = 2.0 * gk([](double u) { return u == 0.0 ? 1.0 : std::sinh(u) / u; }, 0.0, 1.0);
  return -e1(1.0) + pv + gk([](double u) { return std::exp(u) / u; }, 1.0, x);
}

// Seeded sample of the monolayer check domain.
inline std::vector<jetlag::JetPoint> monolayer_sample(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t(1e-4, 1e-2), r(0.1, 1.0), rd(-5.0, -0.1), pd(-1.0, 1.0),
      phi(0.0, 6.0);
  std::vector<jetlag::JetPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double tt = t(rng), rr = r(rng), ph = phi(rng), rdd = rd(rng), pdd = pd(rng);
    out.push_back(jetlag::JetPoint::make(tt, rr, ph, rdd, pdd));
  }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
