#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "jetlag/jet_point.hpp"

namespace jetlag {

/// Uniform draws from mt19937_64 built from the top 53 bits, so sample sequences do not depend
/// on the standard library's distribution implementation.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 rng_;
};

/// Box of jet coordinates; a draw takes t, r, φ, ṙ, φ̇ in that order.
struct SampleDomain {
  double t_lo = 1e-4, t_hi = 1e-2;
  double r_lo = 0.1, r_hi = 1.0;
  double phi_lo = 0.0, phi_hi = 6.0;
  double rdot_lo = -5.0, rdot_hi = -0.1;
  double phidot_lo = -1.0, phidot_hi = 1.0;
};

inline std::vector<JetPoint> sample_points(std::size_t n, std::uint64_t seed, const SampleDomain& d = {}) {
  Sampler s(seed);
  std::vector<JetPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = s.uniform(d.t_lo, d.t_hi);
    const double r = s.uniform(d.r_lo, d.r_hi);
    const double phi = s.uniform(d.phi_lo, d.phi_hi);
    const double rdot = s.uniform(d.rdot_lo, d.rdot_hi);
    const double phidot = s.uniform(d.phidot_lo, d.phidot_hi);
    out.push_back(JetPoint::make(t, r, phi, rdot, phidot));
  }
  return out;
}

}  // namespace jetlag
