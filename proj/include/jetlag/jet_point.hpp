#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace jetlag {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;
/// Rank-3 array stored as t[a][b][c]; the meaning of each slot is documented by the owner.
using Tensor3 = std::array<Mat2, 2>;

/// Coordinates of the 1-jet space J¹(T, ℝ²), in evaluation order.
/// Spatial and fibre indices are 0-based: index 0 is r (resp. ṙ), index 1 is φ (resp. φ̇).
enum class Var : std::size_t { t = 0, r = 1, phi = 2, rdot = 3, phidot = 4 };
inline constexpr std::size_t kNumVars = 5;

inline constexpr Var spatial_var(std::size_t i) { return i == 0 ? Var::r : Var::phi; }
inline constexpr Var fibre_var(std::size_t i) { return i == 0 ? Var::rdot : Var::phidot; }

/// A point (t, r, φ, ṙ, φ̇) of the jet space. φ is never reduced mod 2π.
struct JetPoint {
  double t = 0.0;
  Vec2 x{1.0, 0.0};  // (r, φ)
  Vec2 y{0.0, 0.0};  // (ṙ, φ̇)

  static JetPoint make(double t, double r, double phi, double rdot, double phidot) {
    return JetPoint{t, {r, phi}, {rdot, phidot}};
  }

  double r() const { return x[0]; }
  double phi() const { return x[1]; }
  double rdot() const { return y[0]; }
  double phidot() const { return y[1]; }

  double get(Var v) const {
    switch (v) {
      case Var::t: return t;
      case Var::r: return x[0];
      case Var::phi: return x[1];
      case Var::rdot: return y[0];
      case Var::phidot: return y[1];
    }
    return 0.0;
  }

  JetPoint shifted(Var v, double h) const {
    JetPoint q = *this;
    switch (v) {
      case Var::t: q.t += h; break;
      case Var::r: q.x[0] += h; break;
      case Var::phi: q.x[1] += h; break;
      case Var::rdot: q.y[0] += h; break;
      case Var::phidot: q.y[1] += h; break;
    }
    return q;
  }

  bool finite() const {
    return std::isfinite(t) && std::isfinite(x[0]) && std::isfinite(x[1]) &&
           std::isfinite(y[0]) && std::isfinite(y[1]);
  }

  std::string to_string() const;
};

/// The time manifold ([0,∞), h₁₁ = 1) with vanishing Christoffel symbol.
struct TimeMetric {
  static constexpr double h11 = 1.0;
  static constexpr double kappa111 = 0.0;
};

}  // namespace jetlag
