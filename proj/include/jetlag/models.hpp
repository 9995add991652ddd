#pragma once

#include <functional>

#include "jetlag/geometry.hpp"
#include "jetlag/lagrangian.hpp"

namespace jetlag {

/// Kinetic energy in polar coordinates, L = (m/2)(ṙ² + r²φ̇²). Exact partials and spray.
class FreePolarModel final : public LagrangianModel {
 public:
  explicit FreePolarModel(double m = 1.0);

  std::string_view name() const override { return "free_polar"; }
  double value(const JetPoint& pt) const override;
  std::optional<double> exact_partial(const JetPoint& pt, const MultiIndex& alpha) const override;
  std::optional<Vec2> exact_spray(const JetPoint& pt) const override;
  double mass() const override { return m_; }

 private:
  double m_;
};

/// L = m c h¹¹ φ_ij(x) yⁱyʲ + (2e/m) A_i(x) yⁱ + F(t, x) for a charged particle.
struct ElectrodynamicsFixtureParams {
  double m = 1.0;
  double c = 1.0;
  double e = 1.0;
  std::function<Mat2(const Vec2&)> phi;       // gravitational potentials φ_ij
  std::function<Vec2(const Vec2&)> A;         // electromagnetic potential A_i
  std::function<Mat2(const Vec2&)> A_jacobian;  // [i][j] = ∂A_i/∂xʲ
  std::function<double(double, const Vec2&)> F_pot;
  bool phi_constant = false;  // enables exact partials with one spatial derivative

  /// Flat φ_ij = δ_ij, A = (a·x², b·x¹) and F_pot = 0.
  static ElectrodynamicsFixtureParams linear(double m, double c, double e, double a, double b);
};

class ElectrodynamicsModel final : public LagrangianModel {
 public:
  explicit ElectrodynamicsModel(ElectrodynamicsFixtureParams params);

  std::string_view name() const override { return "electrodynamics_fixture"; }
  double value(const JetPoint& pt) const override;
  /// Fibre derivatives, plus one spatial derivative when φ_ij is constant; FD elsewhere.
  std::optional<double> exact_partial(const JetPoint& pt, const MultiIndex& alpha) const override;
  std::optional<std::string> domain_violation(const JetPoint& pt) const override;
  double mass() const override { return params_.m; }

  const ElectrodynamicsFixtureParams& params() const { return params_; }

 private:
  ElectrodynamicsFixtureParams params_;
};

/// −(e/2m)(∂A_i/∂xʲ − ∂A_j/∂xⁱ).
EMForm electrodynamics_closed_em(const ElectrodynamicsFixtureParams& params, const Vec2& x);

}  // namespace jetlag
