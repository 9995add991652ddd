#pragma once

#include <optional>

#include "jetlag/geometry.hpp"
#include "jetlag/lagrangian.hpp"
#include "jetlag/torsion.hpp"

namespace jetlag {

/// Physical constants of the 2D-monolayer Lagrangian.
struct MonolayerParams {
  double m = 1.0;        // mass
  double p = 10.0;       // monolayer parameter
  double V_abs = 1000.0; // |V|, compressing rate magnitude
  std::optional<double> R0;  // initial radius, needed only by the large-time resonant form

  /// Throws DomainError unless m, p, |V| (and R0 when set) are strictly positive.
  void validate() const;
  double require_R0() const;
};

/// Sub-parameters of p = π²q²ρ₀² / (εε₀R₀²).
struct PhysicalSubParams {
  double q = 1.0;
  double epsilon = 1.0;
  double epsilon0 = 1.0;
  double rho0 = 1.0;
  double R0 = 1.0;
};

double pressure_param(const PhysicalSubParams& sub);

/// U and the derivatives used by the closed forms; all analytic.
struct PotentialDerivatives {
  double U = 0.0;
  double U_r = 0.0;
  double U_rr = 0.0;
  double U_t = 0.0;
  double U_tt = 0.0;
};

/// The monomolecular layer function U(t, r). At t = 0 the f-term is dropped, since its
/// (|V|t)⁶ coefficient vanishes. Throws DomainError for r ≤ 0.
double potential_U(double t, double r, const MonolayerParams& params);
PotentialDerivatives potential_derivatives(double t, double r, const MonolayerParams& params);

/// K = p r⁵ |V| e^(2|V|t/r), the coefficient of ṙ⁻¹ in the Lagrangian.
double velocity_coefficient_K(double t, double r, const MonolayerParams& params);

/// Electrocapillarity potential U_s = −K ṙ⁻¹ + U.
double electrocapillarity_potential(const JetPoint& pt, const MonolayerParams& params);

/// L = (m/2)ṙ² + (mr²/2)φ̇² − K ṙ⁻¹ + U. Throws DomainError at r ≤ 0 or ṙ = 0.
double monolayer_lagrangian(const JetPoint& pt, const MonolayerParams& params);

class MonolayerModel final : public LagrangianModel {
 public:
  explicit MonolayerModel(MonolayerParams params);

  std::string_view name() const override { return "monolayer"; }
  double value(const JetPoint& pt) const override;
  /// (m/2)ṙ², (mr²/2)φ̇², −Kṙ⁻¹ and U.
  std::size_t term_count() const override { return 4; }
  double term(std::size_t k, const JetPoint& pt) const override;
  std::optional<std::string> domain_violation(const JetPoint& pt) const override;
  StepScales step_scales(const JetPoint& pt) const override;
  std::optional<Vec2> exact_spray(const JetPoint& pt) const override;
  bool singular_at_zero_rdot() const override { return true; }
  double mass() const override { return params_.m; }

  const MonolayerParams& params() const { return params_; }

 private:
  MonolayerParams params_;
};

/// g = diag((m − 2K ṙ⁻³)/2, mr²/2) with its closed-form inverse. Throws SingularMetricError near g₁₁ = 0.
Metric closed_metric(const JetPoint& pt, const MonolayerParams& params);

enum class SprayForm { exact, polynomial };

/// Spatial semispray: the exact fraction, or its polynomial expansion (leading order in m ṙ³/2K).
Semispray closed_semispray(const JetPoint& pt, const MonolayerParams& params, SprayForm form = SprayForm::exact);

/// The auxiliary function 𝒰(t, r) of the nonlinear connection, and ∂𝒰/∂t.
double script_U(double t, double r, const MonolayerParams& params);
double script_U_t(double t, double r, const MonolayerParams& params);

/// The approximate nonlinear connection, equal to ∂G_polynomial/∂y.
NonlinearConnection closed_nonlinear_connection(const JetPoint& pt, const MonolayerParams& params);

/// ∂G_exact/∂y in closed form (quotient rule on the exact fraction).
NonlinearConnection exact_nonlinear_connection(const JetPoint& pt, const MonolayerParams& params);

/// Which nonlinear connection feeds the N-dependent Cartan and EM components.
enum class ConnectionSource {
  approximate,  // the first-order large-K nonlinear connection
  exact,    // the exact nonlinear connection substituted into the same structural formulas
};

/// Cartan components G_time, C, L. Components not listed are zero.
CartanConnection closed_cartan(const JetPoint& pt, const MonolayerParams& params,
                               ConnectionSource source = ConnectionSource::approximate);

/// Approximate torsion components, built on the approximate nonlinear connection.
TorsionSet closed_torsions(const JetPoint& pt, const MonolayerParams& params);

/// [3mr/2 + m² e^(−2|V|t/r) ṙ³ / (4p|V|r⁴)], the factor whose product with φ̇ vanishes iff E_YM = 0.
double ym_bracket(const JetPoint& pt, const MonolayerParams& params);

struct EMEnergy {
  EMForm em;
  double ym_energy = 0.0;
  bool zero_energy = false;  // |F₍₁₎₂| < tol
};

/// Approximate EM form F₍₂₎₁ = −F₍₁₎₂ = ½·bracket·φ̇ and E_YM = (1/m)F₍₁₎₂².
EMEnergy closed_em_and_ym(const JetPoint& pt, const MonolayerParams& params, double zero_tol = 1e-12);

/// The EM display evaluated on closed_metric, the exact nonlinear connection and exact-source Cartan L.
EMForm exact_closed_em_form(const JetPoint& pt, const MonolayerParams& params);

/// Instanton energy (m/2)ṙ² + (mr²/2)φ̇² + K ṙ⁻¹ − U.
double instanton_energy(const JetPoint& pt, const MonolayerParams& params);

}  // namespace jetlag
