#pragma once

#include <functional>

#include "jetlag/geometry.hpp"

namespace jetlag {

/// The six torsion d-tensor families of a Cartan connection, upper (k) index first:
///   T[k][j]          = Tᵏ₁ⱼ
///   H_tor[k][j]      = H₍₁₎₁ⱼ⁽ᵏ⁾
///   R[k][i][j]       = R₍₁₎ᵢⱼ⁽ᵏ⁾
///   P_mixed[k][i][j] = P₍₁₎ᵢ₍ⱼ₎⁽ᵏ⁾⁽¹⁾
///   P_vert[k][i][j]  = Pᵏ⁽¹⁾ᵢ₍ⱼ₎
///   calP[k][j]       = 𝒫₍₁₎₁₍ⱼ₎⁽ᵏ⁾⁽¹⁾
struct TorsionSet {
  Mat2 T{};
  Mat2 H_tor{};
  Tensor3 R{};
  Tensor3 P_mixed{};
  Tensor3 P_vert{};
  Mat2 calP{};
};

using MatrixField = std::function<Mat2(const JetPoint&)>;

/// Generic torsion formulas for an arbitrary nonlinear-connection field; derivatives of N are
/// nested central differences with steps `rel_step · scales`.
TorsionSet torsions_from(const JetPoint& pt, const CartanConnection& cartan,
                         const MatrixField& N_field, const StepScales& scales,
                         double rel_step = 1e-2);

TorsionSet torsions(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts = {});

/// Residuals of g_ij/1 = 0, g_ij|k = 0 and g_ij|⁽¹⁾₍ₖ₎ = 0. Each component is divided by the largest
/// magnitude among the terms it is made of and √|g_ii g_jj| / (coordinate scale).
struct MetricityResiduals {
  double time_horizontal = 0.0;
  double space_horizontal = 0.0;
  double vertical = 0.0;
  double max() const;
};

/// Derivatives of g come from nested differences of `g_field`, independent of the partials that
/// built `cartan`, so the residuals test the connection rather than restate its definition.
MetricityResiduals metricity_residuals_for(const JetPoint& pt, const MatrixField& g_field,
                                           const Mat2& N, const CartanConnection& cartan,
                                           const StepScales& scales, double rel_step = 1e-2);

MetricityResiduals metricity_residuals(const LagrangianModel& model, const JetPoint& pt,
                                       const DiffOptions& opts = {});

/// max over {i,j,k} of |Σ_cyclic F₍ᵢ₎ⱼ⁽¹⁾|⁽¹⁾₍ₖ₎|, scaled like the metricity residuals. With two
/// indices every triple repeats one, so this reduces to the antisymmetry of the vertical derivative.
double maxwell_vertical_residual_for(const JetPoint& pt, const MatrixField& F_field,
                                     const Tensor3& C, const StepScales& scales,
                                     double rel_step = 1e-2);

double maxwell_vertical_residual(const LagrangianModel& model, const JetPoint& pt,
                                 const DiffOptions& opts = {});

}  // namespace jetlag
