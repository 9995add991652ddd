#pragma once

#include <optional>

#include "jetlag/jet_point.hpp"
#include "jetlag/lagrangian.hpp"
#include "jetlag/numeric_partials.hpp"

namespace jetlag {

/// Fundamental metric g_ij = ½ ∂²L/∂yⁱ∂yʲ with its inverse gⁱʲ.
struct Metric {
  Mat2 g{};
  Mat2 g_inv{};
  double det_g = 0.0;
};

/// Canonical semispray (H, G); H vanishes identically because κ¹₁₁ = 0.
struct Semispray {
  Vec2 H{0.0, 0.0};
  Vec2 G{0.0, 0.0};
};

/// Canonical nonlinear connection; N[i][j] = N₍₁₎ⱼ⁽ⁱ⁾ = ∂Gⁱ/∂yʲ, M = 2H = 0.
struct NonlinearConnection {
  Vec2 M{0.0, 0.0};
  Mat2 N{};
};

/// Cartan canonical connection, all arrays upper index first:
///   G_time[k][j]   = Gᵏⱼ₁
///   L_spatial[i][j][k] = Lⁱⱼₖ
///   C_vertical[i][j][k] = Cⁱ⁽¹⁾ⱼ₍ₖ₎
struct CartanConnection {
  Mat2 G_time{};
  Tensor3 L_spatial{};
  Tensor3 C_vertical{};
  double kappa111 = 0.0;
};

/// Electromagnetic d-form, F[i][j] = F₍ᵢ₎ⱼ⁽¹⁾.
struct EMForm {
  Mat2 F{};
};

/// Coefficients of δ/δxʲ = ∂/∂xʲ − N₍₁₎ⱼ⁽ᵠ⁾ ∂/∂y^q at one point.
struct AdaptedFrame {
  Mat2 N{};
};

/// Every partial derivative of L up to third order used by the generic construction.
/// Indices follow the 0-based spatial/fibre convention of JetPoint.
struct LagrangianJet {
  Vec2 L_x{};        // ∂L/∂xˢ
  Mat2 L_yy{};       // ∂²L/∂yᵃ∂yᵇ
  Mat2 L_xy{};       // [q][s] = ∂²L/∂x^q∂yˢ
  Vec2 L_ty{};       // ∂²L/∂t∂yˢ
  Tensor3 L_yyy{};   // [a][b][c] = ∂³L/∂yᵃ∂yᵇ∂yᶜ
  Tensor3 L_xyy{};   // [q][a][b] = ∂³L/∂x^q∂yᵃ∂yᵇ
  Mat2 L_tyy{};      // ∂³L/∂t∂yᵃ∂yᵇ
};

LagrangianJet lagrangian_jet(const LagrangianModel& model, const JetPoint& pt,
                             const DiffOptions& opts = {});

/// Inverse of a symmetric 2×2 metric by adjugate/determinant. Throws SingularMetricError when
/// |det| ≤ tol·(|g₁₁ g₂₂| + |g₁₂|²).
Metric invert_metric(const Mat2& g, double tol = 1e-12);

/// Everything the generic construction yields at a point, built from one LagrangianJet.
struct GeometryBundle {
  JetPoint point;
  Metric metric;
  Semispray semispray;
  NonlinearConnection nonlinear;
  CartanConnection cartan;
  EMForm em;
  double ym_energy = 0.0;
  /// δg_ab/δxᵏ stored [a][b][k], from partials (not from nested differences).
  Tensor3 adapted_dg{};
};

Metric metric_from_lagrangian(const LagrangianModel& model, const JetPoint& pt,
                              const DiffOptions& opts = {});
Semispray semispray_from_lagrangian(const LagrangianModel& model, const JetPoint& pt,
                                    const DiffOptions& opts = {});
NonlinearConnection nonlinear_connection(const LagrangianModel& model, const JetPoint& pt,
                                         const DiffOptions& opts = {});
CartanConnection cartan_connection(const LagrangianModel& model, const JetPoint& pt,
                                   const DiffOptions& opts = {});
EMForm em_form(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts = {});

/// The full generic bundle; the free functions above are projections of it.
GeometryBundle geometry_bundle(const LagrangianModel& model, const JetPoint& pt,
                               const DiffOptions& opts = {});

/// Assemble geometry from already-known jet partials (exposed for tests and custom models).
GeometryBundle geometry_from_jet(const JetPoint& pt, const LagrangianJet& jet, double mass);

/// F₍ᵢ₎ⱼ⁽¹⁾ = (h¹¹/2)[g_js N⁽ˢ⁾ᵢ − g_is N⁽ˢ⁾ⱼ + (g_iq Lᵠⱼₛ − g_jq Lᵠᵢₛ) yˢ].
EMForm em_form_from(const Mat2& g, const Mat2& N, const Tensor3& L, const Vec2& y);

/// (1/2m)·Tr(F·ᵀF). Throws DomainError for m ≤ 0.
double ym_energy(const EMForm& F, double m);

/// δf/δxʲ = ∂f/∂xʲ − N⁽ᵠ⁾ⱼ ∂f/∂y^q for a scalar field, by nested central differences.
double adapted_derivative(const AdaptedFrame& frame, const std::function<double(const JetPoint&)>& field,
                          const JetPoint& pt, std::size_t j, const StepScales& scales,
                          double rel_step = 5e-3);

}  // namespace jetlag
