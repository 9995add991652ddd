#include "jetlag/torsion.hpp"

#include <algorithm>
#include <cmath>

namespace jetlag {

namespace {

struct FieldGradient {
  Mat2 dt{};
  std::array<Mat2, 2> dx{};
  std::array<Mat2, 2> dy{};
};

FieldGradient gradient(const MatrixField& f, const JetPoint& pt, const StepScales& scales, double rel,
                       bool with_time, bool with_space) {
  FieldGradient out;
  auto d = [&](Var v) { return field_derivative(f, pt, v, scales[static_cast<std::size_t>(v)], rel); };
  if (with_time) out.dt = d(Var::t);
  for (std::size_t i = 0; i < 2; ++i) {
    if (with_space) out.dx[i] = d(spatial_var(i));
    out.dy[i] = d(fibre_var(i));
  }
  return out;
}

// Accumulates |residual| / max(|terms|) per entry, with a point-wide floor.
class ScaledResidual {
 public:
  void add(double residual, std::initializer_list<double> terms, double natural = 0.0) {
    double s = natural;
    for (double t : terms) s = std::max(s, std::abs(t));
    entries_.push_back({std::abs(residual), s});
    global_ = std::max(global_, s);
  }
  double max() const {
    const double floor = std::max(1e-10 * global_, 1e-300);
    double out = 0.0;
    for (const auto& e : entries_) out = std::max(out, e.residual / std::max(e.scale, floor));
    return out;
  }
  double global_scale() const { return global_; }

 private:
  struct Entry {
    double residual;
    double scale;
  };
  std::vector<Entry> entries_;
  double global_ = 0.0;
};

}  // namespace

TorsionSet torsions_from(const JetPoint& pt, const CartanConnection& cartan, const MatrixField& N_field,
                         const StepScales& scales, double rel_step) {
  const Mat2 N = N_field(pt);
  const FieldGradient dN = gradient(N_field, pt, scales, rel_step, true, true);

  TorsionSet ts;
  // D[k][i][j] = δN⁽ᵏ⁾ᵢ/δxʲ
  Tensor3 D{};
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        D[k][i][j] = dN.dx[j][k][i] - N[0][j] * dN.dy[0][k][i] - N[1][j] * dN.dy[1][k][i];

  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 2; ++j) {
      ts.T[k][j] = -cartan.G_time[k][j];
      ts.calP[k][j] = -cartan.G_time[k][j];
      ts.H_tor[k][j] = -dN.dt[k][j];
    }
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        ts.R[k][i][j] = D[k][i][j] - D[k][j][i];
        ts.P_mixed[k][i][j] = dN.dy[j][k][i] - cartan.L_spatial[k][i][j];
        ts.P_vert[k][i][j] = cartan.C_vertical[k][i][j];
      }
  }
  return ts;
}

TorsionSet torsions(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  const GeometryBundle b = geometry_bundle(model, pt, opts);
  MatrixField N_field = [&](const JetPoint& p) { return geometry_bundle(model, p, opts).nonlinear.N; };
  return torsions_from(pt, b.cartan, N_field, model.step_scales(pt));
}

double MetricityResiduals::max() const { return std::max({time_horizontal, space_horizontal, vertical}); }

MetricityResiduals metricity_residuals_for(const JetPoint& pt, const MatrixField& g_field, const Mat2& N,
                                           const CartanConnection& cc, const StepScales& scales,
                                           double rel_step) {
  const Mat2 g = g_field(pt);
  const FieldGradient dg = gradient(g_field, pt, scales, rel_step, true, true);

  // Natural size of ∂g_ij along a coordinate with characteristic length s: √|g_ii g_jj| / s.
  auto natural = [&](std::size_t i, std::size_t j, Var v) {
    return std::sqrt(std::abs(g[i][i] * g[j][j])) / scales[static_cast<std::size_t>(v)];
  };
  ScaledResidual time_res, space_res, vert_res;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      // g_ij/1 = ∂g_ij/∂t − M⁽ᵠ⁾ ∂g_ij/∂y^q − g_sj Gˢᵢ₁ − g_is Gˢⱼ₁, with M = 0.
      double a = 0.0, b = 0.0;
      for (std::size_t s = 0; s < 2; ++s) {
        a += g[s][j] * cc.G_time[s][i];
        b += g[i][s] * cc.G_time[s][j];
      }
      time_res.add(dg.dt[i][j] - a - b, {dg.dt[i][j], a, b}, natural(i, j, Var::t));

      for (std::size_t k = 0; k < 2; ++k) {
        const double delta = dg.dx[k][i][j] - N[0][k] * dg.dy[0][i][j] - N[1][k] * dg.dy[1][i][j];
        double la = 0.0, lb = 0.0, ca = 0.0, cb = 0.0;
        for (std::size_t s = 0; s < 2; ++s) {
          la += g[s][j] * cc.L_spatial[s][i][k];
          lb += g[i][s] * cc.L_spatial[s][j][k];
          ca += g[s][j] * cc.C_vertical[s][i][k];
          cb += g[i][s] * cc.C_vertical[s][j][k];
        }
        space_res.add(delta - la - lb, {delta, la, lb}, natural(i, j, spatial_var(k)));
        vert_res.add(dg.dy[k][i][j] - ca - cb, {dg.dy[k][i][j], ca, cb}, natural(i, j, fibre_var(k)));
      }
    }
  return {time_res.max(), space_res.max(), vert_res.max()};
}

MetricityResiduals metricity_residuals(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  const GeometryBundle b = geometry_bundle(model, pt, opts);
  MatrixField g_field = [&](const JetPoint& p) { return metric_from_lagrangian(model, p, opts).g; };
  return metricity_residuals_for(pt, g_field, b.nonlinear.N, b.cartan, model.step_scales(pt));
}

double maxwell_vertical_residual_for(const JetPoint& pt, const MatrixField& F_field, const Tensor3& C,
                                     const StepScales& scales, double rel_step) {
  const Mat2 F = F_field(pt);
  const FieldGradient dF = gradient(F_field, pt, scales, rel_step, false, false);

  // V[i][j][k] = F₍ᵢ₎ⱼ|⁽¹⁾₍ₖ₎ and the magnitude of the terms that build it.
  Tensor3 V{}, mag{};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t s = 0; s < 2; ++s) {
          a += F[s][j] * C[s][i][k];
          b += F[i][s] * C[s][j][k];
        }
        V[i][j][k] = dF.dy[k][i][j] - a - b;
        mag[i][j][k] = std::max({std::abs(dF.dy[k][i][j]), std::abs(a), std::abs(b)});
      }
  ScaledResidual res;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        res.add(V[i][j][k] + V[j][k][i] + V[k][i][j], {mag[i][j][k], mag[j][k][i], mag[k][i][j]});
      }
  return res.max();
}

double maxwell_vertical_residual(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  const GeometryBundle b = geometry_bundle(model, pt, opts);
  MatrixField F_field = [&](const JetPoint& p) { return geometry_bundle(model, p, opts).em.F; };
  return maxwell_vertical_residual_for(pt, F_field, b.cartan.C_vertical, model.step_scales(pt));
}

}  // namespace jetlag
