#include "jetlag/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "jetlag/errors.hpp"

namespace jetlag {

LagrangianJet lagrangian_jet(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  model.require_valid(pt);
  LagrangianJet jet;
  auto d = [&](std::initializer_list<Var> vars) { return partial(model, pt, MultiIndex(vars), opts); };

  for (std::size_t s = 0; s < 2; ++s) {
    const Var xs = spatial_var(s);
    const Var ys = fibre_var(s);
    jet.L_x[s] = d({xs});
    jet.L_ty[s] = d({Var::t, ys});
    for (std::size_t q = 0; q < 2; ++q) jet.L_xy[q][s] = d({spatial_var(q), ys});
  }
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = a; b < 2; ++b) {
      const Var ya = fibre_var(a);
      const Var yb = fibre_var(b);
      jet.L_yy[a][b] = jet.L_yy[b][a] = d({ya, yb});
      jet.L_tyy[a][b] = jet.L_tyy[b][a] = d({Var::t, ya, yb});
      for (std::size_t q = 0; q < 2; ++q) {
        jet.L_xyy[q][a][b] = jet.L_xyy[q][b][a] = d({spatial_var(q), ya, yb});
      }
    }
  }
  // ∂³L/∂y³ is totally symmetric: four distinct components.
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = a; b < 2; ++b)
      for (std::size_t c = b; c < 2; ++c) {
        const double v = d({fibre_var(a), fibre_var(b), fibre_var(c)});
        const std::size_t idx[3] = {a, b, c};
        std::size_t perm[3] = {0, 1, 2};
        do {
          jet.L_yyy[idx[perm[0]]][idx[perm[1]]][idx[perm[2]]] = v;
        } while (std::next_permutation(perm, perm + 3));
      }
  return jet;
}

Metric invert_metric(const Mat2& g, double tol) {
  Metric m;
  m.g = g;
  m.det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const double scale = std::abs(g[0][0] * g[1][1]) + std::abs(g[0][1] * g[1][0]);
  if (!(std::abs(m.det_g) > tol * scale) || !std::isfinite(m.det_g)) {
    throw SingularMetricError("metric is singular (det g = " + std::to_string(m.det_g) + ")");
  }
  const double inv = 1.0 / m.det_g;
  m.g_inv = {{{g[1][1] * inv, -g[0][1] * inv}, {-g[1][0] * inv, g[0][0] * inv}}};
  return m;
}

GeometryBundle geometry_from_jet(const JetPoint& pt, const LagrangianJet& jet, double mass) {
  GeometryBundle out;
  out.point = pt;
  const Vec2& y = pt.y;

  Mat2 g{};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) g[a][b] = 0.5 * jet.L_yy[a][b];
  g[0][1] = g[1][0] = 0.5 * (g[0][1] + g[1][0]);
  out.metric = invert_metric(g);
  const Mat2& gi = out.metric.g_inv;

  // dg_ab/dy^c, dg_ab/dx^c (stored [a][b][c]) and dg_ab/dt.
  Tensor3 dg_dy{}, dg_dx{};
  Mat2 dg_dt{};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      dg_dt[a][b] = 0.5 * jet.L_tyy[a][b];
      for (std::size_t c = 0; c < 2; ++c) {
        dg_dy[a][b][c] = 0.5 * jet.L_yyy[a][b][c];
        dg_dx[a][b][c] = 0.5 * jet.L_xyy[c][a][b];
      }
    }

  // Semispray: Gⁱ = (gⁱˢ/4)·B_s with B_s = ∂²L/∂x^q∂yˢ·y^q − ∂L/∂xˢ + ∂²L/∂t∂yˢ.
  Vec2 B{};
  for (std::size_t s = 0; s < 2; ++s) {
    B[s] = jet.L_xy[0][s] * y[0] + jet.L_xy[1][s] * y[1] - jet.L_x[s] + jet.L_ty[s];
  }
  for (std::size_t i = 0; i < 2; ++i) out.semispray.G[i] = 0.25 * (gi[i][0] * B[0] + gi[i][1] * B[1]);

  // N⁽ⁱ⁾ⱼ = ∂Gⁱ/∂yʲ = ¼[∂gⁱˢ/∂yʲ·B_s + gⁱˢ·∂B_s/∂yʲ], ∂gⁱˢ/∂yʲ = −gⁱᵃ (∂g_ab/∂yʲ) gᵇˢ.
  for (std::size_t j = 0; j < 2; ++j) {
    Vec2 dB{};
    for (std::size_t s = 0; s < 2; ++s) {
      dB[s] = jet.L_xyy[0][s][j] * y[0] + jet.L_xyy[1][s][j] * y[1] + jet.L_xy[j][s] - jet.L_xy[s][j] +
              jet.L_tyy[s][j];
    }
    for (std::size_t i = 0; i < 2; ++i) {
      double acc = 0.0;
      for (std::size_t s = 0; s < 2; ++s) {
        double dgi = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) dgi -= gi[i][a] * dg_dy[a][b][j] * gi[b][s];
        acc += dgi * B[s] + gi[i][s] * dB[s];
      }
      out.nonlinear.N[i][j] = 0.25 * acc;
    }
  }
  const Mat2& N = out.nonlinear.N;

  CartanConnection& cc = out.cartan;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < 2; ++j)
      cc.G_time[k][j] = 0.5 * (gi[k][0] * dg_dt[0][j] + gi[k][1] * dg_dt[1][j]);

  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        cc.C_vertical[i][j][k] = 0.5 * (gi[i][0] * dg_dy[j][0][k] + gi[i][1] * dg_dy[j][1][k]);

  // δg_ab/δxᵏ = ∂g_ab/∂xᵏ − N⁽ᵠ⁾ₖ ∂g_ab/∂y^q
  Tensor3& dgd = out.adapted_dg;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t k = 0; k < 2; ++k)
        dgd[a][b][k] = dg_dx[a][b][k] - N[0][k] * dg_dy[a][b][0] - N[1][k] * dg_dy[a][b][1];

  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = j; k < 2; ++k) {
        double acc = 0.0;
        for (std::size_t s = 0; s < 2; ++s) acc += gi[i][s] * (dgd[j][s][k] + dgd[k][s][j] - dgd[j][k][s]);
        cc.L_spatial[i][j][k] = cc.L_spatial[i][k][j] = 0.5 * acc;
      }

  out.em = em_form_from(g, N, cc.L_spatial, y);
  out.ym_energy = ym_energy(out.em, mass);
  return out;
}

EMForm em_form_from(const Mat2& g, const Mat2& N, const Tensor3& L, const Vec2& y) {
  EMForm f;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = i + 1; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < 2; ++s) acc += g[j][s] * N[s][i] - g[i][s] * N[s][j];
      for (std::size_t q = 0; q < 2; ++q)
        for (std::size_t s = 0; s < 2; ++s) acc += (g[i][q] * L[q][j][s] - g[j][q] * L[q][i][s]) * y[s];
      f.F[i][j] = 0.5 * TimeMetric::h11 * acc;
      f.F[j][i] = -f.F[i][j];
    }
    f.F[i][i] = 0.0;
  }
  return f;
}

double ym_energy(const EMForm& F, double m) {
  if (!(m > 0.0)) throw DomainError("ym_energy: mass must be positive");
  double trace = 0.0;  // Tr(F·ᵀF) = Σ F_ij²
  for (const auto& row : F.F)
    for (double v : row) trace += v * v;
  return trace / (2.0 * m);
}

GeometryBundle geometry_bundle(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  return geometry_from_jet(pt, lagrangian_jet(model, pt, opts), model.mass());
}

Metric metric_from_lagrangian(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  model.require_valid(pt);
  Mat2 g{};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = a; b < 2; ++b)
      g[a][b] = g[b][a] = 0.5 * partial(model, pt, MultiIndex{fibre_var(a), fibre_var(b)}, opts);
  return invert_metric(g);
}

Semispray semispray_from_lagrangian(const LagrangianModel& model, const JetPoint& pt,
                                    const DiffOptions& opts) {
  const Metric metric = metric_from_lagrangian(model, pt, opts);
  Vec2 B{};
  for (std::size_t s = 0; s < 2; ++s) {
    const Var ys = fibre_var(s);
    B[s] = partial(model, pt, {Var::r, ys}, opts) * pt.y[0] + partial(model, pt, {Var::phi, ys}, opts) * pt.y[1] -
           partial(model, pt, {spatial_var(s)}, opts) + partial(model, pt, {Var::t, ys}, opts);
  }
  Semispray out;
  for (std::size_t i = 0; i < 2; ++i)
    out.G[i] = 0.25 * (metric.g_inv[i][0] * B[0] + metric.g_inv[i][1] * B[1]);
  return out;
}

NonlinearConnection nonlinear_connection(const LagrangianModel& model, const JetPoint& pt,
                                         const DiffOptions& opts) {
  return geometry_bundle(model, pt, opts).nonlinear;
}

CartanConnection cartan_connection(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  return geometry_bundle(model, pt, opts).cartan;
}

EMForm em_form(const LagrangianModel& model, const JetPoint& pt, const DiffOptions& opts) {
  return geometry_bundle(model, pt, opts).em;
}

double adapted_derivative(const AdaptedFrame& frame, const std::function<double(const JetPoint&)>& field,
                          const JetPoint& pt, std::size_t j, const StepScales& scales, double rel_step) {
  auto along = [&](Var v) {
    return field_derivative(field, pt, v, scales[static_cast<std::size_t>(v)], rel_step);
  };
  double out = along(spatial_var(j));
  for (std::size_t q = 0; q < 2; ++q) {
    if (frame.N[q][j] != 0.0) out -= frame.N[q][j] * along(fibre_var(q));
  }
  return out;
}

}  // namespace jetlag
