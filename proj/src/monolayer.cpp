#include "jetlag/monolayer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "jetlag/errors.hpp"
#include "jetlag/special_functions.hpp"

namespace jetlag {

namespace {

// Shorthands shared by every closed form: a = |V|t, z = 2a/r, E = e^z.
struct Kin {
  double m, p, V, t, r, rd, pd, a, z, E, Einv, K;

  Kin(const JetPoint& pt, const MonolayerParams& P)
      : m(P.m), p(P.p), V(P.V_abs), t(pt.t), r(pt.r()), rd(pt.rdot()), pd(pt.phidot()) {
    if (!(r > 0.0)) throw DomainError("monolayer: r must be positive, got " + std::to_string(r));
    a = V * t;
    z = 2.0 * a / r;
    E = std::exp(z);
    Einv = std::exp(-z);
    K = p * std::pow(r, 5) * V * E;
  }

  void require_rdot() const {
    if (rd == 0.0) throw DomainError("monolayer: rdot^-1 is singular at rdot = 0");
  }
  double den() const { return m - 2.0 * K / (rd * rd * rd); }  // 2·g₁₁
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}

// Polynomial prefactor of e^z in U, and its derivatives in r and a.
struct Poly {
  double P, P_r, P_rr, P_a, P_aa;
};

Poly poly(double a, double r) {
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r;
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
  Poly q{};
  q.P = -4.0 / 3 * r5 + 16.0 / 15 * a * r4 + 1.0 / 30 * a2 * r3 + 1.0 / 45 * a3 * r2 +
        1.0 / 45 * a4 * r + 2.0 / 45 * a5;
  q.P_r = -20.0 / 3 * r4 + 64.0 / 15 * a * r3 + 1.0 / 10 * a2 * r2 + 2.0 / 45 * a3 * r +
          1.0 / 45 * a4;
  q.P_rr = -80.0 / 3 * r3 + 64.0 / 5 * a * r2 + 1.0 / 5 * a2 * r + 2.0 / 45 * a3;
  q.P_a = 16.0 / 15 * r4 + 1.0 / 15 * a * r3 + 1.0 / 15 * a2 * r2 + 4.0 / 45 * a3 * r +
          2.0 / 9 * a4;
  q.P_aa = 1.0 / 15 * r3 + 2.0 / 15 * a * r2 + 4.0 / 15 * a2 * r + 8.0 / 9 * a3;
  return q;
}

double approx_N12(const Kin& k) {
  return k.m * k.Einv / (2.0 * k.p * k.V * std::pow(k.r, 4)) * k.rd * k.rd * k.rd * k.pd;
}

double approx_C111(const Kin& k) {
  const double r5 = std::pow(k.r, 5);
  return 3.0 * k.p * r5 * k.V / (k.m * std::pow(k.rd, 4) * k.Einv - 2.0 * k.p * r5 * k.V * k.rd);
}

}  // namespace

void MonolayerParams::validate() const {
  require_positive(m, "mass m");
  require_positive(p, "monolayer parameter p");
  require_positive(V_abs, "compressing rate |V|");
  if (R0) require_positive(*R0, "initial radius R0");
}

double MonolayerParams::require_R0() const {
  if (!R0) throw DomainError("initial radius R0 is required for the large-time resonant form");
  require_positive(*R0, "initial radius R0");
  return *R0;
}

double pressure_param(const PhysicalSubParams& s) {
  require_positive(s.q, "charge q");
  require_positive(s.epsilon, "permittivity epsilon");
  require_positive(s.epsilon0, "vacuum permittivity epsilon0");
  require_positive(s.rho0, "rho0");
  require_positive(s.R0, "R0");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 * s.q * s.q / (s.epsilon * s.epsilon0) * s.rho0 * s.rho0 / (s.R0 * s.R0);
}

double potential_U(double t, double r, const MonolayerParams& params) {
  return potential_derivatives(t, r, params).U;
}

// Above this z the f-term cancels the leading powers of |V|t in P; both U and 𝒰 are then
// evaluated from the cancelled form, whose remainder is a rapidly converging asymptotic tail.
constexpr double kCancelledFormZ = 40.0;

namespace {

// Σ_{k≥k0} c·k!·uᵏ·a^pa r^pr terms, u = r/(2a), with the derivative weights needed below.
struct Tail {
  double v = 0, v_r = 0, v_rr = 0, v_a = 0, v_aa = 0;
};

// W(a, r) = coef · Σ_{k≥k0} k!/2ᵏ · a^(deg−k) r^(k−shift); each term is homogeneous in (a, r).
Tail asymptotic_tail(double a, double r, int k0, int deg, int shift, double coef) {
  Tail w;
  const double u = r / (2.0 * a);
  double fact_u = 1.0;  // k!·uᵏ
  for (int k = 1; k < k0; ++k) fact_u *= k * u;
  fact_u *= k0 * u;
  double prev = std::numeric_limits<double>::infinity();
  const double base = coef * std::pow(a, deg) * std::pow(r, -shift);
  for (int k = k0; k < 400; ++k) {
    const double term = base * fact_u;
    if (std::abs(term) >= prev) break;
    prev = std::abs(term);
    const double pa = deg - k, pr = k - shift;
    w.v += term;
    w.v_r += pr / r * term;
    w.v_rr += pr * (pr - 1) / (r * r) * term;
    w.v_a += pa / a * term;
    w.v_aa += pa * (pa - 1) / (a * a) * term;
    if (std::abs(term) < 1e-18 * std::abs(w.v)) break;
    fact_u *= (k + 1) * u;
  }
  return w;
}

}  // namespace

PotentialDerivatives potential_derivatives(double t, double r, const MonolayerParams& params) {
  if (!(r > 0.0)) throw DomainError("potential U: r must be positive, got " + std::to_string(r));
  const double p = params.p, V = params.V_abs;
  const double a = V * t;
  const double z = 2.0 * a / r;
  const double E = std::exp(z);
  const double r2 = r * r, r3 = r2 * r;
  PotentialDerivatives d;

  if (z > kCancelledFormZ) {
    // U = p e^z B with B = a r⁴ − (4/3) r⁵ − (2/45) Σ_{k≥5} k!/2ᵏ a^(5−k) rᵏ.
    const Tail w = asymptotic_tail(a, r, 5, 5, 0, 2.0 / 45);
    const double r4 = r2 * r2;
    const double B = a * r4 - 4.0 / 3 * r4 * r - w.v;
    const double B_r = 4.0 * a * r3 - 20.0 / 3 * r4 - w.v_r;
    const double B_rr = 12.0 * a * r2 - 80.0 / 3 * r3 - w.v_rr;
    const double B_a = r4 - w.v_a;
    const double B_aa = -w.v_aa;
    const double c = 2.0 * a / r2;
    d.U = p * E * B;
    d.U_r = p * E * (B_r - c * B);
    d.U_rr = p * E * (B_rr - 2.0 * c * B_r + (4.0 * a / r3 + c * c) * B);
    d.U_t = p * V * E * (B_a + 2.0 / r * B);
    d.U_tt = p * V * V * E * (B_aa + 4.0 / r * B_a + 4.0 / r2 * B);
    return d;
  }

  const Poly q = poly(a, r);
  const double Q = q.P_r - 2.0 * a / r2 * q.P;
  const double Q_r = q.P_rr - 2.0 * a / r2 * q.P_r + 4.0 * a / r3 * q.P;
  d.U = p * q.P * E;
  d.U_r = p * Q * E;
  d.U_rr = p * (Q_r - 2.0 * a / r2 * Q) * E;
  d.U_t = p * V * (q.P_a + 2.0 / r * q.P) * E;
  d.U_tt = p * V * V * (q.P_aa + 4.0 / r * q.P_a + 4.0 / r2 * q.P) * E;
  if (a != 0.0) {
    const double ei = exp_integral_f(z);
    const double a4 = std::pow(a, 4), a5 = a4 * a, a6 = a5 * a;
    const double c = 4.0 / 45;
    d.U -= p * c * a6 / r * ei;
    d.U_r += p * c * a6 / r2 * (ei + E);
    d.U_rr += p * c * (-2.0 * a6 / r3 * (ei + E) - a6 / r2 * E * (1.0 / r + 2.0 * a / r2));
    d.U_t -= p * V * c * a5 / r * (6.0 * ei + E);
    d.U_tt -= p * V * V * c *
              (5.0 * a4 / r * (6.0 * ei + E) + 6.0 * a4 * E / r + 2.0 * a5 * E / r2);
  }
  return d;
}

double velocity_coefficient_K(double t, double r, const MonolayerParams& params) {
  if (!(r > 0.0)) throw DomainError("K: r must be positive");
  return params.p * std::pow(r, 5) * params.V_abs * std::exp(2.0 * params.V_abs * t / r);
}

double electrocapillarity_potential(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  return -k.K / k.rd + potential_U(pt.t, k.r, params);
}

double monolayer_lagrangian(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  return 0.5 * k.m * k.rd * k.rd + 0.5 * k.m * k.r * k.r * k.pd * k.pd - k.K / k.rd +
         potential_U(pt.t, k.r, params);
}

double instanton_energy(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  return 0.5 * k.m * k.rd * k.rd + 0.5 * k.m * k.r * k.r * k.pd * k.pd + k.K / k.rd -
         potential_U(pt.t, k.r, params);
}

MonolayerModel::MonolayerModel(MonolayerParams params) : params_(std::move(params)) {
  params_.validate();
}

double MonolayerModel::value(const JetPoint& pt) const { return monolayer_lagrangian(pt, params_); }

double MonolayerModel::term(std::size_t k, const JetPoint& pt) const {
  const double m = params_.m;
  switch (k) {
    case 0: return 0.5 * m * pt.rdot() * pt.rdot();
    case 1: return 0.5 * m * pt.r() * pt.r() * pt.phidot() * pt.phidot();
    case 2: {
      if (pt.rdot() == 0.0) throw DomainError("monolayer: rdot^-1 is singular at rdot = 0");
      return -velocity_coefficient_K(pt.t, pt.r(), params_) / pt.rdot();
    }
    default: return potential_U(pt.t, pt.r(), params_);
  }
}

std::optional<std::string> MonolayerModel::domain_violation(const JetPoint& pt) const {
  if (auto base = LagrangianModel::domain_violation(pt)) return base;
  if (pt.rdot() == 0.0) return std::string("rdot = 0, where the rdot^-1 term is singular");
  const Kin k(pt, params_);
  const double g11 = 0.5 * k.den();
  if (!std::isfinite(g11)) return std::string("g11 is not finite");
  if (std::abs(g11) <= 1e-9 * params_.m)
    return "g11 = " + std::to_string(g11) + " is on the singular locus g11 = 0";
  return std::nullopt;
}

StepScales MonolayerModel::step_scales(const JetPoint& pt) const {
  const double r = pt.r();
  const double z = std::abs(2.0 * params_.V_abs * pt.t / r);
  StepScales s{};
  s[static_cast<std::size_t>(Var::t)] = r / (2.0 * params_.V_abs);
  s[static_cast<std::size_t>(Var::r)] = r / std::max(1.0, z);
  s[static_cast<std::size_t>(Var::phi)] = 1.0;
  s[static_cast<std::size_t>(Var::rdot)] = std::abs(pt.rdot());
  s[static_cast<std::size_t>(Var::phidot)] = std::max(1.0, std::abs(pt.phidot()));
  return s;
}

std::optional<Vec2> MonolayerModel::exact_spray(const JetPoint& pt) const {
  return closed_semispray(pt, params_, SprayForm::exact).G;
}

Metric closed_metric(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  const double den = k.den();
  if (!std::isfinite(den) || std::abs(0.5 * den) <= 1e-9 * k.m)
    throw SingularMetricError("closed metric: g11 = " + std::to_string(0.5 * den) +
                              " is on the singular locus at " + pt.to_string());
  Metric g;
  g.g = {Vec2{0.5 * den, 0.0}, Vec2{0.0, 0.5 * k.m * k.r * k.r}};
  g.g_inv = {Vec2{2.0 / den, 0.0}, Vec2{0.0, 2.0 / (k.m * k.r * k.r)}};
  g.det_g = g.g[0][0] * g.g[1][1];
  return g;
}

Semispray closed_semispray(const JetPoint& pt, const MonolayerParams& params, SprayForm form) {
  const Kin k(pt, params);
  k.require_rdot();
  Semispray s;
  s.G[1] = k.rd / k.r * k.pd;
  if (form == SprayForm::exact) {
    const double den = k.den();
    if (den == 0.0) throw SingularMetricError("semispray: m - 2K rdot^-3 vanishes at " + pt.to_string());
    const double U_r = potential_derivatives(pt.t, k.r, params).U_r;
    const double num = k.p * std::pow(k.r, 3) * k.V * k.E *
                           (5.0 * k.r / k.rd - 2.0 * k.a / k.rd + k.V * k.r / (k.rd * k.rd)) -
                       0.5 * U_r - 0.5 * k.m * k.r * k.pd * k.pd;
    s.G[0] = num / den;
  } else {
    const double rd2 = k.rd * k.rd, rd3 = rd2 * k.rd;
    s.G[0] = -0.5 * k.V / k.r * k.rd + (k.a / (k.r * k.r) - 2.5 / k.r) * rd2 -
             rd3 * script_U(pt.t, k.r, params) / 3.0 +
             k.m / (4.0 * k.p * k.V) * std::pow(k.r, -4) * k.Einv * rd3 * k.pd * k.pd;
  }
  return s;
}

double script_U(double t, double r, const MonolayerParams& params) {
  if (!(r > 0.0)) throw DomainError("script U: r must be positive");
  const double V = params.V_abs;
  const double a = V * t;
  if (2.0 * a / r > kCancelledFormZ) {
    // the f-term cancels the a⁵…a powers down to a²/r³
    const Tail w = asymptotic_tail(a, r, 6, 5, 6, 1.0 / 30);
    return (1.5 * a * a / (r * r * r) - 5.25 * a / (r * r) + 4.875 / r - w.v) / V;
  }
  double s = 5.0 / r - 26.0 * a / (5.0 * r * r) + 61.0 * a * a / (40.0 * std::pow(r, 3)) +
             std::pow(a, 3) / (60.0 * std::pow(r, 4)) + std::pow(a, 4) / (60.0 * std::pow(r, 5)) +
             std::pow(a, 5) / (30.0 * std::pow(r, 6));
  if (a != 0.0) s -= std::pow(a, 6) / (15.0 * std::pow(r, 7)) * exp_neg_times_f(2.0 * a / r);
  return s / V;
}

double script_U_t(double t, double r, const MonolayerParams& params) {
  if (!(r > 0.0)) throw DomainError("script U: r must be positive");
  const double V = params.V_abs;
  const double a = V * t;
  if (2.0 * a / r > kCancelledFormZ) {
    const Tail w = asymptotic_tail(a, r, 6, 5, 6, 1.0 / 30);
    return 3.0 * a / (r * r * r) - 5.25 / (r * r) - w.v_a;
  }
  double s = -26.0 / (5.0 * r * r) + 61.0 * a / (20.0 * std::pow(r, 3)) +
             a * a / (20.0 * std::pow(r, 4)) + std::pow(a, 3) / (15.0 * std::pow(r, 5)) +
             std::pow(a, 4) / (6.0 * std::pow(r, 6)) - std::pow(a, 5) / (15.0 * std::pow(r, 7));
  if (a != 0.0) {
    const double ef = exp_neg_times_f(2.0 * a / r);
    s += -2.0 * std::pow(a, 5) / (5.0 * std::pow(r, 7)) * ef +
         2.0 * std::pow(a, 6) / (15.0 * std::pow(r, 8)) * ef;
  }
  return s;
}

NonlinearConnection closed_nonlinear_connection(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  NonlinearConnection nc;
  const double r4 = std::pow(k.r, 4);
  nc.N[0][0] = -0.5 * k.V / k.r + (2.0 * k.a / (k.r * k.r) - 5.0 / k.r) * k.rd -
               script_U(pt.t, k.r, params) * k.rd * k.rd +
               3.0 * k.m * k.Einv / (4.0 * k.p * k.V * r4) * k.rd * k.rd * k.pd * k.pd;
  nc.N[0][1] = approx_N12(k);
  nc.N[1][0] = k.pd / k.r;
  nc.N[1][1] = k.rd / k.r;
  return nc;
}

NonlinearConnection exact_nonlinear_connection(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  const double den = k.den();
  const double G1 = closed_semispray(pt, params, SprayForm::exact).G[0];
  const double rd2 = k.rd * k.rd, rd3 = rd2 * k.rd;
  const double num_rd = k.p * std::pow(k.r, 3) * k.V * k.E *
                        (-(5.0 * k.r - 2.0 * k.a) / rd2 - 2.0 * k.V * k.r / rd3);
  const double den_rd = 6.0 * k.K / (rd2 * rd2);
  NonlinearConnection nc;
  nc.N[0][0] = num_rd / den - G1 * den_rd / den;
  nc.N[0][1] = -k.m * k.r * k.pd / den;
  nc.N[1][0] = k.pd / k.r;
  nc.N[1][1] = k.rd / k.r;
  return nc;
}

CartanConnection closed_cartan(const JetPoint& pt, const MonolayerParams& params,
                               ConnectionSource source) {
  const Kin k(pt, params);
  k.require_rdot();
  const double r3 = std::pow(k.r, 3), r4 = r3 * k.r, r5 = r4 * k.r;
  const double rd3 = k.rd * k.rd * k.rd;
  const double C = approx_C111(k);

  CartanConnection c;
  c.G_time[0][0] = 2.0 * k.p * r4 * k.V * k.V / (2.0 * k.p * r5 * k.V - k.m * rd3 * k.Einv);
  c.C_vertical[0][0][0] = C;

  const Mat2 N = source == ConnectionSource::approximate ? closed_nonlinear_connection(pt, params).N
                                                     : exact_nonlinear_connection(pt, params).N;
  auto& L = c.L_spatial;
  L[0][0][0] = k.p * r3 * k.V * (2.0 * k.a - 5.0 * k.r) / (k.m * rd3 * k.Einv - 2.0 * k.p * r5 * k.V) -
               N[0][0] * C;
  L[0][0][1] = L[0][1][0] = -N[0][1] * C;
  L[0][1][1] = k.m * k.r / (2.0 * k.p * r5 * k.V * k.E / rd3 - k.m);
  if (source == ConnectionSource::approximate) {
    L[1][0][0] = 3.0 * k.pd / (2.0 * k.r * k.rd);
  } else {
    const Metric g = closed_metric(pt, params);
    L[1][0][0] = g.g[0][0] / g.g[1][1] * N[0][1] * C;
  }
  L[1][0][1] = L[1][1][0] = 1.0 / k.r;
  L[1][1][1] = 0.0;
  return c;
}

TorsionSet closed_torsions(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  k.require_rdot();
  const CartanConnection c = closed_cartan(pt, params, ConnectionSource::approximate);
  const NonlinearConnection nc = closed_nonlinear_connection(pt, params);
  const double N11 = nc.N[0][0];
  const double C = c.C_vertical[0][0][0];
  const double r4 = std::pow(k.r, 4), r5 = r4 * k.r;
  const double rd2 = k.rd * k.rd, rd3 = rd2 * k.rd;
  const double Ucal = script_U(pt.t, k.r, params);
  const double dN11_drd = (2.0 * k.a / (k.r * k.r) - 5.0 / k.r) - 2.0 * Ucal * k.rd +
                          3.0 * k.m * k.Einv / (2.0 * k.p * k.V * r4) * k.rd * k.pd * k.pd;
  const double pre = k.m * k.Einv / (2.0 * k.p * k.V * r4);

  TorsionSet ts;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      ts.T[a][b] = -c.G_time[a][b];
      ts.calP[a][b] = -c.G_time[a][b];
    }
  ts.P_vert = c.C_vertical;

  ts.H_tor[0][0] = script_U_t(pt.t, k.r, params) * rd2 - 2.0 * k.V / (k.r * k.r) * k.rd +
                   3.0 * k.m * k.Einv / (2.0 * k.p * r5) * rd2 * k.pd * k.pd;
  ts.H_tor[0][1] = k.m * k.Einv / (k.p * r5) * rd3 * k.pd;

  const double R1 = k.m * k.Einv / (k.p * k.V * r4) *
                    (1.5 * N11 - 0.5 * dN11_drd * k.rd + (1.0 / k.r - k.a / (k.r * k.r)) * k.rd) *
                    rd2 * k.pd;
  ts.R[0][0][1] = R1;
  ts.R[0][1][0] = -R1;
  ts.R[1][0][1] = N11 / k.r;
  ts.R[1][1][0] = -N11 / k.r;

  ts.P_mixed[0][0][0] =
      dN11_drd + N11 * C -
      k.p * std::pow(k.r, 3) * k.V * (2.0 * k.a - 5.0 * k.r) / (k.m * rd3 * k.Einv - 2.0 * k.p * r5 * k.V);
  ts.P_mixed[0][0][1] = ts.P_mixed[0][1][0] = pre * (3.0 + k.rd * C) * rd2 * k.pd;
  ts.P_mixed[0][1][1] = pre * rd3 - k.m * k.r / (2.0 * k.p * r5 * k.V * k.E / rd3 - k.m);
  ts.P_mixed[1][0][0] = -3.0 * k.pd / (2.0 * k.r * k.rd);
  return ts;
}

double ym_bracket(const JetPoint& pt, const MonolayerParams& params) {
  const Kin k(pt, params);
  return 1.5 * k.m * k.r +
         k.m * k.m * k.Einv / (4.0 * k.p * k.V * std::pow(k.r, 4)) * k.rd * k.rd * k.rd;
}

EMEnergy closed_em_and_ym(const JetPoint& pt, const MonolayerParams& params, double zero_tol) {
  const double F21 = 0.5 * ym_bracket(pt, params) * pt.phidot();
  EMEnergy out;
  out.em.F[1][0] = F21;
  out.em.F[0][1] = -F21;
  out.ym_energy = F21 * F21 / params.m;
  out.zero_energy = std::abs(F21) < zero_tol;
  return out;
}

EMForm exact_closed_em_form(const JetPoint& pt, const MonolayerParams& params) {
  const Metric g = closed_metric(pt, params);
  const NonlinearConnection nc = exact_nonlinear_connection(pt, params);
  const CartanConnection c = closed_cartan(pt, params, ConnectionSource::exact);
  return em_form_from(g.g, nc.N, c.L_spatial, pt.y);
}

}  // namespace jetlag
