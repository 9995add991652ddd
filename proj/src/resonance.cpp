#include "jetlag/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "jetlag/special_functions.hpp"

namespace jetlag {

std::string to_string(ResonanceSource s) { return s == ResonanceSource::ode ? "ode" : "closed_form"; }
std::string to_string(ResonanceForm f) { return f == ResonanceForm::large_t ? "large_t" : "exact"; }

void ResonanceConfig::validate() const {
  params.validate();
  integrator.validate();
  const double R0 = params.require_R0();
  if (!(t_end > t_start)) throw DomainError("resonance: t_end must exceed t_start");
  if (t_start < 0.0) throw DomainError("resonance: t_start must be non-negative");
  if (!(R0 - params.V_abs * t_start > 0.0)) throw DomainError("resonance: seed r0 = R0 - |V| t_start is not positive");
  const bool large = source == ResonanceSource::closed_form || form == ResonanceForm::large_t;
  if (large && !(params.V_abs * t_end < R0))
    throw DomainError("resonance: t range reaches R0/|V|, where the large-time exponent blows up");
  if (grid_points < 2) throw DomainError("resonance: grid_points must be at least 2");
}

namespace {

double exponent(double t, double r0, const MonolayerParams& p, ResonanceForm form) {
  const double V = p.V_abs;
  if (form == ResonanceForm::exact) return 2.0 * V * t / r0;
  const double s = p.require_R0() - V * t;
  if (!(s > 0.0)) throw DomainError("resonance: t reached R0/|V|");
  return 2.0 * V * t / s;
}

double relative_residual(const ResonantSample& s, const MonolayerParams& p, ResonanceForm form) {
  const double a = p.m * s.r0dot * s.r0dot * s.r0dot;
  const double b = 6.0 * p.p * p.V_abs * std::pow(s.r0, 5) * std::exp(exponent(s.t, s.r0, p, form));
  const double den = std::abs(a) + std::abs(b);
  return den > 0.0 ? std::abs(a + b) / den : 0.0;
}

}  // namespace

double resonance_rhs(double t, double r0, const MonolayerParams& params, ResonanceForm form) {
  if (!(r0 > 0.0)) throw DomainError("resonance: r0 must stay positive");
  const double c = std::cbrt(6.0 * params.p * params.V_abs / params.m);
  return -c * std::pow(r0, 5.0 / 3.0) * std::exp(exponent(t, r0, params, form) / 3.0);
}

double residual_exact_exponent(const ResonantSample& s, const MonolayerParams& params) {
  return relative_residual(s, params, ResonanceForm::exact);
}

double residual_large_time(const ResonantSample& s, const MonolayerParams& params) {
  return relative_residual(s, params, ResonanceForm::large_t);
}

double closed_form_r0(double t, const MonolayerParams& params) {
  const double R0 = params.require_R0();
  const double m = params.m, p = params.p, V = params.V_abs;
  const double s = R0 - t * V;
  if (!(s > 0.0)) throw DomainError("closed-form r0: t reached R0/|V|");
  const double c = std::cbrt(6.0) * std::cbrt(p);
  const double w = 2.0 * R0 / (3.0 * s);
  // e^(−w)[f(2/3) − f(w)], the second product taken in scaled form
  const double ef = std::exp(-w) * exp_integral_f(2.0 / 3.0) - exp_neg_times_f(w);
  const double brace = -4.0 * c * std::pow(R0, 5.0 / 3.0) * ef +
                       std::exp(-(2.0 * t * V / 3.0) / s) *
                           (9.0 * std::cbrt(m) * std::pow(V, 2.0 / 3.0) + 6.0 * c * std::pow(R0, 5.0 / 3.0)) -
                       6.0 * c * std::pow(R0, 2.0 / 3.0) * s;
  if (!(brace > 0.0)) throw DomainError("closed-form r0: braced quantity is not positive (negative radicand)");
  return 27.0 * std::sqrt(m) * R0 * V * std::exp(t * V / (t * V - R0)) * std::pow(brace, -1.5);
}

ResonantSample closed_form_sample(double t, const MonolayerParams& params) {
  // differences on the variation scale (R₀ − |V|t)/|V|
  const double h = 1e-4 * (params.require_R0() - params.V_abs * t) / params.V_abs;
  auto d = [&](double hh) { return (closed_form_r0(t + hh, params) - closed_form_r0(t - hh, params)) / (2.0 * hh); };
  return {t, closed_form_r0(t, params), (4.0 * d(0.5 * h) - d(h)) / 3.0};
}

double reversed_bracket_relative(const ResonantSample& s, const MonolayerParams& params) {
  const double m = params.m, p = params.p, V = params.V_abs;
  const double a = 1.5 * m * s.r0;
  const double b = m * m * std::exp(2.0 * V * s.t / s.r0) * std::pow(s.r0dot, 3) / (4.0 * p * V * std::pow(s.r0, 4));
  return std::abs(a - b) / (std::abs(a) + std::abs(b));
}

ResonantTrajectory time_reverse(const ResonantTrajectory& ref) {
  ResonantTrajectory out = ref;
  out.reversed = !ref.reversed;
  out.samples.assign(ref.samples.rbegin(), ref.samples.rend());
  for (auto& s : out.samples) {
    s.t = -s.t;
    s.r0dot = -s.r0dot;
  }
  return out;
}

ResonantSample ResonantTrajectory::at(double t) const {
  if (samples.empty()) throw DomainError("resonant trajectory is empty");
  const double span = t_last() - t_first();
  const double slack = 1e-12 * std::max(span, std::abs(t_last()));
  if (t < t_first() - slack || t > t_last() + slack)
    throw DomainError("resonant trajectory: t outside the reference span");
  if (samples.size() == 1) return samples.front();
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const ResonantSample& s) { return v < s.t; });
  std::size_t k = static_cast<std::size_t>(it - samples.begin());
  k = std::clamp<std::size_t>(k, 1, samples.size() - 1);
  const ResonantSample& a = samples[k - 1];
  const ResonantSample& b = samples[k];
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  ResonantSample out;
  out.t = t;
  out.r0 = (2 * s3 - 3 * s2 + 1) * a.r0 + (s3 - 2 * s2 + s) * h * a.r0dot + (-2 * s3 + 3 * s2) * b.r0 +
           (s3 - s2) * h * b.r0dot;
  out.r0dot = (6 * s2 - 6 * s) / h * a.r0 + (3 * s2 - 4 * s + 1) * a.r0dot + (-6 * s2 + 6 * s) / h * b.r0 +
              (3 * s2 - 2 * s) * b.r0dot;
  return out;
}

ResonantTrajectory resonant_trajectory(const ResonanceConfig& config) {
  config.validate();
  const MonolayerParams& p = config.params;
  ResonantTrajectory out;
  out.source = config.source;
  out.form = config.source == ResonanceSource::closed_form ? ResonanceForm::large_t : config.form;
  out.params = p;

  if (config.source == ResonanceSource::closed_form) {
    const std::size_t n = config.grid_points;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = config.t_start + (config.t_end - config.t_start) * static_cast<double>(k) / (n - 1);
      out.samples.push_back(closed_form_sample(t, p));
    }
    return out;
  }

  const ResonanceForm form = config.form;
  using S = Dopri5<1>::State;
  auto rhs = [&](const S& x, S& dx, double t) { dx[0] = resonance_rhs(t, x[0], p, form); };
  const double seed = p.require_R0() - p.V_abs * config.t_start;
  out.samples.push_back({config.t_start, seed, resonance_rhs(config.t_start, seed, p, form)});
  // grid_points also bounds the step, so the Hermite reference stays well resolved
  StepControl ctl = config.integrator;
  ctl.max_step = std::min(ctl.max_step, (config.t_end - config.t_start) / static_cast<double>(config.grid_points - 1));
  Dopri5<1> integrator;
  const auto res = integrator.integrate(rhs, config.t_start, S{seed}, config.t_end, ctl,
                                        [&](const Dopri5<1>::Step& st) {
                                          out.samples.push_back({st.t1, st.x1[0], st.dx1[0]});
                                          return st.x1[0] >= config.r_min;
                                        });
  out.stop = res.reason;
  spdlog::debug("resonant_trajectory: {} samples, stop={}", out.samples.size(), to_string(res.reason));
  return out;
}

double interpolation_error_estimate(const ResonantTrajectory& ref) {
  double worst = 0.0;
  for (std::size_t k = 1; k < ref.samples.size(); ++k) {
    const double tm = 0.5 * (ref.samples[k - 1].t + ref.samples[k].t);
    const ResonantSample h = ref.at(tm);
    double e;
    if (ref.source == ResonanceSource::ode) {
      const double f = resonance_rhs(ref.reversed ? -tm : tm, h.r0, ref.params, ref.form);
      const double d = ref.reversed ? -h.r0dot : h.r0dot;
      e = std::abs(d - f) / std::abs(f);
    } else {
      const double c = closed_form_r0(ref.reversed ? -tm : tm, ref.params);
      e = std::abs(h.r0 - c) / std::abs(c);
    }
    worst = std::max(worst, e);
  }
  return worst;
}

DeviationCoefficients deviation_coefficients(const ResonantSample& s, const MonolayerParams& params,
                                             UddotMeaning uddot) {
  const double m = params.m, p = params.p, V = params.V_abs;
  const double t = s.t, r = s.r0, rd = s.r0dot;
  if (!(r > 0.0)) throw DomainError("deviation: reference r0 must be positive");
  const double E = std::exp(2.0 * t * V / r);
  const double r3 = r * r * r, r5 = r3 * r * r, rd3 = rd * rd * rd;
  const PotentialDerivatives u = potential_derivatives(t, r, params);
  DeviationCoefficients c;
  c.A = 2.0 * p * V * r5 * E - m * rd3;
  c.B = p * V * r3 * E * (2.0 * t * V - 5.0 * r) * rd;
  c.C = rd3 * (uddot == UddotMeaning::d2U_dr2 ? u.U_rr : u.U_tt);
  // the exponential factors are divided out before multiplying to keep the magnitudes moderate
  const double r6 = r5 * r;
  const double f1 = (m * rd3 / E + 6.0 * p * V * r5) / (p * V * r5);
  const double f2 = (m * (t * V - 2.0 * r) * rd3 / E + 3.0 * p * V * r6) / (p * V * r6);
  c.D = rd * f1 * f2 / (8.0 * r);
  return c;
}

std::vector<DeviationState> deviation_integrate(const ResonantTrajectory& ref_in, const DeviationConfig& config) {
  config.integrator.validate();
  const ResonantTrajectory ref = ref_in.reversed ? time_reverse(ref_in) : ref_in;
  if (ref.samples.size() < 2) throw DomainError("deviation: reference trajectory has fewer than two samples");
  const double est = interpolation_error_estimate(ref);
  if (est > config.interp_tol)
    throw DomainError("deviation: reference grid too coarse (interpolation error " + std::to_string(est) +
                      " exceeds " + std::to_string(config.interp_tol) + ")");

  using S = Dopri5<4>::State;
  auto rhs = [&](const S& x, S& dx, double t) {
    const DeviationCoefficients c = deviation_coefficients(ref.at(t), ref.params, config.uddot);
    if (c.A == 0.0) throw DomainError("deviation: leading coefficient vanishes");
    dx = {x[1], -(c.B * x[1] + c.C * x[0]) / c.A, x[3], -c.D * x[3]};
  };
  const double t0 = ref.t_first();
  const S x0{config.dr0, config.drdot0, delta_phi_solution(config.C1, config.C2, t0), config.C2};
  std::vector<DeviationState> out;
  out.push_back({t0, x0[0], x0[1], x0[2], x0[3], config.C1, config.C2});
  StepControl ctl = config.integrator;
  ctl.max_step = std::min(ctl.max_step, (ref.t_last() - t0) / static_cast<double>(ref.samples.size() - 1));
  Dopri5<4> integrator;
  integrator.integrate(rhs, t0, x0, ref.t_last(), ctl, [&](const Dopri5<4>::Step& st) {
    out.push_back({st.t1, st.x1[0], st.x1[1], st.x1[2], st.x1[3], config.C1, config.C2});
    return true;
  });
  return out;
}

AffineFit affine_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw DomainError("affine fit: need at least two paired samples");
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    my += y[k];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
  }
  if (!(stt > 0.0)) throw DomainError("affine fit: all times coincide");
  AffineFit f;
  f.slope = sty / stt;
  f.intercept = my - f.slope * mt;
  for (std::size_t k = 0; k < t.size(); ++k)
    f.max_residual = std::max(f.max_residual, std::abs(y[k] - f.intercept - f.slope * t[k]));
  return f;
}

TrajectorySeries compose_perturbed(const ResonantTrajectory& ref_in, const std::vector<DeviationState>& dev) {
  const ResonantTrajectory ref = ref_in.reversed ? time_reverse(ref_in) : ref_in;
  TrajectorySeries out;
  for (const auto& d : dev) {
    const ResonantSample r = ref.at(d.t);
    const TrajectoryState s{d.t, r.r0 + d.dr, d.dphi, r.r0dot + d.drdot, d.dphidot};
    SampleDiagnostics diag;
    try {
      diag = monolayer_diagnostics(s, ref.params);
    } catch (const DomainError&) {
      diag.E_inst = diag.H = diag.H_YM = diag.EYM = diag.g11 = std::numeric_limits<double>::quiet_NaN();
      diag.singular = true;
    }
    diag.el_residual = std::numeric_limits<double>::quiet_NaN();  // not a geodesic
    out.states.push_back(s);
    out.diagnostics.push_back(diag);
  }
  return out;
}

Plateau detect_plateau(const std::vector<double>& t, const std::vector<double>& drdt, double rel_threshold) {
  Plateau best;
  if (t.size() != drdt.size() || t.size() < 2) return best;
  double mx = 0.0;
  for (double v : drdt) mx = std::max(mx, std::abs(v));
  best.threshold = rel_threshold * mx;
  std::size_t k = 0;
  while (k < t.size()) {
    if (std::abs(drdt[k]) > best.threshold) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < t.size() && std::abs(drdt[j + 1]) <= best.threshold) ++j;
    if (j > k && (!best.found || t[j] - t[k] > best.t_end - best.t_begin)) {
      best.found = true;
      best.t_begin = t[k];
      best.t_end = t[j];
    }
    k = j + 1;
  }
  return best;
}

}  // namespace jetlag
