#include "jetlag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <spdlog/spdlog.h>

#include "jetlag/geometry.hpp"

namespace jetlag {

std::string to_string(EventType e) {
  switch (e) {
    case EventType::metric_singular: return "metric_singular";
    case EventType::rdot_zero: return "rdot_zero";
    case EventType::r_collapse: return "r_collapse";
    case EventType::einst_zero_crossing: return "einst_zero_crossing";
    case EventType::velocity_blowup: return "velocity_blowup";
    case EventType::step_underflow: return "step_underflow";
  }
  return "unknown";
}

void SimConfig::validate() const {
  params.validate();
  integrator.validate();
  if (!(t_end > initial.t)) throw DomainError("simulation: t_end must exceed the initial time");
  if (!(initial.r > 0.0)) throw DomainError("simulation: initial r must be positive");
  if (!(events.r_min >= 0.0) || !(events.g11_rel >= 0.0) ||
      !(events.speed_max > 0.0)) throw DomainError("simulation: event thresholds must be non-negative");
}

double TrajectorySeries::max_el_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics) {
    if (std::isnan(d.el_residual)) return d.el_residual;
    m = std::max(m, d.el_residual);
  }
  return m;
}

HamiltonianSplit hamiltonian_split(const TrajectoryState& s, const MonolayerParams& params) {
  if (s.rdot == 0.0) throw DomainError("hamiltonian split: rdot = 0 (the rdot^-1 term is singular)");
  const JetPoint pt = s.jet();
  const double m = params.m;
  const double K = velocity_coefficient_K(s.t, s.r, params);
  const double U = potential_U(s.t, s.r, params);
  const double g11 = 0.5 * m - K / (s.rdot * s.rdot * s.rdot);
  const double g22 = 0.5 * m * s.r * s.r;
  const double L = monolayer_lagrangian(pt, params);
  const double b = ym_bracket(pt, params);

  HamiltonianSplit h;
  h.H = g11 * s.rdot * s.rdot + g22 * s.phidot * s.phidot - L;
  h.H_YM = s.phidot * s.phidot * b * b / (4.0 * m);
  h.dL = U + h.H_YM;
  h.L0 = g22 * s.phidot * s.phidot + g11 * s.rdot * s.rdot - h.H_YM;

  const double scale = std::max({std::abs(K / s.rdot), std::abs(U), std::abs(h.H_YM),
                                 0.5 * m * s.rdot * s.rdot, g22 * s.phidot * s.phidot,
                                 std::numeric_limits<double>::min()});
  h.identity_residual = std::abs(h.dL + (h.H - h.H_YM)) / scale;
  h.decomposition_residual = std::abs(L - (h.L0 + h.dL)) / scale;
  return h;
}

SampleDiagnostics monolayer_diagnostics(const TrajectoryState& s, const MonolayerParams& params) {
  SampleDiagnostics d;
  const JetPoint pt = s.jet();
  d.E_inst = instanton_energy(pt, params);
  const HamiltonianSplit h = hamiltonian_split(s, params);
  d.H = h.H;
  d.H_YM = h.H_YM;
  const double K = velocity_coefficient_K(s.t, s.r, params);
  d.g11 = 0.5 * params.m - K / (s.rdot * s.rdot * s.rdot);
  try {
    d.EYM = ym_energy(exact_closed_em_form(pt, params), params.m);
  } catch (const DomainError&) {
    d.EYM = std::numeric_limits<double>::quiet_NaN();
    d.singular = true;
  }
  return d;
}

double euler_lagrange_residual(const LagrangianModel& model,
                               const std::function<TrajectoryState(double)>& curve, double t, double h) {
  // ẏ by central differences of the curve's velocity, one Richardson level. The divisor is the
  // spacing actually sampled: near blow-up h is within a few thousand ulps of t.
  auto central = [&](double hh) {
    const double tp = t + hh, tm = t - hh;
    const TrajectoryState a = curve(tp), b = curve(tm);
    return Vec2{(a.rdot - b.rdot) / (tp - tm), (a.phidot - b.phidot) / (tp - tm)};
  };
  const Vec2 c1 = central(h), c2 = central(0.5 * h);
  const Vec2 acc{(4.0 * c2[0] - c1[0]) / 3.0, (4.0 * c2[1] - c1[1]) / 3.0};
  const JetPoint p = curve(t).jet();

  // d/dt ∂L/∂yⁱ = ∂²L/∂t∂yⁱ + ∂²L/∂xʲ∂yⁱ yʲ + ∂²L/∂yʲ∂yⁱ ẏʲ
  double num[2], sc[2];
  for (std::size_t i = 0; i < 2; ++i) {
    const Var yi = fibre_var(i);
    const double terms[6] = {partial(model, p, {Var::t, yi}),
                             partial(model, p, {Var::r, yi}) * p.y[0],
                             partial(model, p, {Var::phi, yi}) * p.y[1],
                             partial(model, p, {Var::rdot, yi}) * acc[0],
                             partial(model, p, {Var::phidot, yi}) * acc[1],
                             -partial(model, p, {spatial_var(i)})};
    double sum = 0.0, mag = 0.0;
    for (double v : terms) {
      sum += v;
      mag += std::abs(v);
    }
    num[i] = std::abs(sum);
    sc[i] = mag;
  }
  const double floor = std::max(1e-12 * std::max(sc[0], sc[1]), std::numeric_limits<double>::min());
  return std::max(num[0] / std::max(sc[0], floor), num[1] / std::max(sc[1], floor));
}

namespace {

using State4 = Dopri5<4>::State;

TrajectoryState to_state(double t, const State4& x) { return {t, x[0], x[1], x[2], x[3]}; }

SampleDiagnostics generic_diagnostics(const LagrangianModel& model, const TrajectoryState& s) {
  SampleDiagnostics d;
  const JetPoint pt = s.jet();
  try {
    const GeometryBundle b = geometry_bundle(model, pt);
    const Mat2& g = b.metric.g;
    double gyy = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) gyy += g[i][j] * pt.y[i] * pt.y[j];
    d.H = gyy - model.value(pt);
    d.E_inst = d.H;
    d.g11 = g[0][0];
    d.EYM = b.ym_energy;
  } catch (const DomainError&) {
    d.g11 = 0.5 * partial(model, pt, {Var::rdot, Var::rdot});
    d.H = d.E_inst = d.EYM = std::numeric_limits<double>::quiet_NaN();
    d.singular = true;
  }
  return d;
}

}  // namespace

TrajectorySeries integrate_geodesic(const SimConfig& config, const LagrangianModel& model) {
  config.validate();
  const JetPoint start = config.initial.jet();
  if (auto v = model.domain_violation(start)) throw DomainError("initial state invalid: " + *v);

  const auto* mono = dynamic_cast<const MonolayerModel*>(&model);
  const double m = model.mass();
  auto diagnostics = [&](const TrajectoryState& s) {
    return mono ? monolayer_diagnostics(s, mono->params()) : generic_diagnostics(model, s);
  };
  auto g11_of = [&](const TrajectoryState& s) {
    if (mono) {
      const double K = velocity_coefficient_K(s.t, s.r, mono->params());
      return 0.5 * m - K / (s.rdot * s.rdot * s.rdot);
    }
    return 0.5 * partial(model, s.jet(), {Var::rdot, Var::rdot});
  };
  auto einst_of = [&](const TrajectoryState& s) { return instanton_energy(s.jet(), mono->params()); };

  auto rhs = [&](const State4& x, State4& dx, double t) {
    const JetPoint p = JetPoint::make(t, x[0], x[1], x[2], x[3]);
    if (auto v = model.domain_violation(p)) throw DomainError(*v);
    Vec2 G;
    if (auto e = model.exact_spray(p)) {
      G = *e;
    } else {
      G = semispray_from_lagrangian(model, p).G;
    }
    dx = {x[2], x[3], -2.0 * G[0], -2.0 * G[1]};
  };

  TrajectorySeries out;
  out.states.push_back(config.initial);
  out.diagnostics.push_back(diagnostics(config.initial));
  const double g11_tol = config.events.g11_rel * 0.5 * std::abs(m);

  // Euler–Lagrange residual at a node, differencing the flow through it re-integrated on a
  // short fine grid (the dense output is only 4th order in the velocity).
  auto node_residual = [&](double t0, const State4& x0, double h) {
    auto flow = [&](double t) {
      State4 x = x0;
      const double dt = (t - t0) / 8.0;
      boost::numeric::odeint::runge_kutta4<State4> rk;
      for (int k = 0; k < 8; ++k) rk.do_step(rhs, x, t0 + k * dt, dt);
      return to_state(t, x);
    };
    try {
      return euler_lagrange_residual(model, flow, t0, h);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  auto on_step = [&](const Dopri5<4>::Step& st) {
    const TrajectoryState a = to_state(st.t0, st.x0), b = to_state(st.t1, st.x1);
    auto at = [&](double t) { return to_state(t, st.at(t)); };

    // terminal events, earliest first
    std::optional<Event> terminal;
    auto consider = [&](EventType type, const std::function<double(double)>& f) {
      const double fa = f(st.t0), fb = f(st.t1);
      if ((fa > 0.0) == (fb > 0.0) && fb != 0.0) return;
      const auto [lo, hi] = bisect_sign_change(f, st.t0, st.t1);
      if (!terminal || lo < terminal->t_lo) terminal = Event{type, lo, hi, 0.5 * (lo + hi), at(0.5 * (lo + hi))};
    };
    consider(EventType::metric_singular, [&](double t) {
      const double g = g11_of(at(t));
      return std::abs(g) <= g11_tol ? 0.0 : g;
    });
    if (model.singular_at_zero_rdot()) consider(EventType::rdot_zero, [&](double t) { return at(t).rdot; });
    consider(EventType::r_collapse, [&](double t) { return at(t).r - config.events.r_min; });
    consider(EventType::velocity_blowup, [&](double t) {
      const TrajectoryState s = at(t);
      return config.events.speed_max - std::max(std::abs(s.rdot), std::abs(s.r * s.phidot));
    });

    if (mono) {
      const double ea = einst_of(a), eb = einst_of(b);
      if ((ea > 0.0) != (eb > 0.0)) {
        const auto [lo, hi] = bisect_sign_change([&](double t) { return einst_of(at(t)); }, st.t0, st.t1);
        if (!terminal || lo < terminal->t_lo) {
          out.events.push_back({EventType::einst_zero_crossing, lo, hi, 0.5 * (lo + hi), at(0.5 * (lo + hi))});
          if (config.events.stop_on_einst) terminal = out.events.back();
        }
      }
    }

    double el = 0.0;
    if (config.el_residual && !terminal) {
      const double h = 0.02 * (st.t1 - st.t0);
      if (out.states.size() == 1) out.diagnostics.front().el_residual = node_residual(st.t0, st.x0, h);
      el = node_residual(st.t1, st.x1, h);
    }
    if (terminal) {
      if (terminal->type != EventType::einst_zero_crossing) out.events.push_back(*terminal);
      const TrajectoryState s = at(terminal->t_lo);
      if (s.t > out.states.back().t) {
        out.states.push_back(s);
        SampleDiagnostics d = diagnostics(s);
        d.singular = true;
        out.diagnostics.push_back(d);
      } else {
        out.diagnostics.back().singular = true;
      }
      return false;
    }
    out.states.push_back(b);
    out.diagnostics.push_back(diagnostics(b));
    out.diagnostics.back().el_residual = el;
    return true;
  };

  Dopri5<4> integrator;
  const State4 x0{start.r(), start.phi(), start.rdot(), start.phidot()};
  const auto res = integrator.integrate(rhs, start.t, x0, config.t_end, config.integrator, on_step);
  out.stop = res.reason;
  if (res.reason == StopReason::step_underflow) {
    const double t = out.states.back().t;
    out.events.push_back({EventType::step_underflow, t, t, t, out.states.back()});
    out.diagnostics.back().singular = true;
  }
  spdlog::debug("integrate_geodesic: {} accepted, {} rejected, stop={}", res.accepted, res.rejected,
                to_string(res.reason));
  return out;
}

std::vector<Event> singularity_scan(const TrajectorySeries& series, const EventThresholds& th,
                                    bool rdot_singular) {
  std::vector<Event> events;
  const auto& s = series.states;
  const auto& d = series.diagnostics;
  auto scan = [&](EventType type, const std::function<double(std::size_t)>& f) {
    for (std::size_t k = 1; k < s.size(); ++k) {
      const double fa = f(k - 1), fb = f(k);
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      if ((fa > 0.0) == (fb > 0.0) && fb != 0.0) continue;
      const double ta = s[k - 1].t, tb = s[k].t;
      auto lin = [&](double t) { return fa + (fb - fa) * (t - ta) / (tb - ta); };
      const auto [lo, hi] = bisect_sign_change(lin, ta, tb);
      const double t = 0.5 * (lo + hi), w = (t - ta) / (tb - ta);
      auto mix = [&](double a, double b) { return a + w * (b - a); };
      const TrajectoryState st{t, mix(s[k - 1].r, s[k].r), mix(s[k - 1].phi, s[k].phi),
                               mix(s[k - 1].rdot, s[k].rdot), mix(s[k - 1].phidot, s[k].phidot)};
      events.push_back({type, ta, tb, t, st});
    }
  };
  if (d.size() == s.size()) {
    scan(EventType::metric_singular, [&](std::size_t k) { return d[k].g11; });
    scan(EventType::einst_zero_crossing, [&](std::size_t k) { return d[k].E_inst; });
  }
  if (rdot_singular) scan(EventType::rdot_zero, [&](std::size_t k) { return s[k].rdot; });
  scan(EventType::r_collapse, [&](std::size_t k) { return s[k].r - th.r_min; });
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return events;
}

}  // namespace jetlag
