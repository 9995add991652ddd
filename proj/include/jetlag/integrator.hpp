#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "jetlag/errors.hpp"

namespace jetlag {

/// Step-size control for the Dormand–Prince 5(4) driver.
struct StepControl {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;   // 0 picks a step from the local derivative
  double min_step_rel = 1e-13;  // underflow when h < min_step_rel·max(|t|, span)
  std::size_t max_steps = 2'000'000;
  double fixed_step = 0.0;  // > 0 disables error control

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw DomainError("max_step must be positive");
    if (fixed_step < 0.0) throw DomainError("fixed_step must be non-negative");
  }
};

enum class StopReason { reached_end, stopped_by_callback, step_underflow, max_steps };

inline std::string to_string(StopReason s) {
  switch (s) {
    case StopReason::reached_end: return "reached_end";
    case StopReason::stopped_by_callback: return "event";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::max_steps: return "max_steps";
  }
  return "unknown";
}

/// Adaptive DP5(4) over std::array states, using odeint's dopri5 stage scheme and its
/// continuous extension. A right-hand side that throws DomainError or returns non-finite
/// values rejects the trial step, so integration can approach a singular locus and stop
/// with step_underflow instead of crashing.
template <std::size_t N>
class Dopri5 {
 public:
  using State = std::array<double, N>;
  using Rhs = std::function<void(const State& x, State& dxdt, double t)>;

  /// One accepted step. at() is valid only inside the step callback that received it.
  class Step {
   public:
    double t0, t1;
    const State& x0;
    const State& x1;
    const State& dx0;
    const State& dx1;

    State at(double t) const {
      State out;
      if (t <= t0) return x0;
      if (t >= t1) return x1;
      stepper_.calc_state(t, out, x0, dx0, t0, x1, dx1, t1);
      return out;
    }

   private:
    friend class Dopri5;
    Step(double a, double b, const State& xa, const State& xb, const State& da, const State& db,
         const boost::numeric::odeint::runge_kutta_dopri5<State>& st)
        : t0(a), t1(b), x0(xa), x1(xb), dx0(da), dx1(db), stepper_(st) {}
    const boost::numeric::odeint::runge_kutta_dopri5<State>& stepper_;
  };

  /// Returns false from the callback to stop after the current step.
  using OnStep = std::function<bool(const Step&)>;

  struct Result {
    StopReason reason = StopReason::reached_end;
    double t = 0.0;
    State x{};
    std::size_t accepted = 0, rejected = 0;
  };

  Result integrate(const Rhs& rhs, double t0, const State& x0, double t_end, const StepControl& ctl,
                   const OnStep& on_step) {
    ctl.validate();
    if (!(t_end > t0)) throw DomainError("integrator: t_end must exceed the start time");
    Result res;
    res.t = t0;
    res.x = x0;
    State dx{};
    if (!eval(rhs, x0, dx, t0)) throw DomainError("integrator: right-hand side undefined at the start");

    const double span = t_end - t0;
    const double h_min = ctl.min_step_rel * std::max(std::abs(t0), span);
    double h = ctl.fixed_step > 0.0 ? ctl.fixed_step : initial_step(x0, dx, span, ctl);
    h = std::min(h, ctl.max_step);

    State x = x0, x_new{}, dx_new{}, err{};
    double t = t0;
    while (t < t_end) {
      if (res.accepted >= ctl.max_steps) {
        res.reason = StopReason::max_steps;
        break;
      }
      bool last = false;
      if (t + h >= t_end || (t_end - (t + h)) < 1e-12 * span) {
        h = t_end - t;
        last = true;
      }
      bool ok = trial(rhs, x, dx, t, h, x_new, dx_new, err);
      double norm = ok ? error_norm(x, x_new, err, ctl) : std::numeric_limits<double>::infinity();
      if (ctl.fixed_step > 0.0) {
        if (!ok) {
          res.reason = StopReason::step_underflow;
          break;
        }
        norm = 0.0;
      }
      if (norm > 1.0) {
        ++res.rejected;
        h *= ok ? std::max(0.1, 0.9 * std::pow(norm, -0.2)) : 0.25;
        if (h < h_min) {
          res.reason = StopReason::step_underflow;
          break;
        }
        continue;
      }
      const double t_new = last ? t_end : t + h;
      ++res.accepted;
      const Step step(t, t_new, x, x_new, dx, dx_new, stepper_);
      const bool keep_going = on_step(step);
      t = t_new;
      x = x_new;
      dx = dx_new;
      res.t = t;
      res.x = x;
      if (!keep_going) {
        res.reason = StopReason::stopped_by_callback;
        break;
      }
      if (ctl.fixed_step > 0.0) {
        h = ctl.fixed_step;
      } else {
        const double fac = norm > 0.0 ? 0.9 * std::pow(norm, -0.2) : 5.0;
        h = std::min(ctl.max_step, h * std::clamp(fac, 0.2, 5.0));
      }
    }
    return res;
  }

 private:
  static bool finite(const State& s) {
    for (double v : s)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static bool eval(const Rhs& rhs, const State& x, State& dx, double t) {
    try {
      rhs(x, dx, t);
    } catch (const DomainError&) {
      return false;
    }
    return finite(dx);
  }

  bool trial(const Rhs& rhs, const State& x, const State& dx, double t, double h, State& out,
             State& dx_out, State& err) {
    bool ok = true;
    auto sys = [&](const State& s, State& d, double tt) {
      if (!ok) {
        d.fill(0.0);
        return;
      }
      if (!finite(s) || !eval(rhs, s, d, tt)) {
        ok = false;
        d.fill(0.0);
      }
    };
    stepper_.do_step(sys, x, dx, t, out, dx_out, h, err);
    return ok && finite(out) && finite(dx_out) && finite(err);
  }

  static double error_norm(const State& x0, const State& x1, const State& err, const StepControl& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = c.abs_tol + c.rel_tol * std::max(std::abs(x0[i]), std::abs(x1[i]));
      s += (err[i] / sc) * (err[i] / sc);
    }
    return std::sqrt(s / N);
  }

  // Hairer's starting-step heuristic, first-order part only.
  static double initial_step(const State& x, const State& dx, double span, const StepControl& c) {
    if (c.initial_step > 0.0) return c.initial_step;
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = c.abs_tol + c.rel_tol * std::abs(x[i]);
      d0 += (x[i] / sc) * (x[i] / sc);
      d1 += (dx[i] / sc) * (dx[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    const double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    return std::min(h, 0.1 * span);
  }

  boost::numeric::odeint::runge_kutta_dopri5<State> stepper_;
};

/// Bisection for a sign change of f on [a, b] given f(a)·f(b) ≤ 0; returns the bracketing pair.
inline std::pair<double, double> bisect_sign_change(const std::function<double(double)>& f, double a,
                                                    double b, int iterations = 60) {
  double fa = f(a);
  for (int i = 0; i < iterations && b - a > 0.0; ++i) {
    const double c = 0.5 * (a + b);
    if (c <= a || c >= b) break;
    const double fc = f(c);
    if ((fa <= 0.0) == (fc <= 0.0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return {a, b};
}

}  // namespace jetlag
