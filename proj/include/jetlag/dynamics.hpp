#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jetlag/integrator.hpp"
#include "jetlag/jet_point.hpp"
#include "jetlag/lagrangian.hpp"
#include "jetlag/monolayer.hpp"
#include "jetlag/numeric_partials.hpp"

namespace jetlag {

struct TrajectoryState {
  double t = 0.0;
  double r = 1.0;
  double phi = 0.0;
  double rdot = 0.0;
  double phidot = 0.0;

  JetPoint jet() const { return JetPoint::make(t, r, phi, rdot, phidot); }
  static TrajectoryState from(const JetPoint& p) { return {p.t, p.r(), p.phi(), p.rdot(), p.phidot()}; }
};

/// Per-sample diagnostics. Monolayer runs use the closed forms; other models use the
/// energy function g_ij yⁱyʲ − L for both E_inst and H, and H_YM = 0.
struct SampleDiagnostics {
  double E_inst = 0.0;
  double H = 0.0;
  double H_YM = 0.0;
  double EYM = 0.0;
  double g11 = 0.0;
  double el_residual = 0.0;  // relative Euler–Lagrange residual at this sample
  bool singular = false;
};

enum class EventType {
  metric_singular,
  rdot_zero,
  r_collapse,
  einst_zero_crossing,
  velocity_blowup,
  step_underflow
};
std::string to_string(EventType e);

struct Event {
  EventType type;
  double t_lo = 0.0, t_hi = 0.0;  // bracketing interval
  double t = 0.0;                 // refined location
  TrajectoryState state;          // interpolated state at t
};

struct EventThresholds {
  double r_min = 1e-6;        // r below this is a collapse
  double g11_rel = 1e-2;      // |g11| < g11_rel·m/2 counts as reaching the singular locus
  double speed_max = 1e6;     // |ṙ| or |r φ̇| above this ends the run (finite-time blow-up)
  bool stop_on_einst = false;  // instanton crossings are recorded, not terminal, by default
};

struct SimConfig {
  MonolayerParams params;
  TrajectoryState initial;
  double t_end = 1.0;
  StepControl integrator;
  double epsilon = 0.0;  // φ̇₀ used by sweep grids for their perturbed runs
  EventThresholds events;
  bool el_residual = true;

  void validate() const;
};

struct TrajectorySeries {
  std::vector<TrajectoryState> states;
  std::vector<SampleDiagnostics> diagnostics;
  std::vector<Event> events;
  StopReason stop = StopReason::reached_end;

  double max_el_residual() const;
  bool empty() const { return states.empty(); }
};

/// Solves dy/dt + 2G(t, x, y) = 0, dx/dt = y with the model's exact spray when it has one.
/// Stops at t_end or at the first terminal event (g₁₁ → 0, ṙ → 0 for models singular there,
/// r → 0, speed blow-up). Step-size underflow is reported as an event with the last good state kept.
TrajectorySeries integrate_geodesic(const SimConfig& config, const LagrangianModel& model);

struct HamiltonianSplit {
  double H = 0.0;     // g₁₁ṙ² + g₂₂φ̇² − L = −U
  double H_YM = 0.0;
  double dL = 0.0;    // δL = U + H_YM
  double L0 = 0.0;    // g₂₂φ̇² + g₁₁ṙ² − H_YM
  double identity_residual = 0.0;       // |δL + (H − H_YM)|, relative to the largest term
  double decomposition_residual = 0.0;  // |L − (L₀ + δL)|, relative to the largest term
};

HamiltonianSplit hamiltonian_split(const TrajectoryState& s, const MonolayerParams& params);

/// max over components of |d/dt(∂L/∂yⁱ) − ∂L/∂xⁱ| relative to the sum of the magnitudes of its
/// chain-rule terms. All partials of L come from `partial`; ẏ is a Richardson-extrapolated
/// central difference of the curve's velocity with step h, so the spray is never consulted.
/// Each component's scale is floored at 1e-12 of the largest one.
double euler_lagrange_residual(const LagrangianModel& model,
                               const std::function<TrajectoryState(double)>& curve, double t, double h);

/// Scans sampled diagnostics for sign changes of g₁₁, ṙ and E_inst and for r below r_min,
/// refining each location by bisection on linear interpolation between the bracketing samples.
std::vector<Event> singularity_scan(const TrajectorySeries& series, const EventThresholds& th = {},
                                    bool rdot_singular = true);

/// Closed-form diagnostics at one state (monolayer model).
SampleDiagnostics monolayer_diagnostics(const TrajectoryState& s, const MonolayerParams& params);

}  // namespace jetlag
