#pragma once

#include <string>
#include <vector>

#include "jetlag/dynamics.hpp"
#include "jetlag/integrator.hpp"
#include "jetlag/monolayer.hpp"

namespace jetlag {

/// ode integrates the cube root of the resonance condition; closed_form evaluates the
/// large-time solution with v = |V|.
enum class ResonanceSource { ode, closed_form };

/// Exponent of the resonance condition m ṙ₀³ + 6p|V| r₀⁵ e^E = 0:
/// large_t uses E = 2|V|t/(R₀ − |V|t), exact uses E = 2|V|t/r₀.
enum class ResonanceForm { large_t, exact };

std::string to_string(ResonanceSource s);
std::string to_string(ResonanceForm f);

struct ResonanceConfig {
  MonolayerParams params;  // R0 required
  double t_start = 0.0;
  double t_end = 5e-4;
  ResonanceSource source = ResonanceSource::ode;
  ResonanceForm form = ResonanceForm::large_t;
  StepControl integrator{1e-12, 1e-12};
  double r_min = 1e-6;       // collapse threshold ending the ode run
  std::size_t grid_points = 201;  // closed_form sampling (uniform); ode runs take at least this many steps

  void validate() const;
};

struct ResonantSample {
  double t = 0.0;
  double r0 = 0.0;
  double r0dot = 0.0;
};

/// Samples of the resonant curve in the time variable of the resonance condition, i.e. the
/// curve the text writes r₀(−t). time_reverse() maps it back to the field's own time.
struct ResonantTrajectory {
  std::vector<ResonantSample> samples;
  ResonanceSource source = ResonanceSource::ode;
  ResonanceForm form = ResonanceForm::large_t;
  MonolayerParams params;
  StopReason stop = StopReason::reached_end;
  bool reversed = false;

  double t_first() const { return samples.front().t; }
  double t_last() const { return samples.back().t; }
  /// Cubic Hermite interpolation on the stored (r₀, ṙ₀); returns (r₀, ṙ₀) at t.
  ResonantSample at(double t) const;
};

/// ṙ₀ = −(6p|V|/m)^(1/3) r₀^(5/3) e^(E/3).
double resonance_rhs(double t, double r0, const MonolayerParams& params, ResonanceForm form);

/// |m ṙ₀³ + 6p|V| r₀⁵ e^E| / (|m ṙ₀³| + 6p|V| r₀⁵ e^E) for the exact and large-time exponents.
double residual_exact_exponent(const ResonantSample& s, const MonolayerParams& params);
double residual_large_time(const ResonantSample& s, const MonolayerParams& params);

/// The large-time closed-form solution, read with v = |V|. Throws DomainError once t reaches
/// R₀/|V| or when the braced quantity is not positive.
double closed_form_r0(double t, const MonolayerParams& params);
/// closed_form_r0 with ṙ₀ from Richardson-extrapolated central differences.
ResonantSample closed_form_sample(double t, const MonolayerParams& params);

/// The bracket 3mr₀/2 − m² e^(2|V|t/r₀) ṙ₀³ / (4p|V|r₀⁴) of the time-reversed field, relative to
/// the sum of its two terms' magnitudes. Evaluate it on time_reverse(ref) samples.
double reversed_bracket_relative(const ResonantSample& s, const MonolayerParams& params);

/// (t, r₀, ṙ₀) → (−t, r₀, −ṙ₀), re-ordered by increasing time. Involutive.
ResonantTrajectory time_reverse(const ResonantTrajectory& ref);

/// Seeds r₀(t_start) = R₀ − |V| t_start and integrates forward, stopping at r₀ < r_min.
ResonantTrajectory resonant_trajectory(const ResonanceConfig& config);

/// Largest relative interpolation error over the reference: for ode sources the mismatch
/// between the Hermite derivative and the ODE at interval midpoints, for closed_form the
/// Hermite value against the formula.
double interpolation_error_estimate(const ResonantTrajectory& ref);

/// Which second derivative stands for Ü(t, r₀) in the δr equation.
enum class UddotMeaning { d2U_dr2, d2U_dt2 };

struct DeviationState {
  double t = 0.0;
  double dr = 0.0;
  double drdot = 0.0;
  double dphi = 0.0;
  double dphidot = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
};

struct DeviationConfig {
  double C1 = 0.0;
  double C2 = 1.0;
  double dr0 = 0.0;
  double drdot0 = 0.0;
  UddotMeaning uddot = UddotMeaning::d2U_dr2;
  StepControl integrator{1e-12, 1e-12};
  double interp_tol = 1e-6;
};

/// A δr̈ + B δṙ + C δr = 0 and δφ̈ + D δφ̇ = 0 along the reference (the ε = 0 separated case).
struct DeviationCoefficients {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
};
DeviationCoefficients deviation_coefficients(const ResonantSample& s, const MonolayerParams& params,
                                             UddotMeaning uddot = UddotMeaning::d2U_dr2);

/// δφ = C₁ + C₂ t.
inline double delta_phi_solution(double C1, double C2, double t) { return C1 + C2 * t; }

/// Integrates the deviation equations over the reference span with δφ(t₀) = C₁ + C₂t₀,
/// δφ̇(t₀) = C₂. Throws DomainError when the reference grid is too coarse for interp_tol.
std::vector<DeviationState> deviation_integrate(const ResonantTrajectory& ref, const DeviationConfig& config);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};
AffineFit affine_fit(const std::vector<double>& t, const std::vector<double>& y);

/// r = r₀(−t) + δr, φ = δφ on the deviation grid (φ̇₀ = 0, so φ₀ is constant zero).
TrajectorySeries compose_perturbed(const ResonantTrajectory& ref, const std::vector<DeviationState>& dev);

struct Plateau {
  bool found = false;
  double t_begin = 0.0;
  double t_end = 0.0;
  double threshold = 0.0;
};

/// Longest run of consecutive samples with |dr/dt| ≤ rel_threshold · max|dr/dt|.
Plateau detect_plateau(const std::vector<double>& t, const std::vector<double>& drdt,
                       double rel_threshold = 0.05);

}  // namespace jetlag
