#include <cmath>

#include "doctest.h"
#include "jetlag/dynamics.hpp"
#include "jetlag/models.hpp"
#include "jetlag/resonance.hpp"
#include "jetlag/sampling.hpp"
#include "jetlag/validation.hpp"

using namespace jetlag;

namespace {
const MonolayerParams kP{};

// largest Cartesian distance from the straight line through the initial state
double line_error(const TrajectorySeries& s) {
  const auto& a = s.states.front();
  const double vx = a.rdot * std::cos(a.phi) - a.r * a.phidot * std::sin(a.phi);
  const double vy = a.rdot * std::sin(a.phi) + a.r * a.phidot * std::cos(a.phi);
  double e = 0.0;
  for (const auto& q : s.states) {
    const double dt = q.t - a.t;
    e = std::max(e, std::hypot(q.r * std::cos(q.phi) - a.r * std::cos(a.phi) - vx * dt,
                               q.r * std::sin(q.phi) - a.r * std::sin(a.phi) - vy * dt));
  }
  return e;
}

SimConfig free_config(TrajectoryState s0) {
  SimConfig c;
  c.initial = s0;
  c.t_end = 1.0;
  c.integrator = StepControl{1e-12, 1e-12};
  return c;
}

MonolayerParams with_R0(double R0) {
  MonolayerParams p;
  p.R0 = R0;
  return p;
}
}  // namespace

TEST_CASE("free polar geodesics") {
  FreePolarModel fp(1.0);
  SUBCASE("radial motion is r = 1 + t") {
    const auto s = integrate_geodesic(free_config({0.0, 1.0, 0.0, 1.0, 0.0}), fp);
    CHECK(s.stop == StopReason::reached_end);
    for (const auto& q : s.states) CHECK(std::abs(q.r - (1.0 + q.t)) < 1e-8);
    CHECK(s.states.back().t == 1.0);
  }
  SUBCASE("straight lines, r^2 phidot conserved") {
    for (TrajectoryState s0 : {TrajectoryState{0.0, 1.0, 0.0, 0.3, 0.7}, TrajectoryState{0.0, 2.0, 1.0, -0.5, 0.2}}) {
      const auto s = integrate_geodesic(free_config(s0), fp);
      CHECK(line_error(s) < 1e-8);
      for (const auto& q : s.states) CHECK(std::abs(q.r * q.r * q.phidot - s0.r * s0.r * s0.phidot) < 1e-8);
      CHECK(s.max_el_residual() < 1e-8);
    }
  }
  SUBCASE("fixed-step global error shows fifth order") {
    auto err = [&](double h) {
      SimConfig c = free_config({0.0, 1.0, 0.0, 0.3, 0.7});
      c.integrator.fixed_step = h;
      c.el_residual = false;
      return line_error(integrate_geodesic(c, fp));
    };
    const double e1 = err(0.05), e2 = err(0.025);
    CHECK(std::log2(e1 / e2) > 4.5);
  }
}

TEST_CASE("monolayer trajectories") {
  MonolayerModel m(kP);
  SimConfig c;
  c.params = kP;
  c.t_end = 2e-2;
  SUBCASE("compressing start ends in velocity blow-up") {
    c.initial = {1e-3, 0.5, 0.0, -1.0, 0.2};
    const auto s = integrate_geodesic(c, m);
    REQUIRE(!s.events.empty());
    CHECK(s.events.back().type == EventType::velocity_blowup);
    CHECK(s.events.back().t == doctest::Approx(0.003253).epsilon(1e-3));
    CHECK(s.max_el_residual() < 1e-5);
    for (std::size_t k = 1; k < s.states.size(); ++k) CHECK(s.states[k].t > s.states[k - 1].t);
  }
  SUBCASE("EL residual stays small when steps approach the ulp of t") {
    c.initial = {5e-3, 0.3, 1.0, -4.0, 0.9};
    const auto s = integrate_geodesic(c, m);
    REQUIRE(s.events.back().type == EventType::velocity_blowup);
    CHECK(s.max_el_residual() < 1e-5);
  }
  SUBCASE("expanding start reaches the g11 = 0 locus") {
    c.initial = {2e-3, 0.5, 0.0, 1.0, 0.1};
    const auto s = integrate_geodesic(c, m);
    REQUIRE(!s.events.empty());
    CHECK(s.events.back().type == EventType::metric_singular);
    CHECK(std::abs(s.diagnostics.back().g11) < 2e-2 * 0.5 * kP.m);
    CHECK(s.max_el_residual() < 1e-5);
  }
  SUBCASE("Hamiltonian split along the run") {
    c.initial = {1e-3, 0.8, 0.0, -2.0, -0.5};
    const auto s = integrate_geodesic(c, m);
    for (const auto& q : s.states) {
      const auto h = hamiltonian_split(q, kP);
      CHECK(h.identity_residual < 1e-10);
      CHECK(h.decomposition_residual < 1e-10);
    }
  }
  SUBCASE("invalid start") {
    c.initial = {1e-3, 0.5, 0.0, 0.0, 0.2};
    CHECK_THROWS_AS(integrate_geodesic(c, m), DomainError);
  }
}

TEST_CASE("instanton energy example") {
  CHECK(instanton_energy(JetPoint::make(0.0, 1.0, 0.0, -1.0, 0.0), kP) ==
        doctest::Approx(0.5 - 10000.0 + 40.0 / 3).epsilon(1e-14));
}

TEST_CASE("singularity_scan") {
  TrajectorySeries s;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    s.states.push_back({t, 1.0 - 0.05 * t, 0.0, 0.5 - t, 0.0});
    SampleDiagnostics d;
    d.g11 = 0.3 - t;
    d.E_inst = 1.0;
    s.diagnostics.push_back(d);
  }
  const auto ev = singularity_scan(s);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].type == EventType::metric_singular);
  CHECK(ev[0].t == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(ev[1].type == EventType::rdot_zero);
  CHECK(ev[1].t == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ev[1].state.rdot == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(singularity_scan(s, {}, false).size() == 1);
}

TEST_CASE("resonant reference") {
  ResonanceConfig rc;
  rc.params = with_R0(1.0);
  const auto lt = resonant_trajectory(rc);
  rc.form = ResonanceForm::exact;
  const auto ex = resonant_trajectory(rc);
  CHECK(lt.samples.size() >= rc.grid_points);
  for (const auto& s : lt.samples) {
    CHECK(residual_large_time(s, rc.params) < 1e-6);
    CHECK(std::abs(closed_form_r0(s.t, rc.params) - s.r0) < 1e-9 * s.r0);
  }
  for (const auto& s : ex.samples) CHECK(residual_exact_exponent(s, rc.params) < 1e-6);
  for (const auto& s : time_reverse(ex).samples) CHECK(reversed_bracket_relative(s, rc.params) < 1e-6);

  const auto twice = time_reverse(time_reverse(ex));
  CHECK(!twice.reversed);
  for (std::size_t k = 0; k < ex.samples.size(); ++k) {
    CHECK(twice.samples[k].t == ex.samples[k].t);
    CHECK(twice.samples[k].r0 == ex.samples[k].r0);
    CHECK(twice.samples[k].r0dot == ex.samples[k].r0dot);
  }
  CHECK(interpolation_error_estimate(ex) < 1e-6);

  ResonanceConfig bad = rc;
  bad.form = ResonanceForm::large_t;
  bad.t_end = 2e-3;
  CHECK_THROWS_AS(resonant_trajectory(bad), DomainError);
  CHECK_THROWS_AS(closed_form_r0(1e-3, rc.params), DomainError);
}

TEST_CASE("deviation equations") {
  ResonanceConfig rc;
  rc.params = with_R0(1.0);
  rc.form = ResonanceForm::exact;
  const auto ref = resonant_trajectory(rc);
  DeviationConfig dc;
  const auto dev = deviation_integrate(ref, dc);
  std::vector<double> t, y;
  for (const auto& d : dev) {
    CHECK(std::abs(d.dphi - d.t) < 1e-8);
    CHECK(d.dr == 0.0);
    t.push_back(d.t);
    y.push_back(d.dphi);
  }
  const auto fit = affine_fit(t, y);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(fit.intercept) < 1e-8);
  CHECK(fit.max_residual < 1e-8);
  CHECK(delta_phi_solution(0.5, 2.0, 1.5) == 3.5);

  SUBCASE("composition with zero deviation returns the reference") {
    const auto comp = compose_perturbed(ref, dev);
    for (std::size_t k = 0; k < dev.size(); ++k) {
      CHECK(comp.states[k].r == doctest::Approx(ref.at(dev[k].t).r0).epsilon(1e-14));
      CHECK(comp.states[k].phi == dev[k].dphi);
    }
  }
  SUBCASE("radial deviation evolves") {
    DeviationConfig d2;
    d2.dr0 = 1e-3;
    const auto dv = deviation_integrate(ref, d2);
    CHECK(std::abs(dv.back().dr - 1e-3) > 1e-9);
    for (const auto& d : dv) CHECK(std::isfinite(d.dr));
  }
  SUBCASE("coarse reference grid is rejected") {
    ResonantTrajectory coarse = ref;
    coarse.samples = {ref.samples.front(), ref.samples.back()};
    CHECK_THROWS_AS(deviation_integrate(coarse, dc), DomainError);
  }
}

TEST_CASE("detect_plateau") {
  std::vector<double> t, v;
  for (int k = 0; k < 100; ++k) {
    t.push_back(k);
    v.push_back(k >= 30 && k < 70 ? 0.01 : 1.0);
  }
  const Plateau p = detect_plateau(t, v, 0.05);
  CHECK(p.found);
  CHECK(p.t_begin == 30.0);
  CHECK(p.t_end == 69.0);
  CHECK(!detect_plateau(t, std::vector<double>(100, 1.0), 0.05).found);
}

TEST_CASE("sampler") {
  Sampler a(7), b(7);
  for (int k = 0; k < 1000; ++k) {
    const double x = a.unit();
    CHECK(x == b.unit());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  const auto p = sample_points(50, 3);
  for (const auto& q : p) {
    CHECK(q.t >= 1e-4);
    CHECK(q.t < 1e-2);
    CHECK(q.rdot() < -0.1);
  }
}

TEST_CASE("validation report") {
  ValidationConfig vc;
  vc.samples = 20;
  const auto rep = run_validation(vc);
  CHECK(rep.passed());
  for (const auto& r : rep.records)
    if (r.verdict == Verdict::flagged) CHECK(r.rel_err > r.tolerance);
  const auto again = run_validation(vc);
  REQUIRE(again.records.size() == rep.records.size());
  for (std::size_t k = 0; k < rep.records.size(); ++k) CHECK(again.records[k].rel_err == rep.records[k].rel_err);

  vc.negative_control = true;
  const auto neg = run_validation(vc);
  CHECK(!neg.passed());
  CHECK(neg.unexplained() > 100);
}
