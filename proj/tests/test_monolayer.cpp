#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jetlag/errors.hpp"
#include "jetlag/models.hpp"
#include "jetlag/monolayer.hpp"
#include "jetlag/special_functions.hpp"
#include "jetlag/torsion.hpp"
#include "oracles.hpp"

using namespace jetlag;

namespace {
const MonolayerParams kP{};
const double U_z150 = 1.024279045705886626543165e63;
const JetPoint kSample = JetPoint::make(1e-3, 0.5, 0.0, -1.0, 0.2);

// ratio m ṙ³ / 2K that orders the large-K expansion
double expansion_ratio(const JetPoint& q) {
  return kP.m * std::pow(q.rdot(), 3) / (2.0 * velocity_coefficient_K(q.t, q.r(), kP));
}
}  // namespace

TEST_CASE("exp_integral_f") {
  CHECK(oracle::rel_err(exp_integral_f(1.0), 1.8951178163559368) < 1e-10);
  CHECK(oracle::rel_err(exp_integral_f(-1.0), -0.21938393439552027) < 1e-10);
  CHECK(oracle::rel_err(exp_integral_f(1.0), oracle::ei(1.0)) < 1e-10);
  CHECK(oracle::rel_err(exp_integral_f(-1.0), oracle::ei(-1.0)) < 1e-10);
  const double integral = oracle::gk([](double u) { return std::exp(u) / u; }, 1.0, 2.0);
  CHECK(std::abs(exp_integral_f(2.0) - exp_integral_f(1.0) - integral) < 1e-9);
  CHECK_THROWS_AS(exp_integral_f(0.0), DomainError);

  SUBCASE("all branches against quadrature") {
    for (double z : {-60.0, -12.0, -3.0, -1.0, -0.999, -0.2, -1e-6, 1e-6, 0.5, 3.0, 6.5, 15.0, 39.9, 40.1, 80.0, 300.0})
      CHECK(oracle::rel_err(exp_integral_f(z), oracle::ei(z)) < 1e-10);
    for (double z : {0.5, 39.9, 40.1, 300.0})
      CHECK(oracle::rel_err(exp_neg_times_f(z), std::exp(-z) * oracle::ei(z)) < 1e-10);
    CHECK(std::isfinite(exp_neg_times_f(1000.0)));
  }

  SUBCASE("derivative identity, second-order convergence") {
    for (double z = -5.0; z <= 5.0; z += 0.37) {
      if (std::abs(z) < 0.2) continue;
      auto err = [&](double h) {
        return std::abs((exp_integral_f(z + h) - exp_integral_f(z - h)) / (2 * h) - std::exp(z) / z);
      };
      const double e1 = err(1e-2), e2 = err(5e-3);
      CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
  }
}

TEST_CASE("potential_U") {
  CHECK(potential_U(0.0, 1.3, kP) == doctest::Approx(-4.0 / 3 * 10 * std::pow(1.3, 5)).epsilon(1e-14));
  CHECK(potential_U(0.0, 1.0, kP) == doctest::Approx(-40.0 / 3).epsilon(1e-14));
  // independently evaluated at 30 digits
  CHECK(oracle::rel_err(potential_U(1e-3, 0.5, kP), 14.3906641664886024608127053108) < 1e-13);
  CHECK_THROWS_AS(potential_U(1e-3, 0.0, kP), DomainError);

  SUBCASE("both evaluation forms agree where they meet") {
    for (double r : {0.1, 0.37, 1.0}) {
      const double t40 = 40.0 * r / 2000.0;
      const auto lo = potential_derivatives(t40 * (1 - 1e-12), r, kP);
      const auto hi = potential_derivatives(t40 * (1 + 1e-12), r, kP);
      CHECK(oracle::rel_err(lo.U, hi.U) < 1e-9);
      CHECK(oracle::rel_err(lo.U_r, hi.U_r) < 1e-9);
      CHECK(oracle::rel_err(lo.U_rr, hi.U_rr) < 1e-9);
      CHECK(oracle::rel_err(lo.U_t, hi.U_t) < 1e-9);
      CHECK(oracle::rel_err(lo.U_tt, hi.U_tt) < 1e-9);
      CHECK(oracle::rel_err(script_U(t40 * (1 - 1e-12), r, kP), script_U(t40 * (1 + 1e-12), r, kP)) < 1e-9);
      CHECK(oracle::rel_err(script_U_t(t40 * (1 - 1e-12), r, kP), script_U_t(t40 * (1 + 1e-12), r, kP)) < 1e-9);
    }
    // 30-digit reference deep in the cancelled regime (z = 150)
    CHECK(oracle::rel_err(potential_U(7.5e-3, 0.1, kP), U_z150) < 1e-12);
  }

  SUBCASE("analytic derivatives against differences") {
    for (const auto& q : oracle::monolayer_sample(30, 23)) {
      const auto d = potential_derivatives(q.t, q.r(), kP);
      const double z = 2000.0 * q.t / q.r();
      const double hr = 1e-4 * q.r() / std::max(1.0, z), ht = 1e-4 * q.r() / 2000.0;
      auto U = [&](double t, double r) { return potential_U(t, r, kP); };
      auto Ur = [&](double t, double r) { return potential_derivatives(t, r, kP).U_r; };
      auto Ut = [&](double t, double r) { return potential_derivatives(t, r, kP).U_t; };
      const double scale_r = std::abs(d.U) / q.r() + std::abs(d.U_r);
      CHECK(std::abs((U(q.t, q.r() + hr) - U(q.t, q.r() - hr)) / (2 * hr) - d.U_r) < 1e-6 * scale_r);
      CHECK(std::abs((U(q.t + ht, q.r()) - U(q.t - ht, q.r())) / (2 * ht) - d.U_t) <
            1e-6 * (std::abs(d.U_t) + 2000.0 * std::abs(d.U) / q.r()));
      CHECK(std::abs((Ur(q.t, q.r() + hr) - Ur(q.t, q.r() - hr)) / (2 * hr) - d.U_rr) <
            1e-6 * (std::abs(d.U_rr) + scale_r / q.r()));
      CHECK(std::abs((Ut(q.t + ht, q.r()) - Ut(q.t - ht, q.r())) / (2 * ht) - d.U_tt) <
            1e-6 * (std::abs(d.U_tt) + 2000.0 * std::abs(d.U_t) / q.r()));
    }
  }
}

TEST_CASE("lagrangian") {
  MonolayerParams off = kP;
  off.p = 0.0;
  CHECK(monolayer_lagrangian(JetPoint::make(0.3, 2.0, 0.0, 1.0, 1.0), off) == doctest::Approx(2.5));
  CHECK(monolayer_lagrangian(JetPoint::make(0.0, 1.0, 0.0, -1.0, 0.0), kP) ==
        doctest::Approx(0.5 + 10000.0 - 40.0 / 3).epsilon(1e-14));
  CHECK_THROWS_AS(monolayer_lagrangian(JetPoint::make(0.0, 1.0, 0.0, 0.0, 0.0), kP), DomainError);
  const double Us = electrocapillarity_potential(kSample, kP);
  CHECK(Us == doctest::Approx(-velocity_coefficient_K(kSample.t, 0.5, kP) / -1.0 + potential_U(kSample.t, 0.5, kP)));

  MonolayerModel m(kP);
  double sum = 0.0;
  for (std::size_t k = 0; k < m.term_count(); ++k) sum += m.term(k, kSample);
  CHECK(sum == doctest::Approx(m.value(kSample)).epsilon(1e-14));
  CHECK(oracle::rel_err(numeric_partial(m, kSample, {Var::rdot, Var::rdot}) / 2.0, closed_metric(kSample, kP).g[0][0]) < 1e-6);
  CHECK(m.domain_violation(JetPoint::make(0.0, 1.0, 0.0, 0.0, 0.0)).has_value());

  MonolayerParams bad = kP;
  bad.V_abs = -1.0;
  CHECK_THROWS_AS(MonolayerModel{bad}, DomainError);
}

TEST_CASE("closed_metric") {
  const Metric g = closed_metric(JetPoint::make(0.0, 2.0, 0.0, -1.0, 0.0), kP);
  CHECK(g.g[1][1] == doctest::Approx(2.0));
  MonolayerParams off = kP;
  off.p = 0.0;
  CHECK(closed_metric(JetPoint::make(0.0, 2.0, 0.0, -1.0, 0.0), off).g[0][0] == doctest::Approx(0.5));
  for (const auto& q : oracle::monolayer_sample(100, 29)) {
    const Metric x = closed_metric(q, kP);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 2; ++k) s += x.g[i][k] * x.g_inv[k][j];
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
  }
  // g11 = 0 exactly when ṙ³ = 2K/m
  const double K = velocity_coefficient_K(0.0, 0.5, kP);
  CHECK_THROWS_AS(closed_metric(JetPoint::make(0.0, 0.5, 0.0, std::cbrt(2.0 * K), 0.0), kP), SingularMetricError);
}

TEST_CASE("closed_semispray") {
  CHECK(closed_semispray(JetPoint::make(1e-3, 2.0, 0.0, 3.0, 0.5), kP).G[1] == doctest::Approx(0.75));
  CHECK(closed_semispray(JetPoint::make(1e-3, 2.0, 0.0, 3.0, 0.5), kP, SprayForm::polynomial).G[1] == doctest::Approx(0.75));
  MonolayerModel m(kP);
  for (const auto& q : oracle::monolayer_sample(20, 31)) {
    CHECK(oracle::rel_err(closed_semispray(q, kP).G[0], semispray_from_lagrangian(m, q).G[0]) < 1e-6);
  }
  auto q = kSample;
  q.y[1] = 0.0;
  CHECK(oracle::rel_err(closed_semispray(q, kP).G[0], semispray_from_lagrangian(m, q).G[0]) < 1e-6);
}

TEST_CASE("closed_nonlinear_connection") {
  CHECK(closed_nonlinear_connection(JetPoint::make(1e-3, 2.0, 0.0, 3.0, 0.2), kP).N[1][1] == doctest::Approx(1.5));
  CHECK(closed_nonlinear_connection(JetPoint::make(1e-3, 4.0, 0.0, -1.0, 2.0), kP).N[1][0] == doctest::Approx(0.5));
  MonolayerModel m(kP);
  for (const auto& q : oracle::monolayer_sample(30, 37)) {
    const auto N = closed_nonlinear_connection(q, kP).N;
    for (std::size_t j = 0; j < 2; ++j) {
      auto G = [&](const JetPoint& p) { return closed_semispray(p, kP, SprayForm::polynomial).G; };
      const Vec2 d = field_derivative(G, q, fibre_var(j), m.step_scales(q)[3 + j], 1e-2);
      for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(d[i] - N[i][j]) <= 1e-6 * std::max(1.0, std::abs(N[i][j])));
    }
    // exact closed form agrees with the generic chain rule
    const auto Ne = exact_nonlinear_connection(q, kP).N;
    const auto Ng = nonlinear_connection(m, q).N;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(Ne[i][j] - Ng[i][j]) <= 1e-5 * std::max(1.0, std::abs(Ng[i][j])));
  }
  SUBCASE("script U time derivative") {
    for (const auto& q : oracle::monolayer_sample(20, 41)) {
      const double h = 1e-4 * q.r() / 2000.0;
      const double fd = (script_U(q.t + h, q.r(), kP) - script_U(q.t - h, q.r(), kP)) / (2 * h);
      CHECK(std::abs(fd - script_U_t(q.t, q.r(), kP)) < 1e-6 * (std::abs(fd) + 2000.0 * std::abs(script_U(q.t, q.r(), kP)) / q.r()));
    }
  }
}

TEST_CASE("closed_cartan") {
  const auto c = closed_cartan(JetPoint::make(1e-3, 2.0, 0.0, 4.0, 2.0), kP);
  CHECK(c.L_spatial[1][0][1] == doctest::Approx(0.5));
  CHECK(c.L_spatial[1][1][0] == doctest::Approx(0.5));
  CHECK(c.L_spatial[1][1][1] == 0.0);
  CHECK(c.L_spatial[1][0][0] == doctest::Approx(0.375));
  CHECK(c.G_time[0][1] == 0.0);
  CHECK(c.G_time[1][0] == 0.0);
  CHECK(c.G_time[1][1] == 0.0);
  CHECK(c.G_time[0][0] != 0.0);

  MonolayerModel m(kP);
  for (const auto& q : oracle::monolayer_sample(30, 43)) {
    const auto g = cartan_connection(m, q);
    const auto e = closed_cartan(q, kP, ConnectionSource::exact);
    const auto pr = closed_cartan(q, kP, ConnectionSource::approximate);
    CHECK(oracle::rel_err(pr.C_vertical[0][0][0], g.C_vertical[0][0][0]) < 1e-6);
    CHECK(oracle::rel_err(pr.G_time[0][0], g.G_time[0][0]) < 1e-6);
    CHECK(oracle::rel_err(pr.L_spatial[0][1][1], g.L_spatial[0][1][1]) < 1e-6);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k)
          CHECK(std::abs(e.L_spatial[i][j][k] - g.L_spatial[i][j][k]) <= 1e-5 * std::max(1.0, std::abs(g.L_spatial[i][j][k])));
  }
}

TEST_CASE("closed_torsions") {
  const auto q = JetPoint::make(1e-3, 2.0, 0.0, 4.0, 2.0);
  const TorsionSet t = closed_torsions(q, kP);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(t.R[k][0][0] == 0.0);
    CHECK(t.R[k][1][1] == 0.0);
  }
  CHECK(t.P_mixed[1][0][0] == doctest::Approx(-0.375));
  CHECK(t.R[1][0][1] == doctest::Approx(closed_nonlinear_connection(q, kP).N[0][0] / 2.0));
  CHECK(t.P_vert == closed_cartan(q, kP).C_vertical);

  SUBCASE("torsions follow from the approximate connection") {
    MonolayerModel m(kP);
    for (const auto& p : oracle::monolayer_sample(20, 47)) {
      MatrixField N = [&](const JetPoint& x) { return closed_nonlinear_connection(x, kP).N; };
      const TorsionSet g = torsions_from(p, closed_cartan(p, kP), N, m.step_scales(p));
      const TorsionSet c = closed_torsions(p, kP);
      auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)}); };
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
          CHECK(close(g.H_tor[k][i], c.H_tor[k][i]));
          CHECK(close(g.T[k][i], c.T[k][i]));
          for (std::size_t j = 0; j < 2; ++j) {
            CHECK(close(g.R[k][i][j], c.R[k][i][j]));
            CHECK(close(g.P_mixed[k][i][j], c.P_mixed[k][i][j]));
          }
        }
    }
  }
}

TEST_CASE("closed_em_and_ym") {
  auto q = kSample;
  q.y[1] = 0.0;
  const auto z = closed_em_and_ym(q, kP);
  CHECK(z.ym_energy == 0.0);
  CHECK(z.zero_energy);
  CHECK(z.em.F[0][1] == 0.0);

  // ṙ on the bracket's zero set
  const double t = 2e-3, r = 0.4;
  const double rd = -std::cbrt(1.5 * kP.m * r * 4.0 * kP.p * kP.V_abs * std::pow(r, 4) * std::exp(2000.0 * t / r) / (kP.m * kP.m));
  for (double phidot : {0.1, 0.7, -3.0}) {
    const auto e = closed_em_and_ym(JetPoint::make(t, r, 0.0, rd, phidot), kP, 1e-9);
    CHECK(std::abs(ym_bracket(JetPoint::make(t, r, 0.0, rd, phidot), kP)) < 1e-12 * kP.m * r * 10);
    CHECK(e.zero_energy);
    CHECK(e.ym_energy < 1e-18);
  }

  SUBCASE("zero-energy predicate is |F12| < tol") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e-6, 1e-6);
    for (int i = 0; i < 200; ++i) {
      auto p = JetPoint::make(t, r, 0.0, rd * (1.0 + u(rng)), u(rng));
      const auto e = closed_em_and_ym(p, kP, 1e-9);
      CHECK(e.zero_energy == (std::abs(e.em.F[0][1]) < 1e-9));
      CHECK(e.ym_energy >= 0.0);
    }
  }

  SUBCASE("against the generic EM form") {
    MonolayerModel m(kP);
    for (const auto& p : oracle::monolayer_sample(30, 53)) {
      const EMForm g = em_form(m, p);
      CHECK(oracle::rel_err(exact_closed_em_form(p, kP).F[1][0], g.F[1][0]) < 1e-5);
      // the approximate form is the large-K expansion: relative gap ≈ (2/3)|mṙ³/2K|
      const double x = std::abs(expansion_ratio(p));
      CHECK(oracle::rel_err(closed_em_and_ym(p, kP).em.F[1][0], g.F[1][0]) <= x + 1e-7);
    }
  }
}

TEST_CASE("pressure_param") {
  CHECK(pressure_param({1, 1, 1, 1, std::numbers::pi}) == doctest::Approx(1.0));
  CHECK(pressure_param({1, 1, 1, 1, 1}) == doctest::Approx(std::numbers::pi * std::numbers::pi));
  CHECK(pressure_param({1.3, 2, 0.5, 2.4, 1.7}) == doctest::Approx(4.0 * pressure_param({1.3, 2, 0.5, 1.2, 1.7})));
  CHECK_THROWS_AS(pressure_param({1, 0, 1, 1, 1}), DomainError);
}

TEST_CASE("electrodynamics fixture") {
  auto zero = ElectrodynamicsFixtureParams::linear(1.0, 1.0, 1.0, 0.0, 0.0);
  ElectrodynamicsModel mz(zero);
  const EMForm f0 = em_form(mz, JetPoint::make(0.1, 0.5, 0.2, 1.0, -1.0));
  CHECK(std::abs(f0.F[0][1]) < 1e-10);

  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.2, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double m = pos(rng), c = pos(rng), e = u(rng), a = u(rng), b = u(rng);
    auto fp = ElectrodynamicsFixtureParams::linear(m, c, e, a, b);
    ElectrodynamicsModel model(fp);
    const auto p = JetPoint::make(pos(rng), pos(rng), u(rng), u(rng), u(rng));
    const EMForm g = em_form(model, p);
    const EMForm cf = electrodynamics_closed_em(fp, p.x);
    CHECK(std::abs(cf.F[0][1] + e / (2.0 * m) * (a - b)) < 1e-14);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t s = 0; s < 2; ++s) CHECK(std::abs(g.F[r][s] - cf.F[r][s]) < 1e-8);
  }
}
