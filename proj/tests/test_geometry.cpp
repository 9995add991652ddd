#include <cmath>
#include <random>

#include "doctest.h"
#include "jetlag/errors.hpp"
#include "jetlag/geometry.hpp"
#include "jetlag/models.hpp"
#include "jetlag/monolayer.hpp"
#include "jetlag/torsion.hpp"
#include "oracles.hpp"

using namespace jetlag;

namespace {

struct Quadratic final : LagrangianModel {
  std::string_view name() const override { return "rdot^2"; }
  double value(const JetPoint& p) const override { return p.rdot() * p.rdot(); }
  double mass() const override { return 1.0; }
};

struct Bilinear final : LagrangianModel {
  std::string_view name() const override { return "r*phidot"; }
  double value(const JetPoint& p) const override { return p.r() * p.phidot(); }
  double mass() const override { return 1.0; }
};

struct Cubic final : LagrangianModel {
  std::string_view name() const override { return "cubic"; }
  double value(const JetPoint& p) const override {
    return 2.0 * p.r() * p.r() * p.rdot() + p.phidot() * p.phidot() * p.phidot() - 3.0 * p.t * p.phi() * p.rdot() +
           p.rdot() * p.rdot() * p.phidot();
  }
  double mass() const override { return 1.0; }
};

// Models with a hole in the domain, for the stencil error path.
struct Fenced final : LagrangianModel {
  std::string_view name() const override { return "fenced"; }
  double value(const JetPoint& p) const override { return p.rdot() * p.rdot(); }
  std::optional<std::string> domain_violation(const JetPoint& p) const override {
    if (p.rdot() > 1.0) return std::string("rdot above fence");
    return std::nullopt;
  }
  double mass() const override { return 1.0; }
};

const JetPoint kSample = JetPoint::make(1e-3, 0.5, 0.0, -1.0, 0.2);
const MonolayerParams kParams{};

}  // namespace

TEST_CASE("numeric_partials") {
  Quadratic q;
  Bilinear b;
  CHECK(std::abs(numeric_partial(q, JetPoint::make(0.3, 1.2, 0.4, 2.5, -0.7), {Var::rdot, Var::rdot}) - 2.0) < 1e-8);
  CHECK(std::abs(numeric_partial(b, JetPoint::make(0.3, 1.2, 0.4, 2.5, -0.7), {Var::r, Var::phidot}) - 1.0) < 1e-8);

  SUBCASE("degree three polynomials are exact") {
    Cubic c;
    const auto p = JetPoint::make(0.4, 1.3, 0.7, -0.8, 0.6);
    CHECK(std::abs(numeric_partial(c, p, {Var::r, Var::r, Var::rdot}) - 4.0) < 1e-8);
    CHECK(std::abs(numeric_partial(c, p, {Var::phidot, Var::phidot, Var::phidot}) - 6.0) < 1e-8);
    CHECK(std::abs(numeric_partial(c, p, {Var::t, Var::phi, Var::rdot}) + 3.0) < 1e-8);
    CHECK(std::abs(numeric_partial(c, p, {Var::rdot, Var::rdot, Var::phidot}) - 2.0) < 1e-8);
    CHECK(std::abs(numeric_partial(c, p, {Var::r, Var::rdot}) - 4.0 * p.r()) < 1e-8);
  }

  SUBCASE("monolayer dL/drdot against hand differentiation") {
    MonolayerModel m(kParams);
    const double K = velocity_coefficient_K(kSample.t, kSample.r(), kParams);
    const double exact = kParams.m * kSample.rdot() + K / (kSample.rdot() * kSample.rdot());
    CHECK(oracle::rel_err(numeric_partial(m, kSample, {Var::rdot}), exact) < 1e-6);
  }

  SUBCASE("errors") {
    Fenced f;
    CHECK_THROWS_AS(numeric_partial(f, JetPoint::make(0, 1, 0, 0.999999, 0), {Var::rdot, Var::rdot}), StencilError);
    try {
      numeric_partial(f, JetPoint::make(0, 1, 0, 0.999999, 0), {Var::rdot});
      FAIL("expected a stencil error");
    } catch (const StencilError& e) {
      CHECK(std::string(e.what()).find("probe") != std::string::npos);
    }
    CHECK_THROWS_AS(numeric_partial(f, JetPoint::make(0, 1, 0, 2.0, 0), {Var::rdot}), DomainError);
    CHECK_THROWS_AS(numeric_partial(q, JetPoint::make(0, -1, 0, 1, 0), {Var::rdot}), DomainError);
    MultiIndex four{Var::r, Var::r, Var::r, Var::r};
    CHECK_THROWS_AS(numeric_partial(q, kSample, four), DomainError);
  }
}

TEST_CASE("metric_from_lagrangian") {
  FreePolarModel fp(1.0);
  const Metric g = metric_from_lagrangian(fp, JetPoint::make(0, 2, 0, 3, 0.5));
  CHECK(std::abs(g.g[0][0] - 0.5) < 1e-9);
  CHECK(std::abs(g.g[1][1] - 2.0) < 1e-9);
  CHECK(std::abs(g.g[0][1]) < 1e-9);

  MonolayerModel m(kParams);
  const Metric gm = metric_from_lagrangian(m, kSample);
  CHECK(gm.g[0][1] == 0.0);
  CHECK(gm.g[1][0] == 0.0);
  CHECK(oracle::rel_err(gm.g[0][0], closed_metric(kSample, kParams).g[0][0]) < 1e-6);

  SUBCASE("inverse and symmetry over random points") {
    for (const auto& p : oracle::monolayer_sample(100, 11)) {
      const Metric x = metric_from_lagrangian(m, p);
      CHECK(std::abs(x.g[0][1] - x.g[1][0]) < 1e-12);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < 2; ++k) s += x.g[i][k] * x.g_inv[k][j];
          CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
    }
  }
  CHECK_THROWS_AS(invert_metric(Mat2{Vec2{1.0, 2.0}, Vec2{2.0, 4.0}}), SingularMetricError);
}

TEST_CASE("semispray_from_lagrangian") {
  FreePolarModel fp(1.0);
  const Semispray s = semispray_from_lagrangian(fp, JetPoint::make(0, 2, 0, 3, 0.5));
  CHECK(std::abs(s.G[0] + 0.25) < 1e-8);
  CHECK(std::abs(s.G[1] - 0.75) < 1e-8);
  CHECK(s.H[0] == 0.0);
  CHECK(s.H[1] == 0.0);

  MonolayerModel m(kParams);
  for (const auto& p : oracle::monolayer_sample(20, 3)) {
    const Semispray g = semispray_from_lagrangian(m, p);
    CHECK(oracle::rel_err(g.G[1], p.rdot() * p.phidot() / p.r()) < 1e-6);
    CHECK(oracle::rel_err(g.G[0], closed_semispray(p, kParams).G[0]) < 1e-6);
  }
}

TEST_CASE("nonlinear_connection") {
  FreePolarModel fp(1.0);
  const auto n = nonlinear_connection(fp, JetPoint::make(0, 2, 0, 3, 0.5));
  CHECK(std::abs(n.N[0][1] + 1.0) < 1e-8);
  CHECK(n.M[0] == 0.0);

  MonolayerModel m(kParams);
  for (const auto& p : oracle::monolayer_sample(20, 5)) {
    const auto nc = nonlinear_connection(m, p);
    CHECK(oracle::rel_err(nc.N[1][0], p.phidot() / p.r()) < 1e-6);
    CHECK(oracle::rel_err(nc.N[1][1], p.rdot() / p.r()) < 1e-6);
    // Chain-rule N against direct differences of the generic spray.
    for (std::size_t j = 0; j < 2; ++j) {
      auto G = [&](const JetPoint& q) { return semispray_from_lagrangian(m, q).G; };
      const Vec2 d = field_derivative(G, p, fibre_var(j), m.step_scales(p)[3 + j], 1e-2);
      for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(d[i] - nc.N[i][j]) <= 1e-6 * std::max(1.0, std::abs(nc.N[i][j])));
    }
  }
}

TEST_CASE("adapted_derivative") {
  const auto p = JetPoint::make(0.1, 1.5, 0.3, 0.8, -0.4);
  const StepScales sc{1, 1, 1, 1, 1};
  auto f = [](const JetPoint& q) { return q.r() * q.r() * std::sin(q.phi()); };
  AdaptedFrame frame{Mat2{Vec2{0.7, -1.2}, Vec2{2.0, 0.3}}};
  CHECK(std::abs(adapted_derivative(frame, f, p, 0, sc) - 2 * 1.5 * std::sin(0.3)) < 1e-8);
  CHECK(std::abs(adapted_derivative(frame, f, p, 1, sc) - 2.25 * std::cos(0.3)) < 1e-8);

  auto h = [](const JetPoint& q) { return q.r() * q.rdot() * q.rdot() + q.phidot(); };
  AdaptedFrame zero{};
  CHECK(std::abs(adapted_derivative(zero, h, p, 0, sc) - 0.64) < 1e-8);

  MonolayerModel m(kParams);
  const auto nc = closed_nonlinear_connection(kSample, kParams);
  auto g22 = [&](const JetPoint& q) { return closed_metric(q, kParams).g[1][1]; };
  CHECK(std::abs(adapted_derivative(AdaptedFrame{nc.N}, g22, kSample, 0, m.step_scales(kSample)) -
                 kParams.m * kSample.r()) < 1e-8);
}

TEST_CASE("cartan_connection") {
  FreePolarModel fp(1.0);
  const auto p = JetPoint::make(0.2, 2.0, 0.1, 3.0, 0.5);
  const auto c = cartan_connection(fp, p);
  CHECK(std::abs(c.L_spatial[0][1][1] + 2.0) < 1e-8);
  CHECK(std::abs(c.L_spatial[1][0][1] - 0.5) < 1e-8);
  CHECK(std::abs(c.L_spatial[1][1][0] - 0.5) < 1e-8);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(c.G_time[i][j]) < 1e-10);
      for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(c.C_vertical[i][j][k]) < 1e-8);
    }

  MonolayerModel m(kParams);
  for (const auto& q : oracle::monolayer_sample(20, 9)) {
    const auto cm = cartan_connection(m, q);
    CHECK(oracle::rel_err(cm.L_spatial[1][0][1], 1.0 / q.r()) < 1e-6);
    CHECK(oracle::rel_err(cm.L_spatial[1][1][0], 1.0 / q.r()) < 1e-6);
    CHECK(std::abs(cm.L_spatial[1][1][1]) < 1e-6 / q.r());
    CHECK(oracle::rel_err(cm.C_vertical[0][0][0], closed_cartan(q, kParams).C_vertical[0][0][0]) < 1e-6);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) {
          CHECK(cm.L_spatial[i][j][k] == cm.L_spatial[i][k][j]);
          CHECK(cm.C_vertical[i][j][k] == cm.C_vertical[i][k][j]);
        }
  }
}

TEST_CASE("torsions") {
  MonolayerModel m(kParams);
  FreePolarModel fp(1.0);
  for (const auto& q : oracle::monolayer_sample(10, 13)) {
    for (const LagrangianModel* model : {static_cast<const LagrangianModel*>(&m), static_cast<const LagrangianModel*>(&fp)}) {
      const TorsionSet t = torsions(*model, q);
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(t.R[k][0][1] + t.R[k][1][0] == 0.0);
        CHECK(t.R[k][0][0] == 0.0);
        CHECK(t.R[k][1][1] == 0.0);
      }
    }
    const TorsionSet t = torsions(m, q);
    const auto N = nonlinear_connection(m, q).N;
    CHECK(std::abs(t.R[1][0][1] - N[0][0] / q.r()) <= 1e-6 * std::max(1.0, std::abs(N[0][0] / q.r())));
    const auto c = cartan_connection(m, q);
    CHECK(t.P_vert == c.C_vertical);
  }
}

TEST_CASE("em_form and ym_energy") {
  MonolayerModel m(kParams);
  for (const auto& q : oracle::monolayer_sample(20, 17)) {
    const EMForm f = em_form(m, q);
    CHECK(std::abs(f.F[0][0]) < 1e-10);
    CHECK(std::abs(f.F[1][1]) < 1e-10);
    CHECK(std::abs(f.F[0][1] + f.F[1][0]) < 1e-12);
  }
  auto q = kSample;
  q.y[1] = 0.0;
  const EMForm f0 = em_form(m, q);
  CHECK(std::abs(f0.F[0][1]) < 1e-10);

  auto fix = ElectrodynamicsFixtureParams::linear(1.5, 2.0, 0.7, 0.3, -1.1);
  ElectrodynamicsModel ed(fix);
  const EMForm fe = em_form(ed, JetPoint::make(0.1, 0.8, 1.4, 0.3, -0.4));
  CHECK(std::abs(fe.F[0][1] + 0.7 / 3.0 * (0.3 + 1.1)) < 1e-8);

  EMForm z{};
  CHECK(ym_energy(z, 1.0) == 0.0);
  EMForm three{Mat2{Vec2{0.0, 3.0}, Vec2{-3.0, 0.0}}};
  CHECK(ym_energy(three, 1.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK_THROWS_AS(ym_energy(three, 0.0), DomainError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng), mm = 0.5 + std::abs(u(rng));
    EMForm r{Mat2{Vec2{0.0, a}, Vec2{-a, 0.0}}};
    CHECK(std::abs(ym_energy(r, mm) - a * a / mm) < 1e-12 * std::max(1.0, a * a / mm));
  }
}

TEST_CASE("metricity and vertical Maxwell residuals") {
  FreePolarModel fp(1.0);
  MonolayerModel m(kParams);
  for (const auto& q : oracle::monolayer_sample(10, 19)) {
    CHECK(metricity_residuals(fp, q).max() < 1e-8);
    CHECK(maxwell_vertical_residual(fp, q) < 1e-8);
    CHECK(metricity_residuals(m, q).max() < 1e-5);
    const double mx = maxwell_vertical_residual(m, q);
    CHECK(std::isfinite(mx));
    CHECK(mx < 1e-5);
  }

  SUBCASE("negative control") {
    const GeometryBundle b = geometry_bundle(m, kSample);
    CartanConnection bad = b.cartan;
    bad.L_spatial[1][0][1] += 0.1;
    bad.L_spatial[1][1][0] += 0.1;
    MatrixField g = [&](const JetPoint& p) { return metric_from_lagrangian(m, p).g; };
    CHECK(metricity_residuals_for(kSample, g, b.nonlinear.N, bad, m.step_scales(kSample)).max() > 1e-3);
  }
}
