#include "jetlag/models.hpp"

#include <cmath>
#include <utility>

#include "jetlag/errors.hpp"

namespace jetlag {

namespace {

// k-th derivative of xⁿ for small n, k.
double dpow(double x, int n, int k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= n - i;
  return c * std::pow(x, n - k);
}

}  // namespace

FreePolarModel::FreePolarModel(double m) : m_(m) {
  if (!(m > 0.0)) throw DomainError("free polar model: mass must be positive");
}

double FreePolarModel::value(const JetPoint& pt) const {
  return 0.5 * m_ * (pt.rdot() * pt.rdot() + pt.r() * pt.r() * pt.phidot() * pt.phidot());
}

std::optional<double> FreePolarModel::exact_partial(const JetPoint& pt,
                                                    const MultiIndex& alpha) const {
  if (alpha[Var::t] > 0 || alpha[Var::phi] > 0) return 0.0;
  const int kr = alpha[Var::r], krd = alpha[Var::rdot], kpd = alpha[Var::phidot];
  double v = 0.0;
  if (kr == 0 && kpd == 0) v += 0.5 * m_ * dpow(pt.rdot(), 2, krd);
  if (krd == 0) v += 0.5 * m_ * dpow(pt.r(), 2, kr) * dpow(pt.phidot(), 2, kpd);
  return v;
}

std::optional<Vec2> FreePolarModel::exact_spray(const JetPoint& pt) const {
  return Vec2{-0.5 * pt.r() * pt.phidot() * pt.phidot(), pt.rdot() * pt.phidot() / pt.r()};
}

ElectrodynamicsFixtureParams ElectrodynamicsFixtureParams::linear(double m, double c, double e,
                                                                  double a, double b) {
  ElectrodynamicsFixtureParams p;
  p.m = m;
  p.c = c;
  p.e = e;
  p.phi = [](const Vec2&) { return Mat2{Vec2{1.0, 0.0}, Vec2{0.0, 1.0}}; };
  p.A = [a, b](const Vec2& x) { return Vec2{a * x[1], b * x[0]}; };
  p.A_jacobian = [a, b](const Vec2&) { return Mat2{Vec2{0.0, a}, Vec2{b, 0.0}}; };
  p.F_pot = [](double, const Vec2&) { return 0.0; };
  p.phi_constant = true;
  return p;
}

ElectrodynamicsModel::ElectrodynamicsModel(ElectrodynamicsFixtureParams params)
    : params_(std::move(params)) {
  if (!(params_.m != 0.0)) throw DomainError("electrodynamics fixture: mass must be nonzero");
  if (!params_.phi || !params_.A || !params_.A_jacobian || !params_.F_pot)
    throw DomainError("electrodynamics fixture: phi, A, A_jacobian and F_pot must all be set");
}

double ElectrodynamicsModel::value(const JetPoint& pt) const {
  const Mat2 phi = params_.phi(pt.x);
  const Vec2 A = params_.A(pt.x);
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    lin += A[i] * pt.y[i];
    for (std::size_t j = 0; j < 2; ++j) quad += phi[i][j] * pt.y[i] * pt.y[j];
  }
  return params_.m * params_.c * TimeMetric::h11 * quad + 2.0 * params_.e / params_.m * lin +
         params_.F_pot(pt.t, pt.x);
}

std::optional<double> ElectrodynamicsModel::exact_partial(const JetPoint& pt,
                                                          const MultiIndex& alpha) const {
  const int nx = alpha[Var::r] + alpha[Var::phi];
  const int ky0 = alpha[Var::rdot], ky1 = alpha[Var::phidot];
  const int ny = ky0 + ky1;
  if (ny == 0) return std::nullopt;
  if (ny >= 3 || alpha[Var::t] > 0) return 0.0;
  if (nx > 0) {
    if (!params_.phi_constant) return std::nullopt;
    if (ny == 2) return 0.0;
    if (nx > 1) return std::nullopt;
  }
  const double q = 2.0 * params_.m * params_.c * TimeMetric::h11, l = 2.0 * params_.e / params_.m;
  const std::size_t i = ky0 > 0 ? 0 : 1;
  if (nx == 1) return l * params_.A_jacobian(pt.x)[i][alpha[Var::r] > 0 ? 0 : 1];
  const Mat2 phi = params_.phi(pt.x);
  if (ny == 2) return q * phi[ky0 == 2 ? 0 : 1][ky1 == 2 ? 1 : 0];
  return q * (phi[i][0] * pt.y[0] + phi[i][1] * pt.y[1]) + l * params_.A(pt.x)[i];
}

std::optional<std::string> ElectrodynamicsModel::domain_violation(const JetPoint& pt) const {
  if (!pt.finite()) return std::string("non-finite coordinate");
  const Mat2 phi = params_.phi(pt.x);
  if (std::abs(phi[0][1] - phi[1][0]) > 1e-12 * (std::abs(phi[0][1]) + 1.0))
    return std::string("phi_ij is not symmetric");
  const double det = phi[0][0] * phi[1][1] - phi[0][1] * phi[1][0];
  if (std::abs(det) <= 1e-12 * (std::abs(phi[0][0] * phi[1][1]) + phi[0][1] * phi[0][1]))
    return std::string("phi_ij is singular");
  return std::nullopt;
}

EMForm electrodynamics_closed_em(const ElectrodynamicsFixtureParams& params, const Vec2& x) {
  const Mat2 J = params.A_jacobian(x);
  EMForm f;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) f.F[i][j] = -params.e / (2.0 * params.m) * (J[i][j] - J[j][i]);
  return f;
}

}  // namespace jetlag
