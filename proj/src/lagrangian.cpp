#include "jetlag/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jetlag/errors.hpp"

namespace jetlag {

std::string JetPoint::to_string() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "(t=%.17g, r=%.17g, phi=%.17g, rdot=%.17g, phidot=%.17g)", t, x[0],
                x[1], y[0], y[1]);
  return buf;
}

std::optional<std::string> LagrangianModel::domain_violation(const JetPoint& pt) const {
  if (!pt.finite()) return "non-finite coordinate";
  if (!(pt.r() > 0.0)) return "r must be positive";
  return std::nullopt;
}

StepScales LagrangianModel::step_scales(const JetPoint& pt) const {
  StepScales s{};
  for (std::size_t i = 0; i < kNumVars; ++i) s[i] = std::max(std::abs(pt.get(static_cast<Var>(i))), 1.0);
  return s;
}

void LagrangianModel::require_valid(const JetPoint& pt) const {
  if (auto why = domain_violation(pt)) {
    throw DomainError(std::string(name()) + ": invalid point " + pt.to_string() + ": " + *why);
  }
}

}  // namespace jetlag
