#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <type_traits>
#include <vector>

#include "jetlag/errors.hpp"
#include "jetlag/lagrangian.hpp"

namespace jetlag {

/// Controls the central-difference stencils. The relative step for a derivative of total
/// order n is `step_factor[n]`, multiplied by the per-coordinate scale from the model.
struct DiffOptions {
  /// Richardson levels beyond the base step (each halves h and removes the next even power).
  int richardson_levels = 2;
  /// Indexed by derivative order 1..3; tuned to machine precision and the levels above.
  std::array<double, 4> step_factor{0.0, 2.0e-3, 6.0e-3, 1.5e-2};
  /// Prefer model-supplied partials when available.
  bool prefer_exact = true;
};

/// Central finite-difference estimate of ∂^α L at pt (|α| ≤ 3), Richardson-extrapolated.
/// Throws DomainError for an invalid point and StencilError when a probe leaves the domain.
double numeric_partial(const LagrangianModel& model, const JetPoint& pt, const MultiIndex& alpha,
                       const DiffOptions& opts = {});

/// `numeric_partial`, or the model's exact partial when `opts.prefer_exact` is set and available.
double partial(const LagrangianModel& model, const JetPoint& pt, const MultiIndex& alpha,
               const DiffOptions& opts = {});

/// First derivative of an arbitrary field along coordinate v by Richardson-extrapolated central
/// differences. `rel_step` multiplies `scale`. Works for any value type closed under
/// `+`, `-` and scalar `*` (double, Vec2, Mat2, ...).
template <typename Field>
auto field_derivative(const Field& f, const JetPoint& pt, Var v, double scale, double rel_step,
                      int levels = 2) -> decltype(f(pt));

namespace detail {

template <typename T>
struct Lin;

template <>
struct Lin<double> {
  static double axpy(double a, double x, double y) { return a * x + y; }
  static double zero() { return 0.0; }
};

template <std::size_t N, typename E>
struct Lin<std::array<E, N>> {
  using A = std::array<E, N>;
  static A axpy(double a, const A& x, const A& y) {
    A out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = Lin<E>::axpy(a, x[i], y[i]);
    return out;
  }
  static A zero() {
    A out{};
    for (auto& e : out) e = Lin<E>::zero();
    return out;
  }
};

}  // namespace detail

template <typename Field>
auto field_derivative(const Field& f, const JetPoint& pt, Var v, double scale, double rel_step,
                      int levels) -> decltype(f(pt)) {
  using T = std::decay_t<decltype(f(pt))>;
  using L = detail::Lin<T>;
  const double h0 = scale * rel_step;
  std::vector<T> table;
  table.reserve(static_cast<std::size_t>(levels) + 1);
  double h = h0;
  for (int l = 0; l <= levels; ++l, h *= 0.5) {
    T plus = f(pt.shifted(v, h));
    T minus = f(pt.shifted(v, -h));
    table.push_back(L::axpy(-1.0 / (2.0 * h), minus, L::axpy(1.0 / (2.0 * h), plus, L::zero())));
  }
  double factor = 4.0;
  for (int level = 1; level <= levels; ++level, factor *= 4.0) {
    for (std::size_t i = table.size() - 1; i >= static_cast<std::size_t>(level); --i) {
      // (factor·fine − coarse) / (factor − 1)
      table[i] = L::axpy(-1.0 / (factor - 1.0), table[i - 1],
                         L::axpy(factor / (factor - 1.0), table[i], L::zero()));
    }
  }
  return table.back();
}

}  // namespace jetlag
