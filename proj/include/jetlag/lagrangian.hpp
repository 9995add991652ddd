#pragma once

#include <array>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "jetlag/jet_point.hpp"

namespace jetlag {

/// Orders of differentiation per jet coordinate, indexed by Var.
struct MultiIndex {
  std::array<int, kNumVars> order{};

  MultiIndex() = default;
  MultiIndex(std::initializer_list<Var> vars) {
    for (Var v : vars) ++order[static_cast<std::size_t>(v)];
  }

  int total() const {
    int s = 0;
    for (int o : order) s += o;
    return s;
  }
  int operator[](Var v) const { return order[static_cast<std::size_t>(v)]; }
  bool operator==(const MultiIndex&) const = default;
};

/// Characteristic length per coordinate; finite-difference steps are fractions of it.
using StepScales = std::array<double, kNumVars>;

/// A jet Lagrangian L : J¹(T, ℝ²) → ℝ.
class LagrangianModel {
 public:
  virtual ~LagrangianModel() = default;

  virtual std::string_view name() const = 0;
  virtual double value(const JetPoint& pt) const = 0;

  /// Optional split L = Σ term(k). Finite differences are taken term by term, which keeps small
  /// terms visible when another term is many orders of magnitude larger.
  virtual std::size_t term_count() const { return 1; }
  virtual double term(std::size_t, const JetPoint& pt) const { return value(pt); }

  /// Empty when the point is admissible, otherwise a description of the violated condition.
  virtual std::optional<std::string> domain_violation(const JetPoint& pt) const;

  /// Default: max(|v|, 1) for every coordinate.
  virtual StepScales step_scales(const JetPoint& pt) const;

  /// Model-supplied exact partial derivative, when the model knows it.
  virtual std::optional<double> exact_partial(const JetPoint&, const MultiIndex&) const {
    return std::nullopt;
  }

  /// Closed-form spatial semispray G (used by integrators in place of the generic construction).
  virtual std::optional<Vec2> exact_spray(const JetPoint&) const { return std::nullopt; }

  /// Whether ṙ = 0 is a singular locus of the model (ṙ⁻¹ terms).
  virtual bool singular_at_zero_rdot() const { return false; }

  /// Mass entering the Yang-Mills normalisation (1/2m)·Tr(F·ᵀF).
  virtual double mass() const = 0;

  void require_valid(const JetPoint& pt) const;
};

}  // namespace jetlag
