#include "jetlag/numeric_partials.hpp"

#include <vector>

namespace jetlag {

namespace {

struct Tap {
  int offset;
  double weight;
};

// Second-order-accurate central stencils in units of h^order.
const std::vector<Tap>& stencil(int order) {
  static const std::vector<Tap> d1{{-1, -0.5}, {1, 0.5}};
  static const std::vector<Tap> d2{{-1, 1.0}, {0, -2.0}, {1, 1.0}};
  static const std::vector<Tap> d3{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
  switch (order) {
    case 1: return d1;
    case 2: return d2;
    default: return d3;
  }
}

struct Axis {
  Var var;
  int order;
  double h;
};

double product_stencil(const LagrangianModel& model, std::size_t term, const JetPoint& pt,
                       const std::vector<Axis>& axes, std::size_t depth, const JetPoint& probe,
                       double weight) {
  if (depth == axes.size()) {
    if (term > 0) return weight * model.term(term, probe);
    if (auto why = model.domain_violation(probe)) {
      throw StencilError(std::string(model.name()) + ": stencil probe " + probe.to_string() +
                         " left the domain (" + *why + ") while differentiating at " + pt.to_string());
    }
    return weight * model.term(term, probe);
  }
  const Axis& ax = axes[depth];
  double sum = 0.0;
  for (const Tap& tap : stencil(ax.order)) {
    sum += product_stencil(model, term, pt, axes, depth + 1, probe.shifted(ax.var, tap.offset * ax.h),
                           weight * tap.weight / std::pow(ax.h, ax.order));
  }
  return sum;
}

}  // namespace

double numeric_partial(const LagrangianModel& model, const JetPoint& pt, const MultiIndex& alpha,
                       const DiffOptions& opts) {
  model.require_valid(pt);
  const int n = alpha.total();
  if (n < 0 || n > 3) throw DomainError("numeric_partial: derivative order must be between 0 and 3");
  if (n == 0) return model.value(pt);

  const StepScales scales = model.step_scales(pt);
  const double rel = opts.step_factor[static_cast<std::size_t>(n)];
  const int levels = std::max(0, opts.richardson_levels);

  std::vector<double> table;
  table.reserve(static_cast<std::size_t>(levels) + 1);
  double shrink = 1.0;
  for (int l = 0; l <= levels; ++l, shrink *= 0.5) {
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < kNumVars; ++i) {
      if (alpha.order[i] > 0) axes.push_back({static_cast<Var>(i), alpha.order[i], scales[i] * rel * shrink});
    }
    // Each additive term is differenced on its own so that large terms cannot swallow small ones.
    double sum = 0.0;
    for (std::size_t k = 0; k < model.term_count(); ++k) sum += product_stencil(model, k, pt, axes, 0, pt, 1.0);
    table.push_back(sum);
  }
  double factor = 4.0;
  for (int level = 1; level <= levels; ++level, factor *= 4.0) {
    for (std::size_t i = table.size() - 1; i >= static_cast<std::size_t>(level); --i) {
      table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
    }
  }
  return table.back();
}

double partial(const LagrangianModel& model, const JetPoint& pt, const MultiIndex& alpha,
               const DiffOptions& opts) {
  if (opts.prefer_exact) {
    if (auto v = model.exact_partial(pt, alpha)) return *v;
  }
  return numeric_partial(model, pt, alpha, opts);
}

}  // namespace jetlag
