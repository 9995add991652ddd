#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jetlag/jet_point.hpp"
#include "jetlag/monolayer.hpp"

namespace jetlag {

struct ValidationTolerances {
  double oracle = 1e-5;       // closed form against the generic pipeline, relative
  double approx = 1e-6;       // approximate N against ∂(polynomial G)/∂y
  double metricity = 1e-5;
  double maxwell = 1e-5;
  double antisymmetry = 1e-12;
  double inverse = 1e-10;
  double fixture = 1e-8;
  double identity = 1e-10;    // Hamiltonian split, time-reversal involution
  double resonance = 1e-6;
  double affine = 1e-8;
  double el_residual = 1e-5;
  double special = 1e-10;
};

struct ValidationConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 100;
  std::size_t fixture_samples = 20;
  MonolayerParams params;       // R0 defaults to 1 for the resonance checks when unset
  ValidationTolerances tol;
  bool dynamics = true;         // trajectory, resonance and deviation checks
  bool negative_control = false;  // perturb every closed form by 1e-3 before comparing
};

enum class Verdict { ok, flagged };
std::string to_string(Verdict v);

struct DiscrepancyRecord {
  std::string check;     // e.g. oracle_equivalence, metricity
  std::string quantity;  // e.g. g11, C[0][0][0]
  std::optional<JetPoint> point;
  double closed = 0.0;   // value under test (a residual for identity checks)
  double oracle = 0.0;   // reference value (0 for identity checks)
  double rel_err = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::ok;
  /// Set when a flagged record falls inside a documented allowance for an approximate form.
  std::string allowance;

  bool unexplained() const { return verdict == Verdict::flagged && allowance.empty(); }
};

struct CheckSummary {
  std::string check;
  std::size_t records = 0, flagged = 0, unexplained = 0;
  double max_rel_err = 0.0;
};

struct DiscrepancyReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  bool negative_control = false;
  std::vector<DiscrepancyRecord> records;

  /// Per check, in first-appearance order.
  std::vector<CheckSummary> summary() const;
  std::size_t flagged() const;
  std::size_t unexplained() const;
  bool passed() const { return unexplained() == 0; }
};

/// Runs every closed-form against oracle comparison and every identity check on a seeded sample.
DiscrepancyReport run_validation(const ValidationConfig& config);

}  // namespace jetlag
