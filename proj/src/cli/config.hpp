#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "jetlag/dynamics.hpp"
#include "jetlag/resonance.hpp"
#include "jetlag/validation.hpp"

namespace jetlag::cli {

/// Malformed or unknown configuration; exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixtureConfig {
  double m = 1.0, c = 1.0, e = 1.0, a = 0.5, b = -0.5;
};

struct Grid {
  double lo = 0.0, hi = 0.0;
  std::size_t n = 1;
  double at(std::size_t k) const { return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1); }
};

struct SweepConfig {
  Grid r0{0.2, 1.0, 5};
  Grid rdot0{-5.0, -0.5, 5};
  double t_start = 1e-3;
  double t_end = 2e-2;
  unsigned threads = 4;
};

struct RunConfig {
  std::string model = "monolayer";  // monolayer | free_polar | electrodynamics_fixture
  FixtureConfig fixture;
  SimConfig sim;                    // params, initial, t_end, integrator, epsilon, events
  std::optional<JetPoint> point;
  ResonanceConfig resonance;
  double plateau_threshold = 0.05;
  DeviationConfig deviation;
  ResonanceForm deviation_reference = ResonanceForm::exact;  // on-resonance curve by default
  ValidationConfig validate;        // samples, fixture_samples, dynamics, tolerances
  SweepConfig sweep;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  RunConfig();
};

/// Defaults when path is empty. Unknown keys and wrong types raise ConfigError.
RunConfig load_config(const std::string& path);

}  // namespace jetlag::cli
