#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "commands.hpp"
#include "jetlag/errors.hpp"
#include "jetlag/logging.hpp"

using namespace jetlag::cli;

int main(int argc, char** argv) {
  jetlag::init_logging();
  CLI::App app{"Jet-space geometry and dynamics of a compressed 2D monolayer"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  Flags flags;
  std::string point;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "seed for sampled points");
  app.add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "geometry at one point, closed form and oracle");
  eval->add_flag("--oracle-only", flags.oracle_only, "leave the closed-form columns empty");
  eval->add_option("--point", point, "t,r,phi,rdot,phidot");
  auto* simulate = app.add_subcommand("simulate", "integrate a geodesic");
  auto* resonant = app.add_subcommand("resonant", "resonant zero Yang-Mills reference curve");
  resonant->add_flag("--closed-form", flags.closed_form, "fill the closed-form columns");
  auto* deviation = app.add_subcommand("deviation", "deviation equations along the resonant curve");
  deviation->add_flag("--compose", flags.compose, "add the composed r = r0 + delta_r column");
  auto* validate = app.add_subcommand("validate", "closed forms against oracles, identity checks");
  validate->add_flag("--negative-control", flags.negative_control, "perturb the closed forms by 1e-3");
  auto* sweep = app.add_subcommand("sweep", "grid of trajectories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!point.empty()) flags.point = point;

    if (eval->parsed()) return cmd_eval(cfg, flags);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (resonant->parsed()) return cmd_resonant(cfg, flags);
    if (deviation->parsed()) return cmd_deviation(cfg, flags);
    if (validate->parsed()) return cmd_validate(cfg, flags);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const jetlag::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  }
  return kConfigError;
}
