#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "jetlag/errors.hpp"
#include "jetlag/models.hpp"

namespace jetlag::cli {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    path_ = (std::filesystem::path(dir) / name).string();
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("cannot write '" + path_ + "'");
  }

  CsvWriter& header(const std::vector<std::string>& cols) {
    row_ = cols;
    return end();
  }
  CsvWriter& operator<<(double v) {
    row_.push_back(num(v));
    return *this;
  }
  CsvWriter& operator<<(const std::string& s) {
    row_.push_back(s);
    return *this;
  }
  CsvWriter& end() {
    for (std::size_t k = 0; k < row_.size(); ++k) out_ << (k ? "," : "") << row_[k];
    out_ << '\n';
    row_.clear();
    return *this;
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::vector<std::string> row_;
};

std::unique_ptr<LagrangianModel> make_model(const RunConfig& cfg) {
  if (cfg.model == "free_polar") return std::make_unique<FreePolarModel>(cfg.sim.params.m);
  if (cfg.model == "electrodynamics_fixture") {
    const auto& f = cfg.fixture;
    return std::make_unique<ElectrodynamicsModel>(ElectrodynamicsFixtureParams::linear(f.m, f.c, f.e, f.a, f.b));
  }
  return std::make_unique<MonolayerModel>(cfg.sim.params);
}

JetPoint parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--point: '" + item + "' is not a number");
    }
  }
  if (v.size() != 5) throw ConfigError("--point expects t,r,phi,rdot,phidot");
  return JetPoint::make(v[0], v[1], v[2], v[3], v[4]);
}

double require_R0(const RunConfig& cfg, const std::string& what) {
  if (!cfg.sim.params.R0) throw ConfigError(what + ": params.R0 is required");
  return *cfg.sim.params.R0;
}

void validate_resonance(const ResonanceConfig& rc) {
  try {
    rc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

int cmd_eval(const RunConfig& cfg, const Flags& flags) {
  const JetPoint pt = flags.point ? parse_point(*flags.point) : cfg.point.value_or(cfg.sim.initial.jet());
  const auto model = make_model(cfg);
  model->require_valid(pt);
  const auto* mono = dynamic_cast<const MonolayerModel*>(model.get());

  const std::vector<std::string> qty{"g11", "g22", "G1", "G2", "N11", "N12", "N21", "N22", "EYM"};
  std::vector<double> oracle(qty.size()), closed(qty.size(), NAN), approx(qty.size(), NAN);
  const GeometryBundle b = geometry_bundle(*model, pt);
  oracle = {b.metric.g[0][0], b.metric.g[1][1], b.semispray.G[0], b.semispray.G[1],  b.nonlinear.N[0][0],
            b.nonlinear.N[0][1], b.nonlinear.N[1][0], b.nonlinear.N[1][1], b.ym_energy};
  const bool have_closed = mono && !flags.oracle_only;
  if (have_closed) {
    const auto& P = mono->params();
    const Metric g = closed_metric(pt, P);
    const Semispray G = closed_semispray(pt, P);
    const Mat2 N = exact_nonlinear_connection(pt, P).N;
    closed = {g.g[0][0], g.g[1][1], G.G[0], G.G[1], N[0][0], N[0][1], N[1][0], N[1][1],
              ym_energy(exact_closed_em_form(pt, P), P.m)};
    const Mat2 Np = closed_nonlinear_connection(pt, P).N;
    approx[4] = Np[0][0];
    approx[5] = Np[0][1];
    approx[6] = Np[1][0];
    approx[7] = Np[1][1];
    approx[8] = closed_em_and_ym(pt, P).ym_energy;
  }

  std::vector<std::string> cols{"t", "r", "phi", "rdot", "phidot"};
  for (const auto& q : qty) cols.push_back("closed_" + q);
  for (const auto& q : qty) cols.push_back("oracle_" + q);
  cols.insert(cols.end(), {"approx_N11", "approx_N12", "approx_N21", "approx_N22", "approx_EYM"});
  CsvWriter csv(cfg.out_dir, "eval.csv");
  csv.header(cols);
  csv << pt.t << pt.r() << pt.phi() << pt.rdot() << pt.phidot();
  auto cell = [&](double v, bool show) { csv << (show ? num(v) : std::string()); };
  for (double v : closed) cell(v, have_closed);
  for (double v : oracle) cell(v, true);
  for (std::size_t k = 4; k < qty.size(); ++k) cell(approx[k], have_closed);
  csv.end();

  std::printf("%-6s %-24s %-24s\n", "qty", "closed", "oracle");
  for (std::size_t k = 0; k < qty.size(); ++k)
    std::printf("%-6s %-24s %-24s\n", qty[k].c_str(), have_closed ? num(closed[k]).c_str() : "",
                num(oracle[k]).c_str());
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto model = make_model(cfg);
  const TrajectorySeries s = integrate_geodesic(cfg.sim, *model);
  const auto* mono = dynamic_cast<const MonolayerModel*>(model.get());

  CsvWriter csv(cfg.out_dir, "simulate.csv");
  csv.header({"t", "r", "phi", "rdot", "phidot", "E_inst", "H", "H_YM", "EYM", "g11", "event"});
  auto row = [&](const TrajectoryState& st, const SampleDiagnostics& d, const std::string& ev) {
    csv << st.t << st.r << st.phi << st.rdot << st.phidot << d.E_inst << d.H << d.H_YM << d.EYM << d.g11 << ev;
    csv.end();
  };
  for (std::size_t k = 0; k < s.states.size(); ++k) row(s.states[k], s.diagnostics[k], "");
  for (const Event& e : s.events) {
    SampleDiagnostics d;
    d.E_inst = d.H = d.H_YM = d.EYM = d.g11 = NAN;
    if (mono) {
      try {
        d = monolayer_diagnostics(e.state, mono->params());
      } catch (const DomainError&) {
      }
    }
    row(e.state, d, to_string(e.type));
  }

  const TrajectoryState& last = s.states.back();
  std::printf("simulate: %zu samples, stop=%s, max EL residual %s\n", s.states.size(), to_string(s.stop).c_str(),
              num(s.max_el_residual()).c_str());
  for (const Event& e : s.events) std::printf("  event %s at t=%s\n", to_string(e.type).c_str(), num(e.t).c_str());
  if (s.stop == StopReason::max_steps) {
    std::fprintf(stderr, "simulate: step budget exhausted; last good state t=%s r=%s phi=%s rdot=%s phidot=%s\n",
                 num(last.t).c_str(), num(last.r).c_str(), num(last.phi).c_str(), num(last.rdot).c_str(),
                 num(last.phidot).c_str());
    return kNumericalFailure;
  }
  return kOk;
}

int cmd_resonant(const RunConfig& cfg, const Flags& flags) {
  require_R0(cfg, "resonant");
  validate_resonance(cfg.resonance);
  const ResonantTrajectory ref = resonant_trajectory(cfg.resonance);
  const auto& P = cfg.resonance.params;

  CsvWriter csv(cfg.out_dir, "resonant.csv");
  csv.header({"t", "r0", "r0dot", "residual_eq21", "residual_eq22", "closed_form_r0", "closed_form_residual"});
  std::vector<double> ts, rd;
  for (const auto& s : ref.samples) {
    csv << s.t << s.r0 << s.r0dot << residual_exact_exponent(s, P) << residual_large_time(s, P);
    if (flags.closed_form) {
      double r = NAN, res = NAN;
      try {
        const ResonantSample c = closed_form_sample(s.t, P);
        r = c.r0;
        res = residual_large_time(c, P);
      } catch (const DomainError&) {
      }
      csv << r << res;
    } else {
      csv << std::string() << std::string();
    }
    csv.end();
    ts.push_back(s.t);
    rd.push_back(s.r0dot);
  }
  const Plateau pl = detect_plateau(ts, rd, cfg.plateau_threshold);
  std::printf("resonant: %zu samples, source=%s, form=%s, stop=%s\n", ref.samples.size(),
              to_string(ref.source).c_str(), to_string(ref.form).c_str(), to_string(ref.stop).c_str());
  if (pl.found)
    std::printf("plateau: t in [%s, %s], |dr0/dt| <= %s\n", num(pl.t_begin).c_str(), num(pl.t_end).c_str(),
                num(pl.threshold).c_str());
  else
    std::printf("plateau: none below %s\n", num(pl.threshold).c_str());
  return kOk;
}

int cmd_deviation(const RunConfig& cfg, const Flags& flags) {
  require_R0(cfg, "deviation: missing reference");
  ResonanceConfig rc = cfg.resonance;
  rc.source = ResonanceSource::ode;
  rc.form = cfg.deviation_reference;
  validate_resonance(rc);
  const ResonantTrajectory ref = resonant_trajectory(rc);
  const auto dev = deviation_integrate(ref, cfg.deviation);
  std::vector<double> ts, ph;
  for (const auto& d : dev) {
    ts.push_back(d.t);
    ph.push_back(d.dphi);
  }
  const AffineFit fit = affine_fit(ts, ph);
  TrajectorySeries composed;
  if (flags.compose) composed = compose_perturbed(ref, dev);

  CsvWriter csv(cfg.out_dir, "deviation.csv");
  std::vector<std::string> cols{"t", "delta_r", "delta_rdot", "delta_phi", "delta_phidot", "delta_phi_affine_residual"};
  if (flags.compose) cols.push_back("r");
  csv.header(cols);
  for (std::size_t k = 0; k < dev.size(); ++k) {
    const auto& d = dev[k];
    csv << d.t << d.dr << d.drdot << d.dphi << d.dphidot << d.dphi - (fit.intercept + fit.slope * d.t);
    if (flags.compose) csv << composed.states[k].r;
    csv.end();
  }
  std::printf("deviation: %zu samples, delta_phi = %s + %s t, max affine residual %s\n", dev.size(),
              num(fit.intercept).c_str(), num(fit.slope).c_str(), num(fit.max_residual).c_str());
  return kOk;
}

int cmd_validate(const RunConfig& cfg, const Flags& flags) {
  ValidationConfig vc = cfg.validate;
  vc.seed = cfg.seed;
  vc.negative_control = flags.negative_control;
  const DiscrepancyReport rep = run_validation(vc);

  using ojson = nlohmann::ordered_json;
  ojson j;
  j["seed"] = rep.seed;
  j["samples"] = rep.samples;
  j["negative_control"] = rep.negative_control;
  j["passed"] = rep.passed();
  j["flagged"] = rep.flagged();
  j["unexplained"] = rep.unexplained();
  ojson summary = ojson::array();
  for (const auto& s : rep.summary())
    summary.push_back({{"check", s.check},
                       {"records", s.records},
                       {"flagged", s.flagged},
                       {"unexplained", s.unexplained},
                       {"max_rel_err", s.max_rel_err}});
  j["summary"] = summary;
  ojson records = ojson::array();
  for (const auto& r : rep.records) {
    ojson o;
    o["check"] = r.check;
    o["quantity"] = r.quantity;
    if (r.point)
      o["point"] = {{"t", r.point->t}, {"r", r.point->r()}, {"phi", r.point->phi()}, {"rdot", r.point->rdot()},
                    {"phidot", r.point->phidot()}};
    else
      o["point"] = nullptr;
    o["closed"] = r.closed;
    o["oracle"] = r.oracle;
    o["rel_err"] = r.rel_err;
    o["tolerance"] = r.tolerance;
    o["verdict"] = to_string(r.verdict);
    o["allowance"] = r.allowance.empty() ? ojson(nullptr) : ojson(r.allowance);
    records.push_back(std::move(o));
  }
  j["records"] = records;

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const std::string path = (std::filesystem::path(cfg.out_dir) / "validation_report.json").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';

  std::printf("%-26s %8s %8s %12s %12s\n", "check", "records", "flagged", "unexplained", "max_rel_err");
  for (const auto& s : rep.summary())
    std::printf("%-26s %8zu %8zu %12zu %12.3g\n", s.check.c_str(), s.records, s.flagged, s.unexplained,
                s.max_rel_err);
  std::printf("validate: %s (%zu flagged, %zu unexplained), report %s\n", rep.passed() ? "passed" : "FAILED",
              rep.flagged(), rep.unexplained(), path.c_str());
  return rep.passed() ? kOk : kValidationFailed;
}

int cmd_sweep(const RunConfig& cfg) {
  struct Task {
    double r0, rdot0, phidot0;
    TrajectorySeries series;
    std::string error;
  };
  std::vector<double> phidots{0.0};
  if (cfg.sim.epsilon != 0.0) phidots.push_back(cfg.sim.epsilon);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.sweep.r0.n; ++i)
    for (std::size_t k = 0; k < cfg.sweep.rdot0.n; ++k)
      for (double pd : phidots) tasks.push_back({cfg.sweep.r0.at(i), cfg.sweep.rdot0.at(k), pd, {}, {}});

  const auto model = make_model(cfg);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < tasks.size(); n = next++) {
      Task& t = tasks[n];
      SimConfig sc = cfg.sim;
      sc.initial = {cfg.sweep.t_start, t.r0, 0.0, t.rdot0, t.phidot0};
      sc.t_end = cfg.sweep.t_end;
      try {
        t.series = integrate_geodesic(sc, *model);
      } catch (const DomainError& e) {
        t.error = e.what();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(cfg.sweep.threads, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < nt; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // single writer, task order
  const std::string dir = (std::filesystem::path(cfg.out_dir) / "sweep").string();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream dat((std::filesystem::path(dir) / "portrait.dat").string(), std::ios::binary | std::ios::trunc);
  if (!dat) throw ConfigError("cannot write '" + dir + "/portrait.dat'");
  CsvWriter csv(cfg.out_dir, "sweep_summary.csv");
  csv.header({"run", "r0", "rdot0", "phidot0", "stop", "first_event", "first_event_t", "t_last", "samples",
              "max_el_residual", "error"});
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const Task& t = tasks[n];
    dat << "# run " << n << " r0=" << num(t.r0) << " rdot0=" << num(t.rdot0) << " phidot0=" << num(t.phidot0) << '\n'
        << "# t r phi rdot phidot E_inst EYM g11\n";
    for (std::size_t k = 0; k < t.series.states.size(); ++k) {
      const auto& s = t.series.states[k];
      const auto& d = t.series.diagnostics[k];
      dat << num(s.t) << ' ' << num(s.r) << ' ' << num(s.phi) << ' ' << num(s.rdot) << ' ' << num(s.phidot) << ' '
          << num(d.E_inst) << ' ' << num(d.EYM) << ' ' << num(d.g11) << '\n';
    }
    dat << "\n\n";
    const bool ok = t.error.empty();
    const Event* first = ok && !t.series.events.empty() ? &t.series.events.front() : nullptr;
    csv << std::to_string(n) << t.r0 << t.rdot0 << t.phidot0 << (ok ? to_string(t.series.stop) : "error")
        << (first ? to_string(first->type) : "") << (first ? num(first->t) : "")
        << (ok ? num(t.series.states.back().t) : "") << std::to_string(t.series.states.size())
        << (ok ? num(t.series.max_el_residual()) : "") << t.error;
    csv.end();
  }
  std::printf("sweep: %zu runs on %u threads, %s and %s/portrait.dat\n", tasks.size(), nt, csv.path().c_str(),
              dir.c_str());
  return kOk;
}

}  // namespace jetlag::cli
