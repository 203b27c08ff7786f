#include "lpe/pipeline.hpp"

#include <cmath>
#include <random>

#include "lpe/commutator.hpp"
#include "lpe/errors.hpp"

namespace lpe::pipeline {

std::vector<Mode> manufactured_modes(const ExperimentConfig& cfg) {
  const int nm = cfg.cutoffs().nu_max();
  std::vector<Mode> modes;
  const double wavenumbers[] = {1.0, 3.0, 6.0, 12.0, 24.0};
  for (int j = 0; j < 5; ++j) {
    double xi = wavenumbers[j];
    if (xi > std::ldexp(1.0, nm) / 1.5) break;
    modes.push_back({std::ldexp(1.0, -j), 1.0 + 0.5 * j, 0.3 * j, xi, 0.7 * j});
  }
  return modes;
}

InitialData make_initial_data(const ExperimentConfig& cfg, std::shared_ptr<const CoefficientSet> cs) {
  const std::size_t n = cfg.N;
  InitialData d{GridFunction(n), GridFunction(n), Source{}, std::nullopt};
  if (cfg.data == "zero") return d;
  if (cfg.data == "cosine") {
    const double xi = cfg.data_frequency;
    d.u0 = GridFunction::sample(n, [xi](double x) { return std::cos(xi * x); });
    return d;
  }
  if (cfg.data == "random") {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    const int band = 1 << (cfg.cutoffs().nu_max() - 1);
    Spectrum s0(n, kTwoPi), s1(n, kTwoPi);
    for (int xi = -band; xi <= band; ++xi) {
      std::size_t slot = static_cast<std::size_t>((xi + static_cast<int>(n)) % static_cast<int>(n));
      double decay = 1.0 / (1.0 + xi * xi);
      s0[slot] = cplx(nd(rng), nd(rng)) * decay;
      s1[slot] = cplx(nd(rng), nd(rng)) * decay;
    }
    d.u0 = inverse(s0);
    d.u1 = inverse(s1);
    return d;
  }
  // manufactured
  auto field = mode_sum(manufactured_modes(cfg));
  d.u0 = sample(field.u, 0.0, n);
  d.u1 = sample(field.ut, 0.0, n);
  d.f = manufactured_rhs(cs, field, n);
  d.exact = field;
  return d;
}

Trajectory run_solver(const ExperimentConfig& cfg, bool force) {
  auto cs = cfg.coefficients();
  InitialData d = make_initial_data(cfg, cs);
  SolverOptions opts;
  opts.save_every = cfg.save_every;
  opts.force = force;
  return solve_cauchy(cs, d.u0, d.u1, d.f, cfg.steps(), cfg.dt, opts);
}

EstimateFamily estimate_family(const ExperimentConfig& cfg, bool force) {
  auto cs = cfg.coefficients();
  const double dt = cfg.estimate_dt > 0.0 ? cfg.estimate_dt : cfg.dt;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / dt));
  if (std::abs(static_cast<double>(steps) * dt - cfg.T) > 1e-9 * cfg.T)
    throw ConfigurationError("T / estimate_dt must be an integer number of steps");
  SolverOptions opts;
  opts.force = force;
  // About a hundred saved states regardless of the step.
  opts.save_every = std::max<std::size_t>(1, steps / 100);
  while (steps % opts.save_every != 0) --opts.save_every;
  EstimateFamily fam;
  const std::size_t n = cfg.N;
  GridFunction zero(n);
  for (int j = 1; j <= cfg.estimate_octaves; ++j) {
    const double xi = std::ldexp(1.0, j);
    auto c = GridFunction::sample(n, [xi](double x) { return std::cos(xi * x); });
    fam.runs.push_back(solve_cauchy(cs, c, zero, Source{}, steps, dt, opts));
    fam.frequencies.push_back(xi);
    fam.runs.push_back(solve_cauchy(cs, zero, xi * c, Source{}, steps, dt, opts));
    fam.frequencies.push_back(xi);
  }
  return fam;
}

CheckResult run_check_conditions(const ExperimentConfig& cfg) {
  auto cs = cfg.coefficients();
  CheckResult r;
  r.reports = check_all(*cs, make_check_grid(cfg.T, cfg.N));
  r.all_pass = true;
  for (const auto& c : r.reports) r.all_pass = r.all_pass && c.verdict;
  return r;
}

PipelineResult run_full_pipeline(const ExperimentConfig& cfg, const std::string& out, bool force) {
  PipelineResult res;
  io::json& rep = res.report;
  rep["config"] = serialize_config(cfg);
  rep["stages"] = io::json::array();
  io::ArtifactWriter w(out, force);
  w.write("config.cfg", serialize_config(cfg));
  std::string stage = "check";
  auto done = [&](const std::string& name, io::json detail) {
    detail["stage"] = name;
    rep["stages"].push_back(detail);
  };
  bool ok = true;
  try {
    auto checks = run_check_conditions(cfg);
    w.write_json("conditions.json", io::to_json(checks.reports));
    done("check", {{"all_pass", checks.all_pass}});
    if (!checks.all_pass && !force) {
      rep["failed_stage"] = "check";
      res.exit_code = 1;
      rep["pass"] = false;
      w.write_json("report.json", rep);
      w.finish({{"kind", "pipeline"}});
      return res;
    }

    stage = "solve";
    Trajectory traj = run_solver(cfg, true);
    io::write_trajectory(w, traj, cfg);
    done("solve", {{"saved_states", traj.size()}, {"dt", cfg.dt}, {"steps", cfg.steps()}});

    stage = "scan";
    auto cs = cfg.coefficients();
    auto fam = cfg.cutoffs();
    auto method = commutator::parse_method(cfg.norm_method);
    std::vector<commutator::CommutatorScan> scans;
    std::string scan_csv;
    for (double f : {0.25, 0.5, 0.75, 1.0}) {
      scans.push_back(commutator::scan(*cs, f * cfg.T, fam, method));
      std::string part = io::commutator_scan_csv(scans.back());
      scan_csv += scan_csv.empty() ? part : part.substr(part.find('\n') + 1);
    }
    w.write("commutator_scan.csv", scan_csv);
    auto lemma = commutator::verify_lemma2(scans[1].norms_beta);
    w.write_json("lemma2_report.json", io::to_json(lemma));
    done("scan", {{"times", {0.25 * cfg.T, 0.5 * cfg.T, 0.75 * cfg.T, cfg.T}}, {"C_near", lemma.C_near}});

    stage = "calibrate";
    auto constants = energy::calibrate_constants(*cs, fam, scans, make_check_grid(cfg.T, cfg.N));
    w.write_json("constants.json", io::to_json(constants));
    done("calibrate", {{"C_tilde", constants.C_tilde}, {"sigma", constants.sigma}});

    stage = "energies";
    auto ledger = energy::build_ledger(traj, fam, constants);
    w.write("energies.csv", io::energies_csv(ledger));
    w.write("etot.csv", io::etot_csv(ledger));
    done("energies", {{"Etot0", ledger.Etot.front()}, {"EtotT", ledger.Etot.back()}});

    stage = "verify";
    auto goal = energy::verify_goal_inequality(ledger, traj);
    rep["goal_inequality"] = io::to_json(goal);
    ok = ok && goal.within_budget;
    done("verify", {{"within_budget", goal.within_budget}});

    stage = "estimate";
    auto family = estimate_family(cfg, true);
    auto est = energy::verify_energy_estimate(family.runs, family.frequencies, fam, cfg.m, cfg.delta_grid);
    w.write("loss_estimate.csv", io::loss_estimate_csv(est));
    rep["energy_estimate"] = io::to_json(est);
    done("estimate", {{"observed", est.observed()}});

    w.write_json("plots.json", io::plot_description());
  } catch (const ConfigurationError& e) {
    rep["failed_stage"] = stage;
    rep["error"] = e.what();
    res.exit_code = 2;
  } catch (const NumericalError& e) {
    rep["failed_stage"] = stage;
    rep["error"] = e.what();
    res.exit_code = 3;
  } catch (const DimensionError& e) {
    rep["failed_stage"] = stage;
    rep["error"] = e.what();
    res.exit_code = 2;
  }
  if (res.exit_code == 0 && !ok) res.exit_code = 1;
  rep["pass"] = res.exit_code == 0;
  w.write_json("report.json", rep);
  w.finish({{"kind", "pipeline"}});
  return res;
}

}  // namespace lpe::pipeline
