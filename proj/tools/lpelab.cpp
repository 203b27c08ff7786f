// lpelab: configuration-driven runs of the checkers, solver, decompositions,
// commutator scans, weights and energy verifications.

#include <CLI11.hpp>

#include <spawn.h>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lpe/commutator.hpp"
#include "lpe/config.hpp"
#include "lpe/dyadic.hpp"
#include "lpe/energy.hpp"
#include "lpe/errors.hpp"
#include "lpe/io.hpp"
#include "lpe/pipeline.hpp"

extern char** environ;

namespace {

using namespace lpe;
using io::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kNumerical = 3 };

struct Common {
  std::string config;
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) throw ConfigurationError("--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::string out_dir(const Common& c, const ExperimentConfig& cfg) { return c.out.empty() ? cfg.output_dir : c.out; }

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<double> parse_list(const std::string& s) {
  ExperimentConfig tmp;
  tmp.set("delta_grid", s);
  return tmp.delta_grid;
}

int cmd_check(const Common& c) {
  auto cfg = load(c);
  auto r = pipeline::run_check_conditions(cfg);
  json j = io::to_json(r.reports);
  if (!c.out.empty()) {
    io::ArtifactWriter w(c.out, c.force);
    w.write_json("conditions.json", j);
    w.finish({{"kind", "check-conditions"}});
  }
  print(j);
  return r.all_pass ? kOk : kFailed;
}

int cmd_solve(const Common& c, std::optional<std::size_t> save_every) {
  auto cfg = load(c);
  if (save_every) {
    cfg.save_every = *save_every;
    cfg.validate();
  }
  auto traj = pipeline::run_solver(cfg, c.force);
  io::ArtifactWriter w(out_dir(c, cfg), c.force);
  io::write_trajectory(w, traj, cfg);
  w.finish({{"kind", "trajectory"}});
  print({{"saved_states", traj.size()}, {"dir", w.dir().string()}});
  return kOk;
}

int cmd_decompose(const Common& c, const std::string& traj_dir, std::optional<double> t) {
  GridFunction w;
  ExperimentConfig cfg;
  double when = 0.0;
  if (!traj_dir.empty()) {
    auto L = io::read_trajectory(traj_dir);
    cfg = L.config;
    std::size_t best = 0;
    for (std::size_t i = 0; i < L.traj.size(); ++i)
      if (std::abs(L.traj.times[i] - t.value_or(0.0)) < std::abs(L.traj.times[best] - t.value_or(0.0))) best = i;
    w = L.traj.u[best];
    when = L.traj.times[best];
  } else {
    cfg = load(c);
    auto d = pipeline::make_initial_data(cfg, cfg.coefficients());
    w = d.u0;
  }
  auto fam = cfg.cutoffs();
  auto blocks = dyadic::decompose(w, fam);
  auto norms = dyadic::block_norms2(forward(w), fam);
  json bern = json::array();
  for (int nu = 1; nu <= fam.nu_max(); ++nu) {
    auto r = dyadic::bernstein_ratio(blocks, nu);
    bern.push_back(r ? json(*r) : json(nullptr));
  }
  json summary = {{"t", when},
                  {"nu_max", fam.nu_max()},
                  {"source_hash", blocks.source_hash},
                  {"block_norms2", norms},
                  {"bernstein_ratio", bern},
                  {"reconstruction_error", (dyadic::reconstruct(blocks) - w).norm() / std::max(w.norm(), 1e-300)}};
  io::ArtifactWriter out(out_dir(c, cfg), c.force);
  out.write("cutoffs.csv", io::cutoff_table_csv(fam));
  out.write("blocks.csv", io::blocks_csv(blocks));
  out.write_json("decomposition.json", summary);
  out.finish({{"kind", "decompose"}});
  print(summary);
  return kOk;
}

int cmd_scan(const Common& c, std::optional<double> t) {
  auto cfg = load(c);
  auto cs = cfg.coefficients();
  auto fam = cfg.cutoffs();
  const double when = t.value_or(0.5 * cfg.T);
  auto s = commutator::scan(*cs, when, fam, commutator::parse_method(cfg.norm_method));
  auto lemma = commutator::verify_lemma2(s.norms_beta);
  auto constants = energy::pointwise_constants(*cs, make_check_grid(cfg.T, cfg.N));
  std::vector<double> h, wcol;
  for (int nu = 0; nu <= fam.nu_max(); ++nu) {
    h.push_back(energy::weight_h(nu, when, *cs, constants.C_tilde));
    wcol.push_back(1.0 / std::sqrt(std::max(cs->alpha(when), 0.0) + energy::epsilon_nu(cs->k, nu)));
  }
  auto ka = commutator::schur_kernel(s.norms_beta, h, {std::max(cs->alpha(when), 0.0), true, wcol});
  auto kb = commutator::schur_kernel(s.norms_b, h, {1.0, false, wcol});
  json j = {{"t", when}, {"method", std::string(commutator::method_name(s.method))}, {"lemma2", io::to_json(lemma)},
            {"schur_A", io::to_json(ka)}, {"schur_B", io::to_json(kb)}};
  io::ArtifactWriter out(out_dir(c, cfg), c.force);
  out.write("commutator_scan.csv", io::commutator_scan_csv(s));
  out.write_json("lemma2_report.json", io::to_json(lemma));
  out.write_json("schur.json", j);
  out.finish({{"kind", "commutator-scan"}});
  print(j);
  return kOk;
}

int cmd_weights(const Common& c, std::optional<int> nu_max) {
  auto cfg = load(c);
  auto cs = cfg.coefficients();
  auto constants = energy::pointwise_constants(*cs, make_check_grid(cfg.T, cfg.N));
  const int top = nu_max.value_or(cfg.cutoffs().nu_max());
  if (top < 0) throw ConfigurationError("--nu-max must be >= 0");
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(cfg.T * i / 100.0);
  std::vector<std::vector<double>> h;
  json terms = json::array();
  for (int nu = 0; nu <= top; ++nu) {
    h.push_back(energy::weight_h_series(nu, times, *cs, constants.C_tilde));
    auto wt = energy::weight_terms(nu, cfg.T, *cs);
    terms.push_back({{"nu", nu},
                     {"epsilon", energy::epsilon_nu(cs->k, nu)},
                     {"regularization", wt.regularization},
                     {"alpha_ratio", wt.alpha_ratio},
                     {"levi", wt.levi},
                     {"constant", wt.constant},
                     {"h_T", constants.C_tilde * wt.sum()}});
  }
  json j = {{"C_tilde", constants.C_tilde}, {"T", cfg.T}, {"terms", terms}};
  io::ArtifactWriter out(out_dir(c, cfg), c.force);
  out.write("weights.csv", io::weights_csv(times, h));
  out.write_json("weight_terms.json", j);
  out.finish({{"kind", "weights"}});
  print(j);
  return kOk;
}

int cmd_verify(const Common& c, const std::vector<std::string>& dirs, std::optional<double> m,
               const std::string& delta_grid) {
  if (dirs.empty()) throw ConfigurationError("--traj is required");
  std::vector<io::LoadedTrajectory> runs;
  for (const auto& d : dirs) runs.push_back(io::read_trajectory(d));
  const auto& cfg = runs.front().config;
  auto cs = runs.front().traj.coeffs;
  auto fam = cfg.cutoffs();
  double mm = m.value_or(cfg.m);
  std::vector<double> deltas = delta_grid.empty() ? cfg.delta_grid : parse_list(delta_grid);

  auto constants = energy::calibrate_constants(*cs, fam, commutator::parse_method(cfg.norm_method));
  json goals = json::array();
  bool ok = true;
  std::vector<energy::EnergyLedger> ledgers;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto ledger = energy::build_ledger(runs[i].traj, fam, constants);
    auto g = energy::verify_goal_inequality(ledger, runs[i].traj);
    ok = ok && g.within_budget;
    json gj = io::to_json(g);
    gj["traj"] = dirs[i];
    goals.push_back(gj);
    ledgers.push_back(std::move(ledger));
  }
  std::vector<Trajectory> trajs;
  for (auto& r : runs) trajs.push_back(r.traj);
  auto est = energy::verify_energy_estimate(trajs, {}, fam, mm, deltas);
  json j = {{"constants", io::to_json(constants)}, {"goal_inequality", goals}, {"energy_estimate", io::to_json(est)},
            {"pass", ok}};
  if (!c.out.empty()) {
    io::ArtifactWriter out(c.out, c.force);
    out.write_json("constants.json", io::to_json(constants));
    out.write("energies.csv", io::energies_csv(ledgers.front()));
    out.write("etot.csv", io::etot_csv(ledgers.front()));
    out.write("loss_estimate.csv", io::loss_estimate_csv(est));
    out.write_json("verification.json", j);
    out.finish({{"kind", "verify-energy"}});
  }
  print(j);
  return ok ? kOk : kFailed;
}

int cmd_pipeline(const Common& c) {
  auto cfg = load(c);
  auto res = pipeline::run_full_pipeline(cfg, out_dir(c, cfg), c.force);
  print(res.report["stages"]);
  if (res.report.contains("error"))
    std::cerr << "stage " << res.report["failed_stage"].get<std::string>() << ": "
              << res.report["error"].get<std::string>() << "\n";
  return res.exit_code;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& configs, const char* self) {
  if (configs.empty()) throw ConfigurationError("sweep needs at least one --config");
  if (c.out.empty()) throw ConfigurationError("sweep needs --out");
  if (c.jobs < 1) throw ConfigurationError("--jobs must be >= 1");
  fs::create_directories(c.out);
  // Isolated output directory per config, named after its stem.
  std::vector<std::string> names;
  for (const auto& cf : configs) {
    load_config(cf);  // reject bad configs before anything is spawned
    std::string stem = fs::path(cf).stem().string();
    for (const auto& n : names)
      if (n == stem) throw ConfigurationError("sweep: duplicate config name '" + stem + "'");
    names.push_back(stem);
  }
  std::vector<int> codes(configs.size(), 0);
  std::vector<std::pair<pid_t, std::size_t>> running;
  std::size_t next = 0;
  auto reap = [&]() {
    int status = 0;
    pid_t pid = waitpid(-1, &status, 0);
    for (auto it = running.begin(); it != running.end(); ++it)
      if (it->first == pid) {
        codes[it->second] = WIFEXITED(status) ? WEXITSTATUS(status) : kNumerical;
        running.erase(it);
        break;
      }
  };
  while (next < configs.size() || !running.empty()) {
    while (next < configs.size() && static_cast<int>(running.size()) < c.jobs) {
      std::string dir = (fs::path(c.out) / names[next]).string();
      std::vector<std::string> args{self, "pipeline", "--config", configs[next], "--out", dir};
      if (c.force) args.push_back("--force");
      if (c.seed) {
        args.push_back("--seed");
        args.push_back(std::to_string(*c.seed));
      }
      std::vector<char*> argv;
      for (auto& a : args) argv.push_back(a.data());
      argv.push_back(nullptr);
      posix_spawn_file_actions_t fa;
      posix_spawn_file_actions_init(&fa);
      std::string log = dir + ".log";
      posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      pid_t pid = 0;
      int rc = posix_spawn(&pid, self, &fa, nullptr, argv.data(), environ);
      posix_spawn_file_actions_destroy(&fa);
      if (rc != 0) throw ConfigurationError("sweep: cannot spawn '" + std::string(self) + "'");
      running.emplace_back(pid, next++);
    }
    if (!running.empty()) reap();
  }
  json j = json::array();
  int worst = kOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    j.push_back({{"config", configs[i]}, {"out", (fs::path(c.out) / names[i]).string()}, {"exit_code", codes[i]}});
    worst = std::max(worst, codes[i]);
  }
  std::ofstream(fs::path(c.out) / "sweep.json") << j.dump(2) << "\n";
  print(j);
  return worst;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpelab: loss-of-derivatives experiments for degenerate hyperbolic equations"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", c.config, "experiment config file");
    if (config_required) opt->required();
    sub->add_option("--out", c.out, "output directory");
    sub->add_flag("--force", c.force, "overwrite outputs and skip hypothesis checks");
    sub->add_option("--seed", c.seed, "seed override");
    sub->add_option("--jobs", c.jobs, "worker processes");
  };

  auto* check = app.add_subcommand("check-conditions", "run the five coefficient checkers");
  add_common(check, true);

  std::optional<std::size_t> save_every;
  auto* solve = app.add_subcommand("solve", "integrate the Cauchy problem and save the trajectory");
  add_common(solve, true);
  solve->add_option("--save-every", save_every, "save every n-th step");

  std::string traj_dir;
  std::optional<double> t;
  auto* decompose = app.add_subcommand("decompose", "dyadic blocks of the initial data or a saved state");
  add_common(decompose, false);
  decompose->add_option("--traj", traj_dir, "trajectory directory");
  decompose->add_option("--t", t, "time of the saved state");

  auto* scan = app.add_subcommand("commutator-scan", "commutator norms and Schur sums at one time");
  add_common(scan, true);
  scan->add_option("--t", t, "time (default T/2)");

  std::optional<int> nu_max;
  auto* weights = app.add_subcommand("weights", "weights h(nu, t) and their terms");
  add_common(weights, true);
  weights->add_option("--nu-max", nu_max, "largest block index");

  std::vector<std::string> traj_dirs;
  std::optional<double> m;
  std::string delta_grid;
  auto* verify = app.add_subcommand("verify-energy", "energy inequality and loss estimate for saved trajectories");
  add_common(verify, false);
  verify->add_option("--traj", traj_dirs, "trajectory directories")->required();
  verify->add_option("--m", m, "Sobolev index");
  verify->add_option("--delta-grid", delta_grid, "comma list or start:step:stop");

  auto* pipe = app.add_subcommand("pipeline", "check, solve, scan, calibrate, verify, estimate");
  add_common(pipe, true);

  std::vector<std::string> configs;
  auto* sweep = app.add_subcommand("sweep", "run the pipeline for several configs in worker processes");
  sweep->add_option("--config", configs, "config files")->required();
  sweep->add_option("--out", c.out, "root output directory")->required();
  sweep->add_flag("--force", c.force, "overwrite outputs and skip hypothesis checks");
  sweep->add_option("--seed", c.seed, "seed override");
  sweep->add_option("--jobs", c.jobs, "worker processes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*check) return cmd_check(c);
    if (*solve) return cmd_solve(c, save_every);
    if (*decompose) return cmd_decompose(c, traj_dir, t);
    if (*scan) return cmd_scan(c, t);
    if (*weights) return cmd_weights(c, nu_max);
    if (*verify) return cmd_verify(c, traj_dirs, m, delta_grid);
    if (*pipe) return cmd_pipeline(c);
    if (*sweep) return cmd_sweep(c, configs, self_path(argv[0]).c_str());
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const DimensionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kConfig;
}
