#include "lpe/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpe/errors.hpp"
#include "lpe/hash.hpp"

namespace lpe::io {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ArtifactWriter::ArtifactWriter(fs::path dir, bool force) : dir_(std::move(dir)) {
  std::error_code ec;
  if (fs::exists(dir_) && !fs::is_empty(dir_) && !force)
    throw ConfigurationError("output directory '" + dir_.string() + "' is not empty (use --force)");
  fs::create_directories(dir_, ec);
  if (ec) throw ConfigurationError("cannot create '" + dir_.string() + "': " + ec.message());
}

void ArtifactWriter::write(const std::string& relative, const std::string& content) {
  fs::path p = dir_ / relative;
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigurationError("cannot write '" + p.string() + "'");
  f << content;
  f.close();
  if (!f) throw ConfigurationError("write failed for '" + p.string() + "'");
  for (auto& [name, hash] : files_)
    if (name == relative) {
      hash = sha256_hex(content);
      return;
    }
  files_.emplace_back(relative, sha256_hex(content));
}

void ArtifactWriter::write_json(const std::string& relative, const json& j) { write(relative, j.dump(2) + "\n"); }

void ArtifactWriter::finish(const json& extra) {
  json m = extra;
  json files = json::array();
  for (const auto& [name, hash] : files_) files.push_back({{"path", name}, {"sha256", hash}});
  m["files"] = files;
  std::ofstream f(dir_ / "manifest.json", std::ios::trunc);
  f << m.dump(2) << "\n";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string grid_function_csv(const GridFunction& w) {
  std::string s = "index,x,re,im\n";
  for (std::size_t j = 0; j < w.size(); ++j)
    s += std::to_string(j) + "," + num(w.x(j)) + "," + num(w[j].real()) + "," + num(w[j].imag()) + "\n";
  return s;
}

namespace {

std::vector<std::vector<double>> parse_rows(const std::string& text, std::size_t columns, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      auto next = line.find(',', pos);
      std::string item = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        row.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigurationError(what + ": malformed value '" + item + "'");
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (row.size() != columns) throw ConfigurationError(what + ": wrong column count");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

GridFunction parse_grid_function_csv(const std::string& text, double period) {
  auto rows = parse_rows(text, 4, "grid function csv");
  std::vector<cplx> v;
  for (const auto& r : rows) v.emplace_back(r[2], r[3]);
  return GridFunction(std::move(v), period);
}

std::string cutoff_table_csv(const dyadic::CutoffFamily& fam) {
  std::string s = "slot,xi";
  for (int nu = 0; nu <= fam.nu_max(); ++nu) s += ",phi_" + std::to_string(nu);
  s += ",sum\n";
  for (std::size_t k = 0; k < fam.n_points(); ++k) {
    s += std::to_string(k) + "," + num(frequency(k, fam.n_points(), fam.period()));
    double sum = 0.0;
    for (int nu = 0; nu <= fam.nu_max(); ++nu) {
      s += "," + num(fam.phi(nu)[k]);
      sum += fam.phi(nu)[k];
    }
    s += "," + num(sum) + "\n";
  }
  return s;
}

std::string blocks_csv(const dyadic::DyadicBlocks& b) {
  std::string s = "index";
  for (std::size_t nu = 0; nu < b.blocks.size(); ++nu)
    s += ",re_" + std::to_string(nu) + ",im_" + std::to_string(nu);
  s += "\n";
  const std::size_t n = b.blocks.empty() ? 0 : b.blocks[0].size();
  for (std::size_t j = 0; j < n; ++j) {
    s += std::to_string(j);
    for (const auto& w : b.blocks) s += "," + num(w[j].real()) + "," + num(w[j].imag());
    s += "\n";
  }
  return s;
}

std::string commutator_scan_csv(const commutator::CommutatorScan& sc) {
  std::string s = "t,nu,mu,norm_beta,norm_b\n";
  for (int nu = 0; nu <= sc.nu_max; ++nu)
    for (int mu = 0; mu <= sc.nu_max; ++mu)
      s += num(sc.t) + "," + std::to_string(nu) + "," + std::to_string(mu) + "," + num(sc.norms_beta(nu, mu)) + "," +
           num(sc.norms_b(nu, mu)) + "\n";
  return s;
}

std::string energies_csv(const energy::EnergyLedger& L) {
  std::string s = "t,nu,E,h,weight\n";
  for (std::size_t i = 0; i < L.times.size(); ++i)
    for (int nu = 0; nu <= L.nu_max; ++nu)
      s += num(L.times[i]) + "," + std::to_string(nu) + "," + num(L.E[i][static_cast<std::size_t>(nu)]) + "," +
           num(L.h[i][static_cast<std::size_t>(nu)]) + "," + num(L.weight(i, nu)) + "\n";
  return s;
}

std::string etot_csv(const energy::EnergyLedger& L) {
  std::string s = "t,Etot,rhs,rhs_integral,violation\n";
  for (std::size_t i = 0; i < L.times.size(); ++i)
    s += num(L.times[i]) + "," + num(L.Etot[i]) + "," + num(L.rhs[i]) + "," + num(L.rhs_integral[i]) + "," +
         num(L.violation[i]) + "\n";
  return s;
}

std::string weights_csv(const std::vector<double>& times, const std::vector<std::vector<double>>& h) {
  std::string s = "t,nu,h\n";
  for (std::size_t nu = 0; nu < h.size(); ++nu)
    for (std::size_t i = 0; i < times.size(); ++i)
      s += num(times[i]) + "," + std::to_string(nu) + "," + num(h[nu][i]) + "\n";
  return s;
}

std::string loss_estimate_csv(const energy::LossEstimate& e) {
  std::string s = "delta,run,ratio\n";
  for (std::size_t d = 0; d < e.deltas.size(); ++d)
    for (std::size_t r = 0; r < e.ratios[d].size(); ++r)
      s += num(e.deltas[d]) + "," + std::to_string(r) + "," + num(e.ratios[d][r]) + "\n";
  return s;
}

json to_json(const ConditionReport& r) {
  json j;
  j["condition"] = std::string(condition_name(r.condition_id));
  j["verdict"] = r.verdict;
  j["margin"] = r.margin;
  if (r.witness) j["witness"] = {{"t", r.witness->t}, {"x", r.witness->x}, {"value", r.witness->value}};
  else j["witness"] = nullptr;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const std::vector<ConditionReport>& rs) {
  json arr = json::array();
  bool all = true;
  for (const auto& r : rs) {
    arr.push_back(to_json(r));
    all = all && r.verdict;
  }
  return {{"all_pass", all}, {"conditions", arr}};
}

json to_json(const energy::Constants& c) {
  json j = {{"lambda_eff", c.lambda_eff}, {"C1", c.C1},   {"C2_alpha", c.C2_alpha}, {"C2_beta", c.C2_beta},
            {"C2", c.C2},                 {"C3", c.C3},   {"C4", c.C4},             {"C_tilde", c.C_tilde},
            {"C_A", c.C_A},               {"C_B", c.C_B}, {"C_schur", c.C_schur},   {"sigma", c.sigma},
            {"sup_beta_t", c.sup_beta_t}, {"sup_c", c.sup_c}, {"levi_ratio", c.levi_ratio},
            {"sample_times", c.sample_times}, {"S_A", c.S_A}, {"S_B", c.S_B}};
  json f = json::object();
  for (const auto& [k, v] : energy::constant_formulas()) f[k] = v;
  j["formulas"] = f;
  return j;
}

json to_json(const commutator::Lemma2Report& r) {
  json slopes = json::array();
  for (const auto& s : r.slopes) slopes.push_back({{"order", s.order}, {"slope", s.slope}, {"C", s.C}, {"passes", s.passes}});
  return {{"C_near", r.C_near},
          {"far_slope", r.far_slope},
          {"far_intercept", r.far_intercept},
          {"fit_residual", r.fit_residual},
          {"fit_range", {r.fit_min, r.fit_max}},
          {"far_points", r.far_points},
          {"far_entries", r.far_entries},
          {"exact_zero_regime", r.exact_zero_regime},
          {"partial", r.partial},
          {"floor", r.floor},
          {"orders", slopes}};
}

json to_json(const commutator::SchurKernel& k) {
  return {{"S_row", k.s_row},       {"S_col", k.s_col},       {"near_row", k.near_row}, {"near_col", k.near_col},
          {"far_row", k.far_row},   {"far_col", k.far_col},   {"bound", k.bound()}};
}

json to_json(const energy::GoalReport& g) {
  return {{"violation", g.violation},
          {"budget", g.budget},
          {"worst_index", g.worst_index},
          {"normalization", g.normalization},
          {"within_budget", g.within_budget}};
}

json to_json(const energy::LossEstimate& e) {
  json j = {{"m", e.m},
            {"deltas", e.deltas},
            {"worst_ratio", e.worst},
            {"tail_growth", e.tail_growth},
            {"growth_tolerance", e.growth_tolerance},
            {"observed", e.observed()}};
  j["delta_star"] = e.delta_star ? json(*e.delta_star) : json(nullptr);
  j["C_m"] = e.observed() ? json(e.C_m) : json(nullptr);
  return j;
}

void write_trajectory(ArtifactWriter& out, const Trajectory& traj, const ExperimentConfig& cfg) {
  if (traj.size() == 0) throw DimensionError("write_trajectory: empty trajectory");
  std::vector<std::size_t> indices;
  json files = json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& u = traj.u[i];
    const auto& ut = traj.ut[i];
    std::string s = "index,x,u_re,u_im,ut_re,ut_im\n";
    for (std::size_t j = 0; j < u.size(); ++j)
      s += std::to_string(j) + "," + num(u.x(j)) + "," + num(u[j].real()) + "," + num(u[j].imag()) + "," +
           num(ut[j].real()) + "," + num(ut[j].imag()) + "\n";
    char name[64];
    std::size_t step = i * traj.save_every;
    std::snprintf(name, sizeof name, "snapshots/step_%08zu.csv", step);
    out.write(name, s);
    indices.push_back(step);
    files.push_back(name);
  }
  json meta = {{"N", traj.u[0].size()},
               {"period", traj.u[0].period()},
               {"dt", traj.dt},
               {"step_dt", traj.step_dt},
               {"save_every", traj.save_every},
               {"M", traj.size()},
               {"times", traj.times},
               {"saved_steps", indices},
               {"snapshots", files},
               {"config", serialize_config(cfg)}};
  out.write_json("trajectory.json", meta);
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "trajectory.json"));
  } catch (const json::exception& e) {
    throw ConfigurationError("trajectory.json: " + std::string(e.what()));
  }
  LoadedTrajectory L;
  L.config = parse_config(meta.at("config").get<std::string>());
  const double period = meta.at("period").get<double>();
  const std::size_t n = meta.at("N").get<std::size_t>();
  L.traj.dt = meta.at("dt").get<double>();
  L.traj.step_dt = meta.at("step_dt").get<double>();
  L.traj.save_every = meta.at("save_every").get<std::size_t>();
  L.traj.times = meta.at("times").get<std::vector<double>>();
  L.traj.coeffs = L.config.coefficients();
  for (const auto& name : meta.at("snapshots")) {
    auto rows = parse_rows(read_file(dir / name.get<std::string>()), 6, name.get<std::string>());
    if (rows.size() != n) throw DimensionError("snapshot " + name.get<std::string>() + " has the wrong length");
    std::vector<cplx> u, ut;
    for (const auto& r : rows) {
      u.emplace_back(r[2], r[3]);
      ut.emplace_back(r[4], r[5]);
    }
    L.traj.u.emplace_back(std::move(u), period);
    L.traj.ut.emplace_back(std::move(ut), period);
  }
  if (L.traj.u.size() != L.traj.times.size()) throw DimensionError("trajectory.json: snapshot count mismatch");
  return L;
}

json plot_description() {
  auto line = [](std::string file, std::string x, std::string y, std::string group = "") {
    json s = {{"file", file}, {"x", x}, {"y", y}};
    if (!group.empty()) s["group_by"] = group;
    return s;
  };
  return {{"version", 1},
          {"plots",
           json::array({
               {{"title", "Total energy and integrated right-hand side"},
                {"x_label", "t"},
                {"y_scale", "linear"},
                {"series", json::array({line("etot.csv", "t", "Etot"), line("etot.csv", "t", "rhs_integral")})}},
               {{"title", "Inequality violation"},
                {"x_label", "t"},
                {"series", json::array({line("etot.csv", "t", "violation")})}},
               {{"title", "Block energies"},
                {"x_label", "t"},
                {"y_scale", "log"},
                {"series", json::array({line("energies.csv", "t", "E", "nu")})}},
               {{"title", "Weights h(nu, t)"},
                {"x_label", "t"},
                {"series", json::array({line("energies.csv", "t", "h", "nu")})}},
               {{"title", "Commutator norms"},
                {"kind", "heatmap"},
                {"series", json::array({{{"file", "commutator_scan.csv"}, {"x", "mu"}, {"y", "nu"}, {"z", "norm_beta"}}})}},
               {{"title", "Loss estimate ratios"},
                {"x_label", "delta"},
                {"y_scale", "log"},
                {"series", json::array({line("loss_estimate.csv", "delta", "ratio", "run")})}},
           })}};
}

}  // namespace lpe::io
