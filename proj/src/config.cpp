#include "lpe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpe/errors.hpp"

namespace lpe {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigurationError("config key '" + std::string(key) + "': " + std::string(what) + " (got '" +
                           std::string(value) + "')");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad(key, v, "expected a real number");
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected an integer");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a non-negative integer");
  return out;
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  // start:step:stop
  if (v.find(':') != std::string_view::npos) {
    auto a = v.find(':'), b = v.find(':', a + 1);
    if (b == std::string_view::npos) bad(key, v, "range must be start:step:stop");
    double start = to_double(key, trim(v.substr(0, a)));
    double step = to_double(key, trim(v.substr(a + 1, b - a - 1)));
    double stop = to_double(key, trim(v.substr(b + 1)));
    if (!(step > 0.0) || stop < start) bad(key, v, "range needs step > 0 and stop >= start");
    auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto next = v.find(',', pos);
    auto item = trim(v.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (item.empty()) bad(key, v, "empty list item");
    out.push_back(to_double(key, item));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& data_kinds() {
  static const std::vector<std::string> kinds{"manufactured", "zero", "cosine", "random"};
  return kinds;
}

}  // namespace

std::vector<double> ExperimentConfig::default_delta_grid() {
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i / 10.0);
  return d;
}

std::vector<std::string> ExperimentConfig::keys() {
  return {"family", "k",     "gamma", "C0",   "lambda0",        "Lambda0",      "T",
          "N",      "dt",    "nu_max_override", "m",    "delta_grid",   "seed",
          "output_dir", "data", "data_frequency", "save_every", "norm_method", "estimate_octaves", "estimate_dt"};
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  auto v = trim(raw);
  if (key == "family") family = std::string(v);
  else if (key == "k") {
    auto x = to_int(key, v);
    if (x < 1 || x > 100000000) bad(key, v, "k must be a positive integer");
    k = static_cast<int>(x);
  } else if (key == "gamma") gamma = to_double(key, v);
  else if (key == "C0") C0 = to_double(key, v);
  else if (key == "lambda0") lambda0 = to_double(key, v);
  else if (key == "Lambda0") Lambda0 = to_double(key, v);
  else if (key == "T") T = to_double(key, v);
  else if (key == "N") {
    auto x = to_int(key, v);
    if (x < 8) bad(key, v, "grid size must be >= 8");
    N = static_cast<std::size_t>(x);
  } else if (key == "dt") dt = to_double(key, v);
  else if (key == "nu_max_override") {
    if (v.empty() || v == "none") nu_max_override.reset();
    else nu_max_override = static_cast<int>(to_int(key, v));
  } else if (key == "m") m = to_double(key, v);
  else if (key == "delta_grid") delta_grid = to_list(key, v);
  else if (key == "seed") seed = to_uint(key, v);
  else if (key == "output_dir") output_dir = std::string(v);
  else if (key == "data") data = std::string(v);
  else if (key == "data_frequency") data_frequency = static_cast<int>(to_int(key, v));
  else if (key == "save_every") {
    auto x = to_int(key, v);
    if (x < 1) bad(key, v, "save_every must be >= 1");
    save_every = static_cast<std::size_t>(x);
  } else if (key == "norm_method") norm_method = std::string(v);
  else if (key == "estimate_octaves") estimate_octaves = static_cast<int>(to_int(key, v));
  else if (key == "estimate_dt") estimate_dt = to_double(key, v);
  else throw ConfigurationError("unknown config key '" + std::string(key) + "'");
}

std::size_t ExperimentConfig::steps() const {
  double s = T / dt;
  auto n = static_cast<std::size_t>(std::llround(s));
  if (std::abs(s - static_cast<double>(n)) > 1e-9 * std::max(1.0, s))
    throw ConfigurationError("T / dt must be an integer number of steps");
  return n;
}

void ExperimentConfig::validate() const {
  auto names = builtin_family_names();
  if (std::find(names.begin(), names.end(), family) == names.end())
    throw ConfigurationError("unknown family '" + family + "'");
  if (!(gamma >= 0.0)) throw ConfigurationError("gamma must be >= 0");
  if (!(C0 > 0.0)) throw ConfigurationError("C0 must be > 0");
  if (!(lambda0 > 0.0) || !(Lambda0 >= lambda0)) throw ConfigurationError("need 0 < lambda0 <= Lambda0");
  if (!(T > 0.0)) throw ConfigurationError("T must be > 0");
  if (!is_power_of_two(N) || N < 8) throw ConfigurationError("N must be a power of two >= 8");
  if (!(dt > 0.0) || dt > T) throw ConfigurationError("dt must lie in (0, T]");
  (void)steps();
  if (steps() % save_every != 0) throw ConfigurationError("T / dt must be a multiple of save_every");
  int natural = dyadic::natural_nu_max(N);
  if (natural < 2) throw ConfigurationError("grid too small for nu_max >= 2");
  if (nu_max_override && (*nu_max_override < 2 || *nu_max_override > natural))
    throw ConfigurationError("nu_max_override must lie in [2, " + std::to_string(natural) + "]");
  if (delta_grid.empty()) throw ConfigurationError("delta_grid must not be empty");
  for (double d : delta_grid)
    if (!(d >= 0.0)) throw ConfigurationError("delta_grid entries must be >= 0");
  if (m < 0.0) throw ConfigurationError("m must be >= 0");
  auto& kinds = data_kinds();
  if (std::find(kinds.begin(), kinds.end(), data) == kinds.end())
    throw ConfigurationError("data must be one of manufactured, zero, cosine, random");
  if (data_frequency < 0 || static_cast<std::size_t>(data_frequency) >= N / 2)
    throw ConfigurationError("data_frequency must lie below N/2");
  if (estimate_octaves < 1 || (std::size_t{1} << estimate_octaves) >= N / 2)
    throw ConfigurationError("estimate_octaves too large for the grid");
  if (estimate_dt < 0.0) throw ConfigurationError("estimate_dt must be >= 0");
  if (norm_method != "auto" && norm_method != "dense-SVD" && norm_method != "sparse-lanczos" &&
      norm_method != "power-iteration")
    throw ConfigurationError("unknown norm_method '" + norm_method + "'");
  if (family == "interior_zero" && k % 2 != 0) throw ConfigurationError("interior_zero needs even k");
}

std::shared_ptr<const CoefficientSet> ExperimentConfig::coefficients() const {
  auto cs = std::make_shared<CoefficientSet>(builtin_family(family, k, gamma, C0, T));
  cs->lambda0 = lambda0;
  cs->Lambda0 = Lambda0;
  return cs;
}

dyadic::CutoffFamily ExperimentConfig::cutoffs() const {
  dyadic::CutoffFamily fam(N);
  return nu_max_override ? fam.truncated(*nu_max_override) : fam;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::vector<std::string> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto next = text.find('\n', pos);
    auto line = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    ++line_no;
    pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigurationError("config line " + std::to_string(line_no) + ": expected key = value");
    auto key = std::string(trim(line.substr(0, eq)));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigurationError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen.push_back(key);
    cfg.set(key, line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  put("family", c.family);
  put("k", std::to_string(c.k));
  put("gamma", fmt(c.gamma));
  put("C0", fmt(c.C0));
  put("lambda0", fmt(c.lambda0));
  put("Lambda0", fmt(c.Lambda0));
  put("T", fmt(c.T));
  put("N", std::to_string(c.N));
  put("dt", fmt(c.dt));
  put("nu_max_override", c.nu_max_override ? std::to_string(*c.nu_max_override) : "none");
  put("m", fmt(c.m));
  std::string list;
  for (std::size_t i = 0; i < c.delta_grid.size(); ++i) list += (i ? "," : "") + fmt(c.delta_grid[i]);
  put("delta_grid", list);
  put("seed", std::to_string(c.seed));
  put("output_dir", c.output_dir);
  put("data", c.data);
  put("data_frequency", std::to_string(c.data_frequency));
  put("save_every", std::to_string(c.save_every));
  put("norm_method", c.norm_method);
  put("estimate_octaves", std::to_string(c.estimate_octaves));
  put("estimate_dt", fmt(c.estimate_dt));
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace lpe
