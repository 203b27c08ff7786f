#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "lpe/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(LPELAB_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lpe-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_cfg(const fs::path& dir, const std::string& name, const std::string& text) {
  auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string configs() { return LPE_CONFIG_DIR; }

}  // namespace

TEST_CASE("exit codes") {
  auto dir = scratch("codes");
  auto bad_order = write_cfg(dir, "order.cfg", "family = monomial\nk = 3\ngamma = 0\nN = 64\nestimate_octaves = 3\n");
  CHECK(run("check-conditions --config " + bad_order.string()) == 1);
  CHECK(run("check-conditions --config " + configs() + "/k2-gamma0.cfg") == 0);

  auto unknown = write_cfg(dir, "unknown.cfg", "kay = 2\n");
  CHECK(run("check-conditions --config " + unknown.string()) == 2);
  CHECK(run("solve --config " + (dir / "missing.cfg").string()) == 2);
  CHECK(run("no-such-command") == 2);

  auto cfl = write_cfg(dir, "cfl.cfg", "family = nondegenerate\nk = 1\nN = 64\nestimate_octaves = 3\ndt = 0.5\nT = 1\nsave_every = 1\ndata = cosine\n");
  CHECK(run("solve --config " + cfl.string() + " --out " + (dir / "cfl").string()) == 3);

  // a non-empty output directory needs --force
  auto z = configs() + "/zero-data.cfg";
  CHECK(run("solve --config " + z + " --out " + (dir / "solve").string()) == 0);
  CHECK(run("solve --config " + z + " --out " + (dir / "solve").string()) == 2);
  CHECK(run("solve --config " + z + " --out " + (dir / "solve").string() + " --force") == 0);
  CHECK(run("decompose --traj " + (dir / "solve").string() + " --t 0.5 --out " + (dir / "dec").string()) == 0);
  CHECK(run("weights --config " + z + " --nu-max 4 --out " + (dir / "w").string()) == 0);
  CHECK(run("verify-energy --config " + z + " --traj " + (dir / "solve").string() + " --m 1 --delta-grid 0.5,1") == 0);
  fs::remove_all(dir);
}

TEST_CASE("zero-data pipeline is deterministic") {
  auto dir = scratch("pipeline");
  auto z = configs() + "/zero-data.cfg";
  REQUIRE(run("pipeline --config " + z + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("pipeline --config " + z + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"energies.csv", "etot.csv", "commutator_scan.csv", "loss_estimate.csv", "constants.json"}) {
    CAPTURE(f);
    auto a = lpe::io::read_file(dir / "a" / f);
    CHECK(!a.empty());
    CHECK(a == lpe::io::read_file(dir / "b" / f));
  }
  auto report = lpe::io::json::parse(lpe::io::read_file(dir / "a" / "report.json"));
  CHECK(report.contains("stages"));
  fs::remove_all(dir);
}

TEST_CASE("sweep runs every config") {
  auto dir = scratch("sweep");
  auto z = configs() + "/zero-data.cfg";
  auto bad = write_cfg(dir, "bad.cfg", "family = monomial\nk = 3\ngamma = 0\nN = 64\nestimate_octaves = 3\ndata = zero\n");
  int rc = run("sweep --config " + z + " " + bad.string() + " --out " + (dir / "out").string() + " --jobs 2");
  CHECK(rc != 0);
  auto summary = lpe::io::json::parse(lpe::io::read_file(dir / "out" / "sweep.json"));
  REQUIRE(summary.size() == 2);
  CHECK(summary[0]["exit_code"] == 0);
  CHECK(summary[1]["exit_code"] != 0);
  CHECK(fs::exists(dir / "out" / "zero-data" / "report.json"));
  fs::remove_all(dir);
}
