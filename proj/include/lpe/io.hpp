#pragma once

// Persistence: CSV tables, JSON reports, trajectory directories and the
// artifact manifest (every written file with its SHA-256).

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpe/coefficients.hpp"
#include "lpe/commutator.hpp"
#include "lpe/config.hpp"
#include "lpe/dyadic.hpp"
#include "lpe/energy.hpp"
#include "lpe/solver.hpp"

namespace lpe::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// %.17g
std::string num(double v);

class ArtifactWriter {
 public:
  /// Creates `dir`. An existing non-empty directory is an error unless `force`.
  ArtifactWriter(fs::path dir, bool force);

  const fs::path& dir() const { return dir_; }
  /// Writes `content` to dir/relative and records its hash.
  void write(const std::string& relative, const std::string& content);
  void write_json(const std::string& relative, const json& j);
  /// Writes manifest.json listing every file written so far.
  void finish(const json& extra = json::object());

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string read_file(const fs::path& p);

// CSV tables
std::string grid_function_csv(const GridFunction& w);
GridFunction parse_grid_function_csv(const std::string& text, double period = kTwoPi);
std::string cutoff_table_csv(const dyadic::CutoffFamily& fam);
std::string blocks_csv(const dyadic::DyadicBlocks& blocks);
std::string commutator_scan_csv(const commutator::CommutatorScan& s);
std::string energies_csv(const energy::EnergyLedger& L);
std::string etot_csv(const energy::EnergyLedger& L);
std::string weights_csv(const std::vector<double>& times, const std::vector<std::vector<double>>& h);
std::string loss_estimate_csv(const energy::LossEstimate& est);

// JSON reports
json to_json(const ConditionReport& r);
json to_json(const std::vector<ConditionReport>& rs);
json to_json(const energy::Constants& c);
json to_json(const commutator::Lemma2Report& r);
json to_json(const commutator::SchurKernel& k);
json to_json(const energy::GoalReport& g);
json to_json(const energy::LossEstimate& e);

/// Trajectory snapshots under <dir>/snapshots plus trajectory.json.
void write_trajectory(ArtifactWriter& out, const Trajectory& traj, const ExperimentConfig& cfg);

struct LoadedTrajectory {
  Trajectory traj;
  ExperimentConfig config;
};
LoadedTrajectory read_trajectory(const fs::path& dir);

/// Declarative plot descriptions for the CSVs of a pipeline run.
json plot_description();

}  // namespace lpe::io
