#pragma once

// Composed runs: check -> solve -> scan -> calibrate -> energies -> inequality
// -> loss estimate, each stage writing its artifacts.

#include <optional>
#include <string>
#include <vector>

#include "lpe/config.hpp"
#include "lpe/energy.hpp"
#include "lpe/io.hpp"
#include "lpe/solver.hpp"

namespace lpe::pipeline {

struct InitialData {
  GridFunction u0, u1;
  Source f;
  std::optional<SpaceTimeField> exact;
};

/// Separable modes spread over several dyadic blocks.
std::vector<Mode> manufactured_modes(const ExperimentConfig& cfg);

InitialData make_initial_data(const ExperimentConfig& cfg, std::shared_ptr<const CoefficientSet> cs);

Trajectory run_solver(const ExperimentConfig& cfg, bool force);

/// Frequency family for the loss estimate: (cos 2^j x, 0) and (0, 2^j cos 2^j x), j = 1..octaves, f = 0.
struct EstimateFamily {
  std::vector<Trajectory> runs;
  std::vector<double> frequencies;
};
EstimateFamily estimate_family(const ExperimentConfig& cfg, bool force);

struct CheckResult {
  std::vector<ConditionReport> reports;
  bool all_pass = false;
};
CheckResult run_check_conditions(const ExperimentConfig& cfg);

struct PipelineResult {
  int exit_code = 0;
  io::json report;
};

/// Writes every artifact under `out`. Stage failures are recorded in report.json and
/// mapped to exit codes (1 verification, 2 configuration, 3 numerical).
PipelineResult run_full_pipeline(const ExperimentConfig& cfg, const std::string& out, bool force);

}  // namespace lpe::pipeline
