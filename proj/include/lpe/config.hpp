#pragma once

// Experiment configuration: flat "key = value" text, '#' starts a comment.
// Unknown keys and malformed values are rejected with ConfigurationError.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpe/coefficients.hpp"
#include "lpe/dyadic.hpp"

namespace lpe {

struct ExperimentConfig {
  std::string family = "monomial";
  int k = 2;
  double gamma = 0.0;
  double C0 = 1.0;
  double lambda0 = 0.5;
  double Lambda0 = 1.5;
  double T = 1.0;
  std::size_t N = 128;
  double dt = 1e-4;
  std::optional<int> nu_max_override;
  double m = 0.0;
  std::vector<double> delta_grid = default_delta_grid();
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// manufactured | zero | cosine | random
  std::string data = "manufactured";
  /// Wavenumber of the "cosine" data.
  int data_frequency = 4;
  std::size_t save_every = 10;
  std::string norm_method = "auto";
  /// Runs in the loss-estimate family use data at 2^1 .. 2^octaves.
  int estimate_octaves = 5;
  /// Step for the estimate family; 0 means dt.
  double estimate_dt = 0.0;

  static std::vector<double> default_delta_grid();

  std::size_t steps() const;
  std::shared_ptr<const CoefficientSet> coefficients() const;
  dyadic::CutoffFamily cutoffs() const;

  /// Sets one key from its text form, with the same checks as parsing.
  void set(std::string_view key, std::string_view value);
  /// Throws ConfigurationError listing the first out-of-range field.
  void validate() const;

  static std::vector<std::string> keys();
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace lpe
