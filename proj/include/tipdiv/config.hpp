#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tipdiv/grid.hpp"
#include "tipdiv/model.hpp"
#include "tipdiv/solver.hpp"

namespace tipdiv {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line;
};

struct GridRange {
  double x_max = 1.0;
  Index x_points = 60;
  double lambda_max = 1.0;
  Index lambda_points = 60;
};

struct ProbePoint {
  double x = 0.0;
  std::optional<double> lambda;  ///< empty: the top state's lambda_av
};

struct ValidationConfig {
  bool enabled = true;
  std::uint64_t seed = 20240601;
  long paths = 100'000;
  double horizon = 0.0;  ///< <= 0: 40 / q
  double slack_constant = 0.0;
  std::vector<ProbePoint> probes;
  int one_step_points = 0;
  long one_step_samples = 1'000'000;
};

/// Structural expectations checked by `run --check`.
struct Expectations {
  bool barrier_rows = false;
  bool two_band_row = false;
  bool top_row_action = false;
  bool states_increase_towards_tipping = false;
  std::optional<double> kink_at;
};

struct ExperimentConfig {
  std::string name;
  std::string source_text;  ///< raw config bytes (hashed into the manifest)
  TippingProblem problem;
  std::vector<GridRange> grids;  ///< grids[m] for State m
  SolverOptions solver;
  double cap_tolerance = 0.25;  ///< relative to the largest excess over x at the baseline row
  bool compare_classical = false;
  bool compare_no_tipping = false;
  ValidationConfig validation;
  Expectations expect;
  std::string output_dir = "out";
  bool svg = false;
};

/// Parses "a/b", decimals and integers.
double parse_number(const std::string& text);

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Bundled example configurations ("example1" .. "example4").
std::vector<std::string> bundled_config_names();
std::optional<std::string> bundled_config_text(const std::string& name);

/// Bundled name or file path.
ExperimentConfig resolve_config(const std::string& name_or_path);

std::vector<GridSpec> build_grids(const ExperimentConfig& cfg);

/// Same premiums, constant intensity lambda_av per state, no catastrophes.
TippingProblem classical_analogue(const TippingProblem& problem);
std::vector<GridSpec> classical_grids(const ExperimentConfig& cfg, const TippingProblem& classical);

/// Top-state dynamics solved without any switching.
StateSpec no_tipping_state(const TippingProblem& problem);

}  // namespace tipdiv
