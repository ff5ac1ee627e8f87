#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tipdiv/config.hpp"
#include "tipdiv/simulate.hpp"
#include "tipdiv/solver.hpp"

namespace tipdiv {

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<double> tol;
  std::optional<int> quad_nodes;
  std::optional<long> paths;
  std::optional<std::uint64_t> seed;
  bool config_comparisons = true;  ///< honour the config's comparison flags
  bool compare_classical = false;  ///< added to the config's comparison flags
  bool no_tipping = false;
  bool validate = true;  ///< Monte Carlo probes and one-step kernel checks from the config
  bool check = false;    ///< exit status reflects the check table
  bool svg = false;
  /// Output directory of an earlier run; its State 0..k checkpoints are reused.
  std::optional<std::string> resume;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct ProbeResult {
  double x = 0.0;
  double lambda = 0.0;
  Index n = 0;
  Index m = 0;
  double solver_value = 0.0;
  EstimateReport mc;
  double bound = 0.0;  ///< 3 SE + C (delta + Delta)
  bool pass = false;
};

struct KernelCheck {
  int state = 0;
  Index n = 0;
  Index m = 0;
  double kernel = 0.0;
  OracleEstimate oracle;
  bool pass = false;  ///< within 4 standard errors
};

struct KinkReport {
  Index cell = 0;
  double jump = 0.0;       ///< slope change across the kink cell
  double neighbour = 0.0;  ///< largest same-stencil slope change beside it
  double ratio = 0.0;
};

/// Compares the slope change across the cell containing `x_kink` with the same
/// two-cell stencil shifted two cells either side.
KinkReport detect_kink(const Eigen::VectorXd& values, double x_step, double x_kink);

struct RunResult {
  ExperimentConfig cfg;  ///< effective configuration after option overrides
  std::vector<GridSpec> grids;
  std::vector<SolveReport> chain;  ///< chain[m] is State m
  std::optional<SolveReport> no_tipping;
  std::vector<SolveReport> classical;
  std::vector<ProbeResult> probes;
  std::vector<KernelCheck> kernel_checks;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  std::filesystem::path out_dir;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
};

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options);

/// Grid-matrix CSV: header "x,<lambda_0>,..", one row per surplus node.
void write_value_csv(const std::filesystem::path& path, const ValueSurface& surface);
/// Same layout with action codes 0 = E0, 1 = E1, 2 = EF.
void write_region_csv(const std::filesystem::path& path, const PolicyMap& policy);

/// Renders a grid-matrix CSV as an SVG heatmap (x across, lambda upwards).
void render_heatmap_svg(const std::filesystem::path& csv, const std::filesystem::path& svg,
                        const std::string& title, bool categorical);

std::string sha256_hex(const std::string& bytes);
std::string version_string();

}  // namespace tipdiv
