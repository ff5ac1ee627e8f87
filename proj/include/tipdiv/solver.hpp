#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tipdiv/grid.hpp"
#include "tipdiv/kernel.hpp"
#include "tipdiv/model.hpp"

namespace tipdiv {

/// Local control actions. Codes are the ones written to region CSVs.
enum class Action : std::uint8_t {
  E0 = 0,  ///< wait one step without dividends
  E1 = 1,  ///< pay p * delta now
  EF = 2,  ///< pay the whole surplus and stop
};

struct PolicyMap {
  GridSpec grid;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> codes;

  Action operator()(Index n, Index m) const { return static_cast<Action>(codes(n, m)); }
  bool is_action(Index n, Index m) const { return codes(n, m) != 0; }
};

struct SolverOptions {
  double tol = 0.0;  ///< <= 0 selects 1e-9 * max(1, p / q)
  long max_iter = 2'000'000;
  int quad_nodes = 16;
};

struct SolveReport {
  ValueSurface value;
  PolicyMap policy;
  long iterations = 0;
  double residual = 0.0;
  double tol = 0.0;
  double wall_seconds = 0.0;
  /// Largest amount by which any iterate fell below its predecessor (0 when monotone).
  double max_iterate_decrease = 0.0;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int state, long iterations, double residual);
  int state;
  long iterations;
  double residual;
};

double default_tolerance(const StateSpec& spec);

/// Expected discounted payoff of waiting one step (action E0) at node (n, m).
/// `exit_values` is the precomputed `switch_term` (nullptr when there is no switching).
double apply_t0(const TransitionKernel& kernel, const ValueSurface& w,
                const Eigen::MatrixXd* exit_values, Index n, Index m);
/// Same, computing the exit channel from g on the fly.
double apply_t0(const TransitionKernel& kernel, const ValueSurface& w, const ValueSurface* g,
                Index n, Index m);
double apply_t1(const ValueSurface& w, Index n, Index m);
double apply_tf(const GridSpec& grid, Index n);

struct SweepResult {
  ValueSurface value;
  PolicyMap policy;
};

/// Nodewise max over applicable actions; ties resolve E0 > E1 > EF.
SweepResult bellman_sweep(const TransitionKernel& kernel, const ValueSurface& w,
                          const Eigen::MatrixXd* exit_values);

/// Iterates from the identity surface until the sup-norm change of the excess
/// over x drops below tol. Throws NonConvergence when max_iter is exhausted.
SolveReport value_iteration(const TransitionKernel& kernel, const Eigen::MatrixXd* exit_values,
                            const SolverOptions& options, int state_index = 0);

/// Builds the kernel and exit channel for one regime and solves it.
SolveReport solve_state(const StateSpec& spec, const GridSpec& grid, const ValueSurface* g,
                        const SolverOptions& options, int state_index = 0);

/// Solves State 0 first, then State m with exit value V^{m-1}. `grids[m]` is State m's grid.
std::vector<SolveReport> solve_chain(const TippingProblem& problem,
                                     const std::vector<GridSpec>& grids,
                                     const SolverOptions& options);

/// Resumes a chain: solves States first..top given V^{first-1} = `below`.
/// Reports are returned for the solved states only, lowest first.
std::vector<SolveReport> solve_chain_from(const TippingProblem& problem,
                                          const std::vector<GridSpec>& grids,
                                          const SolverOptions& options, int first,
                                          const ValueSurface& below);

struct RegionMap {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> action;
  /// Number of maximal runs of action nodes along x, per lambda index.
  std::vector<int> intervals;
};

RegionMap extract_regions(const PolicyMap& policy);

/// Runtime checks of the structural properties a solved surface must satisfy.
struct PropertyReport {
  bool converged = false;
  bool monotone_iterates = false;
  bool dominates_identity = false;  ///< V >= x
  bool slope_at_least_one = false;  ///< V(n+1) - V(n) >= p delta - tol
  bool lambda_monotone = false;     ///< V(n, m+1) <= V(n, m) + tol_mono
  bool cap_adequate = false;        ///< V(n, m1) - x_n <= cap_tol
  bool policy_admissible = false;   ///< no E1 at n = 0, no E0 at n = n1
  double min_excess = 0.0;
  double min_slope_gap = 0.0;
  double max_lambda_increase = 0.0;
  double cap_excess = 0.0;
  double max_excess = 0.0;          ///< growth-condition bound sup (V - x)
  double tol_mono = 0.0;
  double cap_tol = 0.0;

  bool all() const {
    return converged && monotone_iterates && dominates_identity && slope_at_least_one &&
           lambda_monotone && cap_adequate && policy_admissible;
  }
};

PropertyReport check_properties(const SolveReport& report, double cap_tol);

}  // namespace tipdiv
