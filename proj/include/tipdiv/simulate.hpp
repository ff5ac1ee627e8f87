#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "tipdiv/grid.hpp"
#include "tipdiv/model.hpp"
#include "tipdiv/solver.hpp"

namespace tipdiv {

/**
 * Counter-based generator: draw k of stream (seed, index) is a pure function of
 * (seed, index, k), so paths can be evaluated in any order on any worker.
 */
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform on (0, 1].
  double uniform();
  double exponential(double rate);
  double operator()() { return uniform(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct PathConfig {
  std::uint64_t seed = 1;
  double horizon = 0.0;  ///< <= 0 selects 40 / min(q)
  long paths = 10'000;
  double x0 = 0.0;
  double lambda0 = 0.0;
  int start_state = 0;
  TippingProblem problem;
  std::vector<PolicyMap> policies;  ///< policies[m] acts in State m on its own grid
};

struct PathOutcome {
  double payoff = 0.0;
  bool ruined = false;
  double switch_time = std::numeric_limits<double>::quiet_NaN();  ///< first regime change
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  long paths = 0;
  double ruin_fraction = 0.0;
  double switch_fraction = 0.0;
  double mean_switch_time = std::numeric_limits<double>::quiet_NaN();
};

double effective_horizon(const PathConfig& cfg);

/// Discounted dividends of one path of the controlled surplus under the grid
/// policies. `time_offset` shifts the whole path to start at that time.
PathOutcome sample_path(const PathConfig& cfg, std::uint64_t path_index, double time_offset = 0.0);

EstimateReport evaluate_policy(const PathConfig& cfg);

/// Order-fixed pairwise summation.
double pairwise_sum(const double* data, std::size_t count);

struct OracleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo of the single waiting step behind apply_t0 at node (n, m).
OracleEstimate one_step_oracle(const StateSpec& spec, const GridSpec& grid, Index n, Index m,
                               const ValueSurface& w, const ValueSurface* g, long samples,
                               std::uint64_t seed = 7);

/// Optimal barrier for the classical compound Poisson model with exponential claims.
double cl_barrier(double lambda, double p, double q, const Distribution& claim);

/// Closed-form optimal value of the classical de Finetti problem with exponential claims.
double cl_closed_form(double x, double lambda, double p, double q, const Distribution& claim);

}  // namespace tipdiv
