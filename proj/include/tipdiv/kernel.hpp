#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "tipdiv/grid.hpp"
#include "tipdiv/model.hpp"

namespace tipdiv {

/// Intensity at time t after starting from `lam` with no catastrophe in between.
template <class Scalar>
Scalar decayed_intensity(Scalar floor, Scalar lam, Scalar decay, Scalar t) {
  using std::exp;
  return floor + exp(-decay * t) * (lam - floor);
}

/// Integral of `decayed_intensity` over [0, t].
template <class Scalar>
Scalar cumulative_hazard(Scalar floor, Scalar lam, Scalar decay, Scalar t) {
  using std::expm1;
  return floor * t - (lam - floor) * expm1(-decay * t) / decay;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

QuadratureRule gauss_legendre(int points);

/**
 * Outcome of a claim hitting pre-claim surplus y: `mass(j)` is the probability
 * of landing in grid cell j after snapping down, `ruin` the probability that
 * the claim exceeds y, `crumb` the expected sub-cell remainder paid out.
 */
struct ClaimRedistribution {
  Eigen::VectorXd mass;
  double ruin = 0.0;
  double crumb = 0.0;
};

ClaimRedistribution claim_redistribution(const GridSpec& grid, const Distribution& claim, double y);

/// Probability that lam_c + Y snaps up to each lambda index; the cap bin takes the tail.
Eigen::VectorXd jump_redistribution(const GridSpec& grid, const Distribution& jump, double lam_c);

/// Linear part of the claim channel feeding one destination lambda index:
/// coef(k) multiplies w(n - k, dest).
struct ClaimBlock {
  Index dest = 0;
  Eigen::VectorXd coef;
};

/// One-step tables for a starting intensity lambda_m. Weights already include
/// the discount factor e^{-q t}; the *_prob fields are undiscounted.
struct LambdaColumn {
  std::vector<double> breaks;  ///< panel boundaries in [0, delta]
  Eigen::VectorXd t;
  Eigen::VectorXd weight;
  Eigen::VectorXd intensity;
  Eigen::VectorXd survival;
  Eigen::VectorXi dest;

  double end_survival = 0.0;
  Index end_dest = 0;
  double no_event_weight = 0.0;

  std::vector<ClaimBlock> claim_blocks;
  Eigen::VectorXd crumb;  ///< expected discounted crumb dividends, per n < n1
  Eigen::VectorXd jump_coef;
  double jump_dividend = 0.0;

  /// F_U(k x_step + p t_i) and E[U 1{U <= k x_step + p t_i}], rows = nodes, cols = k.
  Eigen::MatrixXd node_cdf;
  Eigen::MatrixXd node_tmean;

  double claim_prob = 0.0;
  double jump_prob = 0.0;
  double switch_prob = 0.0;
};

struct TransitionKernel {
  GridSpec grid;
  double premium = 0.0;
  double discount = 0.0;
  double beta = 0.0;
  double switch_rate = 0.0;
  double lambda_floor = 0.0;
  double decay = 0.0;
  int quad_nodes = 0;
  Distribution claim = Distribution::exponential(1.0);
  Distribution jump = Distribution::exponential(1.0);
  std::vector<LambdaColumn> columns;
};

TransitionKernel build_kernel(const StateSpec& spec, const GridSpec& grid, int quad_nodes = 16);

/// Claim redistribution reconstructed from the stored node tables (node i of column m,
/// starting surplus index n).
ClaimRedistribution node_claim(const TransitionKernel& kernel, Index m, Index i, Index n);

/// Total one-step probability at column m: no event + claim + jump + switch.
double total_probability(const TransitionKernel& kernel, Index m);

/**
 * Discounted exit-value channel E[1{switch first} e^{-q tau} g(x_n + p tau, lambda_tau)]
 * for every node (row n1 is zero: no waiting there). g is read off its own grid.
 */
Eigen::MatrixXd switch_term(const TransitionKernel& kernel, const ValueSurface& g);

}  // namespace tipdiv
