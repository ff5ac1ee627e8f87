#pragma once

#include <Eigen/Core>
#include <optional>

#include "tipdiv/model.hpp"

namespace tipdiv {

using Index = Eigen::Index;

/**
 * Uniform surplus/intensity grid: x_n = n * x_step for n in [0, n1] and
 * lambda_m = lambda_floor + m * lambda_step for m in [0, m1].
 *
 * The surplus step equals premium * delta, so one no-event time step moves
 * the surplus by exactly one cell.
 */
struct GridSpec {
  double delta = 0.0;
  double x_step = 0.0;
  double lambda_step = 1.0;
  double lambda_floor = 0.0;
  double x_bar = 0.0;  ///< truncation bound recorded for diagnostics
  Index n1 = 0;
  Index m1 = 0;

  double x(Index n) const { return static_cast<double>(n) * x_step; }
  double lambda(Index m) const { return lambda_floor + static_cast<double>(m) * lambda_step; }
  double x_max() const { return x(n1); }
  double lambda_max() const { return lambda(m1); }
  double premium() const { return x_step / delta; }
  Index x_points() const { return n1 + 1; }
  Index lambda_points() const { return m1 + 1; }

  bool operator==(const GridSpec&) const = default;
};

/// Grid with `x_points` nodes over [0, x_max] and `lambda_points` nodes over
/// [lambda_floor, lambda_max]; delta is x_step / premium.
GridSpec make_grid(double premium, double x_max, Index x_points, double lambda_floor,
                   double lambda_max, Index lambda_points);

/// Smallest grid index with lambda_m >= lam, capped at m1. Intensities below the
/// floor map to index 0 (used when a regime is entered from a different axis).
Index sigma_up(const GridSpec& grid, double lam);

/// Largest grid index with x_n <= x, capped at n1; empty when x < 0 (ruin).
std::optional<Index> rho_down(const GridSpec& grid, double x);

/// Value function on a grid. Off-grid surplus is interpolated linearly; beyond
/// x_{n1} the value grows with slope one.
struct ValueSurface {
  GridSpec grid;
  Eigen::MatrixXd values;  ///< (n1 + 1) x (m1 + 1)

  double operator()(Index n, Index m) const { return values(n, m); }
  double tail_start() const { return grid.x_max(); }
};

/// Initial iterate W(x_n, lambda_m) = x_n.
ValueSurface identity_surface(const GridSpec& grid);

double eval_surface(const ValueSurface& s, double x, Index m);

/// Explicit surplus level above which paying the excess is optimal.
/// Without switching this is p / q; otherwise g's tail start and its value at
/// the regime's baseline intensity enter.
double compute_x_bar(const StateSpec& spec, const ValueSurface* g);

}  // namespace tipdiv
