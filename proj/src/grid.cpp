#include "tipdiv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tipdiv {

GridSpec make_grid(double premium, double x_max, Index x_points, double lambda_floor,
                   double lambda_max, Index lambda_points) {
  if (!(premium > 0.0)) throw std::invalid_argument("grid premium must be > 0");
  if (x_points < 2 || !(x_max > 0.0)) throw std::invalid_argument("x axis needs >= 2 points over (0, x_max]");
  if (lambda_points < 1) throw std::invalid_argument("lambda axis needs >= 1 point");
  if (lambda_points > 1 && !(lambda_max > lambda_floor))
    throw std::invalid_argument("lambda_max must exceed lambda_floor");
  GridSpec g;
  g.n1 = x_points - 1;
  g.m1 = lambda_points - 1;
  g.x_step = x_max / static_cast<double>(g.n1);
  g.delta = g.x_step / premium;
  g.lambda_floor = lambda_floor;
  g.lambda_step = g.m1 > 0 ? (lambda_max - lambda_floor) / static_cast<double>(g.m1) : 1.0;
  g.x_bar = x_max;
  return g;
}

Index sigma_up(const GridSpec& grid, double lam) {
  if (lam <= grid.lambda_floor || grid.m1 == 0) return 0;
  auto m = static_cast<Index>(std::ceil((lam - grid.lambda_floor) / grid.lambda_step));
  m = std::clamp<Index>(m, 0, grid.m1);
  while (m > 0 && grid.lambda(m - 1) >= lam) --m;
  while (m < grid.m1 && grid.lambda(m) < lam) ++m;
  return m;
}

std::optional<Index> rho_down(const GridSpec& grid, double x) {
  if (x < 0.0) return std::nullopt;
  if (x >= grid.x_max()) return grid.n1;
  auto n = static_cast<Index>(std::floor(x / grid.x_step));
  n = std::clamp<Index>(n, 0, grid.n1);
  while (n > 0 && grid.x(n) > x) --n;
  while (n < grid.n1 && grid.x(n + 1) <= x) ++n;
  return n;
}

ValueSurface identity_surface(const GridSpec& grid) {
  ValueSurface s{grid, Eigen::MatrixXd(grid.x_points(), grid.lambda_points())};
  for (Index n = 0; n <= grid.n1; ++n) s.values.row(n).setConstant(grid.x(n));
  return s;
}

double eval_surface(const ValueSurface& s, double x, Index m) {
  const GridSpec& g = s.grid;
  if (x >= g.x_max()) return s.values(g.n1, m) + (x - g.x_max());
  if (x <= 0.0) return s.values(0, m);
  auto n = std::clamp<Index>(static_cast<Index>(std::floor(x / g.x_step)), 0, g.n1 - 1);
  const double frac = std::clamp((x - g.x(n)) / g.x_step, 0.0, 1.0);
  return (1.0 - frac) * s.values(n, m) + frac * s.values(n + 1, m);
}

double compute_x_bar(const StateSpec& spec, const ValueSurface* g) {
  const double p = premium(spec);
  if (spec.switch_rate == 0.0) return p / spec.discount;
  if (g == nullptr) throw std::invalid_argument("compute_x_bar: switching regime needs g");
  const double x_hat = g->tail_start();
  // g is non-increasing in lambda, so the value at the baseline bounds every row.
  Index m = 0;
  while (m < g->grid.m1 && g->grid.lambda(m + 1) <= spec.lambda_floor) ++m;
  const double g_hat = g->values(g->grid.n1, m);
  return std::max((p + spec.switch_rate * (g_hat - x_hat)) / spec.discount, x_hat);
}

}  // namespace tipdiv
