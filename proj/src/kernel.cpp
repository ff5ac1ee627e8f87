#include "tipdiv/kernel.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include "tipdiv/parallel.hpp"

namespace tipdiv {

QuadratureRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre needs >= 1 point");
  QuadratureRule rule{Eigen::VectorXd(points), Eigen::VectorXd(points)};
  for (int i = 0; i < points; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (points == 1) p0 = 1.0;
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

ClaimRedistribution claim_redistribution(const GridSpec& grid, const Distribution& claim, double y) {
  if (y < 0.0) throw std::invalid_argument("claim_redistribution: pre-claim surplus must be >= 0");
  const Index top = *rho_down(grid, y);
  ClaimRedistribution out;
  out.mass.setZero(top + 1);
  out.ruin = 1.0 - claim.cdf(y);
  for (Index j = 0; j <= top; ++j) {
    const double upper = y - grid.x(j);
    // The top cell also absorbs any surplus above the grid.
    const double lower = j == top ? -1.0 : y - grid.x(j + 1);
    const double mass = claim.cdf(upper) - claim.cdf(lower);
    out.mass(j) = mass;
    out.crumb += std::max(0.0, upper * mass - claim.partial_mean(lower, upper));
  }
  return out;
}

Eigen::VectorXd jump_redistribution(const GridSpec& grid, const Distribution& jump, double lam_c) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(grid.lambda_points());
  if (grid.m1 == 0) {
    mass(0) = 1.0;
    return mass;
  }
  double below = 0.0;
  for (Index j = 0; j < grid.m1; ++j) {
    const double here = jump.cdf(grid.lambda(j) - lam_c);
    mass(j) = here - below;
    below = here;
  }
  mass(grid.m1) = 1.0 - below;
  return mass;
}

namespace {

// Time at which the decayed intensity from lam reaches level, if inside (0, delta).
void add_crossing(std::vector<double>& breaks, double floor, double lam, double decay,
                  double delta, double level) {
  if (!(level > floor && level < lam)) return;
  const double t = std::log((lam - floor) / (level - floor)) / decay;
  if (t > 0.0 && t < delta) breaks.push_back(t);
}

std::vector<double> finalize_breaks(std::vector<double> breaks, double delta) {
  breaks.push_back(0.0);
  breaks.push_back(delta);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> out;
  for (double b : breaks) {
    if (out.empty() || b - out.back() > 1e-13 * delta) out.push_back(b);
  }
  out.back() = delta;
  return out;
}

LambdaColumn build_column(const TransitionKernel& k, const QuadratureRule& rule, Index m) {
  const GridSpec& g = k.grid;
  const double lam_m = g.lambda(m);
  const double delta = g.delta;
  const Index n1 = g.n1;

  std::vector<double> breaks;
  for (Index j = 0; j < m; ++j) add_crossing(breaks, k.lambda_floor, lam_m, k.decay, delta, g.lambda(j));
  for (double atom : k.jump.atoms()) {
    for (Index j = 0; j <= g.m1; ++j)
      add_crossing(breaks, k.lambda_floor, lam_m, k.decay, delta, g.lambda(j) - atom);
  }
  for (double atom : k.claim.atoms()) {
    const double cells = atom / g.x_step;
    const double t = (cells - std::floor(cells)) * delta;
    if (t > 0.0 && t < delta) breaks.push_back(t);
  }

  LambdaColumn col;
  col.breaks = finalize_breaks(std::move(breaks), delta);
  const Index panels = static_cast<Index>(col.breaks.size()) - 1;
  const Index q = rule.nodes.size();
  const Index nodes = panels * q;

  col.t.resize(nodes);
  col.weight.resize(nodes);
  col.intensity.resize(nodes);
  col.survival.resize(nodes);
  col.dest.resize(nodes);
  col.node_cdf.resize(nodes, n1 + 1);
  col.node_tmean.resize(nodes, n1 + 1);
  col.crumb = Eigen::VectorXd::Zero(n1);
  col.jump_coef = Eigen::VectorXd::Zero(g.lambda_points());

  const double hazard = k.beta + k.switch_rate;
  Eigen::VectorXd cum_crumb(n1 + 1);
  for (Index p = 0; p < panels; ++p) {
    const double a = col.breaks[p];
    const double b = col.breaks[p + 1];
    const double half = 0.5 * (b - a);
    const Index dest = sigma_up(g, decayed_intensity(k.lambda_floor, lam_m, k.decay, 0.5 * (a + b)));
    auto block = std::find_if(col.claim_blocks.begin(), col.claim_blocks.end(),
                              [dest](const ClaimBlock& cb) { return cb.dest == dest; });
    if (block == col.claim_blocks.end()) {
      col.claim_blocks.push_back({dest, Eigen::VectorXd::Zero(n1)});
      block = std::prev(col.claim_blocks.end());
    }
    for (Index r = 0; r < q; ++r) {
      const Index i = p * q + r;
      const double t = a + half * (rule.nodes(r) + 1.0);
      const double w = half * rule.weights(r);
      const double lam_t = decayed_intensity(k.lambda_floor, lam_m, k.decay, t);
      const double surv =
          std::exp(-cumulative_hazard(k.lambda_floor, lam_m, k.decay, t) - hazard * t);
      const double disc = std::exp(-k.discount * t);
      col.t(i) = t;
      col.weight(i) = w;
      col.intensity(i) = lam_t;
      col.survival(i) = surv;
      col.dest(i) = static_cast<int>(dest);

      const double claim_w = w * lam_t * surv * disc;
      double f_prev = 0.0, m_prev = 0.0, acc = 0.0;
      for (Index kk = 0; kk <= n1; ++kk) {
        const double level = static_cast<double>(kk) * g.x_step + k.premium * t;
        const double f = k.claim.cdf(level);
        const double tm = k.claim.truncated_mean(level);
        col.node_cdf(i, kk) = f;
        col.node_tmean(i, kk) = tm;
        if (kk < n1) block->coef(kk) += claim_w * (f - f_prev);
        acc += std::max(0.0, level * (f - f_prev) - (tm - m_prev));
        cum_crumb(kk) = acc;
        f_prev = f;
        m_prev = tm;
      }
      col.crumb += claim_w * cum_crumb.head(n1);

      const double jump_w = w * k.beta * surv * disc;
      if (jump_w > 0.0) {
        col.jump_coef += jump_w * jump_redistribution(g, k.jump, lam_t);
        col.jump_dividend += jump_w * k.premium * t;
      }
      col.claim_prob += w * lam_t * surv;
      col.jump_prob += w * k.beta * surv;
      col.switch_prob += w * k.switch_rate * surv;
    }
  }
  col.end_survival =
      std::exp(-cumulative_hazard(k.lambda_floor, lam_m, k.decay, delta) - hazard * delta);
  col.end_dest = sigma_up(g, decayed_intensity(k.lambda_floor, lam_m, k.decay, delta));
  col.no_event_weight = col.end_survival * std::exp(-k.discount * delta);
  return col;
}

}  // namespace

TransitionKernel build_kernel(const StateSpec& spec, const GridSpec& grid, int quad_nodes) {
  validate(spec);
  if (quad_nodes < 4) throw std::invalid_argument("build_kernel: quad_nodes must be >= 4");
  const double p = premium(spec);
  if (std::abs(grid.x_step - p * grid.delta) > 1e-12 * grid.x_step)
    throw std::invalid_argument("build_kernel: grid x_step must equal premium * delta");
  if (std::abs(grid.lambda_floor - spec.lambda_floor) > 1e-12 * spec.lambda_floor)
    throw std::invalid_argument("build_kernel: grid lambda axis must start at lambda_floor");
  if (grid.n1 < 1) throw std::invalid_argument("build_kernel: grid needs at least two x nodes");

  TransitionKernel k;
  k.grid = grid;
  k.premium = p;
  k.discount = spec.discount;
  k.beta = spec.beta;
  k.switch_rate = spec.switch_rate;
  k.lambda_floor = spec.lambda_floor;
  k.decay = spec.decay;
  k.quad_nodes = quad_nodes;
  k.claim = spec.claim_dist;
  k.jump = spec.jump_dist;
  k.columns.resize(static_cast<std::size_t>(grid.lambda_points()));
  const QuadratureRule rule = gauss_legendre(quad_nodes);
  parallel_for(grid.lambda_points(), [&](std::ptrdiff_t m) {
    k.columns[static_cast<std::size_t>(m)] = build_column(k, rule, m);
  });
  return k;
}

ClaimRedistribution node_claim(const TransitionKernel& kernel, Index m, Index i, Index n) {
  const LambdaColumn& col = kernel.columns.at(static_cast<std::size_t>(m));
  ClaimRedistribution out;
  out.mass.setZero(n + 1);
  double f_prev = 0.0, m_prev = 0.0;
  for (Index kk = 0; kk <= n; ++kk) {
    const double f = col.node_cdf(i, kk);
    const double tm = col.node_tmean(i, kk);
    const double level = static_cast<double>(kk) * kernel.grid.x_step + kernel.premium * col.t(i);
    out.mass(n - kk) = f - f_prev;
    out.crumb += std::max(0.0, level * (f - f_prev) - (tm - m_prev));
    f_prev = f;
    m_prev = tm;
  }
  out.ruin = 1.0 - f_prev;
  return out;
}

double total_probability(const TransitionKernel& kernel, Index m) {
  const LambdaColumn& col = kernel.columns.at(static_cast<std::size_t>(m));
  return col.end_survival + col.claim_prob + col.jump_prob + col.switch_prob;
}

Eigen::MatrixXd switch_term(const TransitionKernel& k, const ValueSurface& g) {
  const GridSpec& grid = k.grid;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grid.x_points(), grid.lambda_points());
  if (k.switch_rate == 0.0) return out;
  const QuadratureRule rule = gauss_legendre(k.quad_nodes);
  const double delta = grid.delta;
  parallel_for(grid.lambda_points(), [&](std::ptrdiff_t m) {
    const double lam_m = grid.lambda(m);
    std::vector<double> lambda_breaks;
    for (Index j = 0; j <= g.grid.m1; ++j)
      add_crossing(lambda_breaks, k.lambda_floor, lam_m, k.decay, delta, g.grid.lambda(j));
    for (Index n = 0; n < grid.n1; ++n) {
      const double x_n = grid.x(n);
      std::vector<double> breaks = lambda_breaks;
      // Kinks of the piecewise-linear g in x along the path x_n + p t.
      const double first = std::ceil(x_n / g.grid.x_step);
      for (double j = std::max(first, 0.0); j <= static_cast<double>(g.grid.n1); j += 1.0) {
        const double t = (j * g.grid.x_step - x_n) / k.premium;
        if (t >= delta) break;
        if (t > 0.0) breaks.push_back(t);
      }
      breaks = finalize_breaks(std::move(breaks), delta);
      double total = 0.0;
      for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p];
        const double half = 0.5 * (breaks[p + 1] - a);
        const Index dest = sigma_up(g.grid, decayed_intensity(k.lambda_floor, lam_m, k.decay,
                                                              0.5 * (a + breaks[p + 1])));
        for (Index r = 0; r < rule.nodes.size(); ++r) {
          const double t = a + half * (rule.nodes(r) + 1.0);
          const double surv = std::exp(-cumulative_hazard(k.lambda_floor, lam_m, k.decay, t) -
                                       (k.beta + k.switch_rate) * t);
          total += half * rule.weights(r) * k.switch_rate * surv * std::exp(-k.discount * t) *
                   eval_surface(g, x_n + k.premium * t, dest);
        }
      }
      out(n, m) = total;
    }
  });
  return out;
}

}  // namespace tipdiv
