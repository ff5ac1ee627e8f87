#include <catch_amalgamated.hpp>

#include <cmath>

#include "tipdiv/kernel.hpp"
#include "tipdiv/simulate.hpp"
#include "tipdiv/solver.hpp"

using namespace tipdiv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StateSpec example1_pre() {
  StateSpec s;
  s.lambda_floor = 0.25;
  s.beta = 1.0 / 3;
  s.decay = 0.7;
  s.claim_dist = Distribution::exponential(10.0);
  s.jump_dist = Distribution::exponential(0.5);
  s.discount = 0.2;
  s.loading = 0.2;
  s.switch_rate = 1.0 / 3;
  return s;
}

StateSpec example2_post() {
  StateSpec s;
  s.lambda_floor = 10.0;
  s.beta = 0.2;
  s.decay = 0.2;
  s.claim_dist = Distribution::erlang(2, 1.0);
  s.jump_dist = Distribution::exponential(0.5);
  s.discount = 0.1;
  s.loading = 0.07;
  return s;
}

GridSpec grid_for(const StateSpec& s, double x_max, Index nx, double lam_max, Index nl) {
  return make_grid(premium(s), x_max, nx, s.lambda_floor, lam_max, nl);
}

}  // namespace

TEST_CASE("decayed intensity solves the relaxation ODE") {
  // RK4 on (lambda, Lambda)' = (-d (lambda - floor), lambda).
  const double floor = 0.25, d = 0.7, lam0 = 4.0;
  double lam = lam0, hazard = 0.0;
  const int steps = 4000;
  const double h = 2.0 / steps;
  const auto f = [&](double l) { return -d * (l - floor); };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(lam), k2 = f(lam + 0.5 * h * k1), k3 = f(lam + 0.5 * h * k2), k4 = f(lam + h * k3);
    hazard += h * (lam + 2 * (lam + 0.5 * h * k1) + 2 * (lam + 0.5 * h * k2) + (lam + h * k3)) / 6.0;
    lam += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  CHECK_THAT(decayed_intensity(floor, lam0, d, 2.0), WithinAbs(lam, 1e-12));
  CHECK_THAT(cumulative_hazard(floor, lam0, d, 2.0), WithinAbs(hazard, 1e-12));
  CHECK(cumulative_hazard(floor, lam0, d, 0.0) == 0.0);
  CHECK_THAT(cumulative_hazard(1.0, 1.0, d, 3.0), WithinRel(3.0, 1e-15));
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {4, 8, 16, 32}) {
    const QuadratureRule r = gauss_legendre(n);
    CHECK_THAT(r.weights.sum(), WithinAbs(2.0, 1e-14));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights(i) * std::pow(r.nodes(i), deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK_THAT(s, WithinAbs(exact, 1e-13));
    }
  }
}

TEST_CASE("claim redistribution matches snapped Monte Carlo claims") {
  const GridSpec g = make_grid(0.2, 0.4, 30, 0.25, 5.0, 10);
  const std::vector<Distribution> laws{Distribution::exponential(10.0), Distribution::erlang(2, 20.0),
                                       Distribution::deterministic(0.1),
                                       Distribution::truncated_exponential(10.0, 0.1)};
  for (const auto& law : laws) {
    for (double y : {0.0, 0.123, 0.31, 0.45}) {
      const ClaimRedistribution c = claim_redistribution(g, law, y);
      CHECK_THAT(c.mass.sum() + c.ruin, WithinAbs(1.0, 1e-13));
      StreamRng rng(5, 9);
      const int n = 200000;
      Eigen::VectorXd hits = Eigen::VectorXd::Zero(c.mass.size());
      double ruined = 0.0, crumb = 0.0, crumb_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double z = y - law.sample(rng);
        const auto dest = rho_down(g, z);
        if (!dest) {
          ruined += 1.0;
          continue;
        }
        hits(*dest) += 1.0;
        crumb += z - g.x(*dest);
        crumb_sq += (z - g.x(*dest)) * (z - g.x(*dest));
      }
      CHECK(std::abs(ruined / n - c.ruin) <= 5.0 * std::sqrt(c.ruin * (1 - c.ruin) / n) + 1e-12);
      for (Index j = 0; j < c.mass.size(); ++j) {
        const double p = c.mass(j);
        CHECK(std::abs(hits(j) / n - p) <= 5.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
      }
      const double mean = crumb / n;
      const double se = std::sqrt(std::max(0.0, crumb_sq / n - mean * mean) / n);
      CHECK(std::abs(mean - c.crumb) <= 5.0 * se + 1e-12);
    }
  }
}

TEST_CASE("jump redistribution matches snapped Monte Carlo jumps") {
  const GridSpec g = make_grid(0.2, 0.4, 30, 0.25, 5.0, 20);
  const Distribution jump = Distribution::exponential(0.5);
  for (double lam_c : {0.25, 1.3, 4.9}) {
    const Eigen::VectorXd mass = jump_redistribution(g, jump, lam_c);
    CHECK_THAT(mass.sum(), WithinAbs(1.0, 1e-14));
    StreamRng rng(6, 1);
    const int n = 200000;
    Eigen::VectorXd hits = Eigen::VectorXd::Zero(mass.size());
    for (int i = 0; i < n; ++i) hits(sigma_up(g, lam_c + jump.sample(rng))) += 1.0;
    for (Index j = 0; j < mass.size(); ++j)
      CHECK(std::abs(hits(j) / n - mass(j)) <= 5.0 * std::sqrt(mass(j) * (1 - mass(j)) / n) + 1e-12);
  }
  const GridSpec flat = make_grid(0.2, 0.4, 30, 1.0, 1.0, 1);
  CHECK(jump_redistribution(flat, jump, 1.0)(0) == 1.0);
}

TEST_CASE("one-step probabilities sum to one") {
  for (const StateSpec& s : {example1_pre(), example2_post()}) {
    const GridSpec g = s.lambda_floor < 1 ? grid_for(s, 0.4, 60, 5.0, 60) : grid_for(s, 35.0, 60, 30.0, 60);
    const TransitionKernel k = build_kernel(s, g);
    for (Index m = 0; m <= g.m1; ++m) CHECK_THAT(total_probability(k, m), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("no-event weight has the closed form") {
  const StateSpec s = example1_pre();
  const GridSpec g = grid_for(s, 0.4, 60, 5.0, 60);
  const TransitionKernel k = build_kernel(s, g);
  for (Index m : {0, 17, 59}) {
    const double lam = g.lambda(m);
    const double hazard = s.lambda_floor * g.delta + (lam - s.lambda_floor) * (1 - std::exp(-s.decay * g.delta)) / s.decay;
    const double expected = std::exp(-hazard - (s.beta + s.switch_rate + s.discount) * g.delta);
    const LambdaColumn& col = k.columns[static_cast<std::size_t>(m)];
    CHECK_THAT(col.no_event_weight, WithinRel(expected, 1e-13));
    CHECK(col.end_dest == sigma_up(g, s.lambda_floor + std::exp(-s.decay * g.delta) * (lam - s.lambda_floor)));
  }
}

TEST_CASE("doubling the quadrature nodes changes T0 by less than 1e-8") {
  for (const StateSpec& s : {example1_pre(), example2_post()}) {
    const bool small = s.lambda_floor < 1;
    const GridSpec g = small ? grid_for(s, 0.4, 40, 5.0, 30) : grid_for(s, 35.0, 40, 30.0, 30);
    ValueSurface w = identity_surface(g);
    for (Index n = 0; n <= g.n1; ++n)
      for (Index m = 0; m <= g.m1; ++m) w.values(n, m) += 0.3 * g.x_max() / (1.0 + 0.1 * m) * std::sin(0.2 * n + 1.0);
    ValueSurface exit_surface = w;
    exit_surface.values.array() += 0.01;
    const TransitionKernel a = build_kernel(s, g, 16);
    const TransitionKernel b = build_kernel(s, g, 32);
    const ValueSurface* gp = s.switch_rate > 0 ? &exit_surface : nullptr;
    double worst = 0.0;
    for (Index n = 0; n < g.n1; n += 3)
      for (Index m = 0; m <= g.m1; m += 3)
        worst = std::max(worst, std::abs(apply_t0(a, w, gp, n, m) - apply_t0(b, w, gp, n, m)));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("T0 agrees with the one-step Monte Carlo oracle") {
  const StateSpec s = example1_pre();
  const GridSpec g = grid_for(s, 0.4, 60, 5.0, 60);
  ValueSurface w = identity_surface(g);
  for (Index n = 0; n <= g.n1; ++n)
    for (Index m = 0; m <= g.m1; ++m) w.values(n, m) += 0.05 * (1 + std::cos(0.3 * n) * std::sin(0.2 * m));
  ValueSurface exit_surface = w;
  exit_surface.values.array() += 0.01;
  const TransitionKernel k = build_kernel(s, g);
  for (const auto& [n, m] : {std::pair<Index, Index>{0, 0}, {5, 10}, {30, 40}, {58, 59}}) {
    const double v = apply_t0(k, w, &exit_surface, n, m);
    const OracleEstimate o = one_step_oracle(s, g, n, m, w, &exit_surface, 200000, 11);
    CHECK(std::abs(v - o.mean) <= 4.0 * o.std_error);
  }
}

TEST_CASE("switch term vanishes on the top surplus row") {
  const StateSpec s = example1_pre();
  const GridSpec g = grid_for(s, 0.4, 20, 5.0, 10);
  const TransitionKernel k = build_kernel(s, g);
  const Eigen::MatrixXd e = switch_term(k, identity_surface(g));
  CHECK(e.row(g.n1).isZero());
  CHECK((e.topRows(g.n1).array() > 0.0).all());
}

TEST_CASE("build_kernel rejects inconsistent grids") {
  const StateSpec s = example1_pre();
  const GridSpec g = grid_for(s, 0.4, 20, 5.0, 10);
  CHECK_THROWS_AS(build_kernel(s, g, 3), std::invalid_argument);
  GridSpec off = g;
  off.delta *= 1.01;
  CHECK_THROWS_AS(build_kernel(s, off), std::invalid_argument);
  GridSpec shifted = g;
  shifted.lambda_floor = 0.3;
  CHECK_THROWS_AS(build_kernel(s, shifted), std::invalid_argument);
}
