#include <catch_amalgamated.hpp>

#include <cmath>

#include "tipdiv/kernel.hpp"
#include "tipdiv/simulate.hpp"
#include "tipdiv/solver.hpp"

using namespace tipdiv;
using Catch::Matchers::WithinAbs;

namespace {

StateSpec example1_state(double beta, double xi) {
  StateSpec s;
  s.lambda_floor = 0.25;
  s.beta = beta;
  s.decay = 0.7;
  s.claim_dist = Distribution::exponential(10.0);
  s.jump_dist = Distribution::exponential(0.5);
  s.discount = 0.2;
  s.loading = 0.2;
  s.switch_rate = xi;
  return s;
}

TippingProblem example1_chain() {
  return {{example1_state(0.5, 0.0), example1_state(1.0 / 3, 1.0 / 3), example1_state(1.0 / 3, 1.0 / 3)}};
}

std::vector<GridSpec> chain_grids(const TippingProblem& p, Index nx, Index nl) {
  std::vector<GridSpec> out;
  for (const auto& s : p.states) out.push_back(make_grid(premium(s), 0.4, nx, s.lambda_floor, 5.0, nl));
  return out;
}

ValueSurface wavy(const GridSpec& g, double amp, double phase) {
  ValueSurface w = identity_surface(g);
  for (Index n = 0; n <= g.n1; ++n)
    for (Index m = 0; m <= g.m1; ++m) w.values(n, m) += amp * (1.5 + std::sin(0.37 * n + 0.21 * m + phase));
  return w;
}

double classical_error(Index nx) {
  StateSpec s = example1_state(0.0, 0.0);
  s.lambda_floor = 101.0 / 84;
  s.premium_override = 101.0 / 700;
  const GridSpec g = make_grid(premium(s), 0.4, nx, s.lambda_floor, s.lambda_floor, 1);
  const SolveReport r = solve_state(s, g, nullptr, {});
  double err = 0.0, scale = 0.0;
  for (Index n = 0; n <= g.n1; ++n) {
    const double exact = cl_closed_form(g.x(n), s.lambda_floor, premium(s), s.discount, s.claim_dist);
    err = std::max(err, std::abs(exact - r.value.values(n, 0)));
    scale = std::max(scale, exact);
  }
  return err / scale;
}

}  // namespace

TEST_CASE("dividend operators") {
  const GridSpec g = make_grid(0.2, 0.4, 10, 0.25, 1.0, 4);
  const ValueSurface w = wavy(g, 0.01, 0.0);
  CHECK(apply_t1(w, 3, 2) == w.values(2, 2) + g.x_step);
  CHECK_THROWS_AS(apply_t1(w, 0, 2), std::out_of_range);
  CHECK(apply_tf(g, 4) == g.x(4));
  const StateSpec s = example1_state(0.5, 0.0);
  const TransitionKernel k = build_kernel(s, make_grid(premium(s), 0.4, 10, 0.25, 1.0, 4));
  CHECK_THROWS_AS(apply_t0(k, w, static_cast<const ValueSurface*>(nullptr), g.n1, 0), std::out_of_range);
  const StateSpec sw = example1_state(1.0 / 3, 1.0 / 3);
  const TransitionKernel ks = build_kernel(sw, make_grid(premium(sw), 0.4, 10, 0.25, 1.0, 4));
  CHECK_THROWS_AS(apply_t0(ks, w, static_cast<const ValueSurface*>(nullptr), 0, 0), std::invalid_argument);
}

TEST_CASE("Bellman sweep is monotone in its argument") {
  const StateSpec s = example1_state(1.0 / 3, 1.0 / 3);
  const GridSpec g = make_grid(premium(s), 0.4, 30, 0.25, 5.0, 20);
  const TransitionKernel k = build_kernel(s, g);
  const Eigen::MatrixXd exit_values = switch_term(k, wavy(g, 0.02, 1.0));
  for (int trial = 0; trial < 5; ++trial) {
    const ValueSurface lo = wavy(g, 0.02, trial);
    ValueSurface hi = lo;
    hi.values += wavy(g, 0.01, 2.0 * trial).values - identity_surface(g).values;
    const Eigen::MatrixXd a = bellman_sweep(k, lo, &exit_values).value.values;
    const Eigen::MatrixXd b = bellman_sweep(k, hi, &exit_values).value.values;
    CHECK((b - a).minCoeff() >= -1e-15);
  }
}

TEST_CASE("ties resolve towards waiting, then paying a step") {
  const StateSpec s = example1_state(0.5, 0.0);
  const GridSpec g = make_grid(premium(s), 0.4, 10, 0.25, 1.0, 4);
  const TransitionKernel k = build_kernel(s, g);
  // From the identity, E1 and EF both give x_n at n = n1.
  const SweepResult r = bellman_sweep(k, identity_surface(g), nullptr);
  for (Index m = 0; m <= g.m1; ++m) CHECK(r.policy(g.n1, m) == Action::E1);
}

TEST_CASE("value iteration converges monotonically to an admissible fixed point") {
  const TippingProblem p = example1_chain();
  const auto grids = chain_grids(p, 30, 20);
  const auto reports = solve_chain(p, grids, {});
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) {
    CHECK(r.residual < r.tol);
    const PropertyReport props = check_properties(r, 1.0);
    CHECK(props.converged);
    CHECK(props.monotone_iterates);
    CHECK(props.dominates_identity);
    CHECK(props.slope_at_least_one);
    CHECK(props.lambda_monotone);
    CHECK(props.policy_admissible);
  }
}

TEST_CASE("exhausted iteration budget raises NonConvergence") {
  const StateSpec s = example1_state(0.5, 0.0);
  const GridSpec g = make_grid(premium(s), 0.4, 20, 0.25, 5.0, 10);
  SolverOptions opts;
  opts.max_iter = 3;
  CHECK_THROWS_AS(solve_state(s, g, nullptr, opts, 0), NonConvergence);
}

TEST_CASE("classical scheme approaches the closed-form de Finetti value") {
  const double coarse = classical_error(60);
  const double fine = classical_error(119);
  CHECK(coarse <= 0.02);
  CHECK(fine < coarse);
}

TEST_CASE("resuming a chain reproduces the full solve exactly") {
  const TippingProblem p = example1_chain();
  const auto grids = chain_grids(p, 25, 15);
  const auto full = solve_chain(p, grids, {});
  const auto tail = solve_chain_from(p, grids, {}, 1, full[0].value);
  REQUIRE(tail.size() == 2);
  CHECK(tail[0].value.values == full[1].value.values);
  CHECK(tail[1].value.values == full[2].value.values);
  CHECK(tail[1].policy.codes == full[2].policy.codes);
}

TEST_CASE("region extraction counts action runs per intensity") {
  const GridSpec g = make_grid(0.2, 0.4, 6, 0.25, 1.0, 2);
  PolicyMap pol{g, {}};
  pol.codes.setZero(6, 2);
  pol.codes(5, 0) = 2;
  pol.codes(1, 1) = 1;
  pol.codes(2, 1) = 1;
  pol.codes(4, 1) = 1;
  pol.codes(5, 1) = 1;
  const RegionMap r = extract_regions(pol);
  CHECK(r.intervals == std::vector<int>{1, 2});
  CHECK(r.action(5, 0));
  CHECK_FALSE(r.action(3, 1));
}
