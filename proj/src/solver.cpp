#include "tipdiv/solver.hpp"

#include <algorithm>
#include <chrono>

#include "tipdiv/parallel.hpp"

namespace tipdiv {

NonConvergence::NonConvergence(int state, long iterations, double residual)
    : std::runtime_error("value iteration for State " + std::to_string(state) +
                         " did not converge after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
      state(state),
      iterations(iterations),
      residual(residual) {}

double default_tolerance(const StateSpec& spec) {
  return 1e-9 * std::max(1.0, premium(spec) / spec.discount);
}

namespace {

double t0_linear(const TransitionKernel& kernel, const Eigen::MatrixXd& w, Index n, Index m) {
  const LambdaColumn& col = kernel.columns[static_cast<std::size_t>(m)];
  double value = col.no_event_weight * w(n + 1, col.end_dest);
  for (const ClaimBlock& block : col.claim_blocks)
    value += block.coef.head(n + 1).dot(w.col(block.dest).head(n + 1).reverse());
  value += col.crumb(n);
  value += w.row(n).dot(col.jump_coef.transpose()) + col.jump_dividend;
  return value;
}

}  // namespace

double apply_t0(const TransitionKernel& kernel, const ValueSurface& w,
                const Eigen::MatrixXd* exit_values, Index n, Index m) {
  if (n >= kernel.grid.n1) throw std::out_of_range("apply_t0: E0 is not available at n = n1");
  if (kernel.switch_rate > 0.0 && exit_values == nullptr)
    throw std::invalid_argument("apply_t0: switching regime needs exit values");
  double value = t0_linear(kernel, w.values, n, m);
  if (exit_values != nullptr) value += (*exit_values)(n, m);
  return value;
}

double apply_t0(const TransitionKernel& kernel, const ValueSurface& w, const ValueSurface* g,
                Index n, Index m) {
  if (kernel.switch_rate > 0.0) {
    if (g == nullptr) throw std::invalid_argument("apply_t0: switching regime needs g");
    const Eigen::MatrixXd exit = switch_term(kernel, *g);
    return apply_t0(kernel, w, &exit, n, m);
  }
  return apply_t0(kernel, w, static_cast<const Eigen::MatrixXd*>(nullptr), n, m);
}

double apply_t1(const ValueSurface& w, Index n, Index m) {
  if (n < 1) throw std::out_of_range("apply_t1: E1 needs positive surplus");
  return w.values(n - 1, m) + w.grid.x_step;
}

double apply_tf(const GridSpec& grid, Index n) { return grid.x(n); }

SweepResult bellman_sweep(const TransitionKernel& kernel, const ValueSurface& w,
                          const Eigen::MatrixXd* exit_values) {
  const GridSpec& g = kernel.grid;
  if (w.grid.n1 != g.n1 || w.grid.m1 != g.m1)
    throw std::invalid_argument("bellman_sweep: surface and kernel grids differ");
  if (kernel.switch_rate > 0.0 && exit_values == nullptr)
    throw std::invalid_argument("bellman_sweep: switching regime needs exit values");
  SweepResult out{ValueSurface{g, Eigen::MatrixXd(g.x_points(), g.lambda_points())},
                  PolicyMap{g, {}}};
  out.policy.codes.resize(g.x_points(), g.lambda_points());
  parallel_for(g.lambda_points(), [&](std::ptrdiff_t m) {
    for (Index n = 0; n <= g.n1; ++n) {
      double best = apply_tf(g, n);
      Action act = Action::EF;
      if (n >= 1) {
        const double v1 = w.values(n - 1, m) + g.x_step;
        if (v1 >= best) {
          best = v1;
          act = Action::E1;
        }
      }
      if (n < g.n1) {
        double v0 = t0_linear(kernel, w.values, n, m);
        if (exit_values != nullptr) v0 += (*exit_values)(n, m);
        if (v0 >= best) {
          best = v0;
          act = Action::E0;
        }
      }
      out.value.values(n, m) = best;
      out.policy.codes(n, m) = static_cast<std::uint8_t>(act);
    }
  });
  return out;
}

SolveReport value_iteration(const TransitionKernel& kernel, const Eigen::MatrixXd* exit_values,
                            const SolverOptions& options, int state_index) {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec& g = kernel.grid;
  const double tol = options.tol > 0.0
                         ? options.tol
                         : 1e-9 * std::max(1.0, kernel.premium / kernel.discount);
  const ValueSurface identity = identity_surface(g);

  SolveReport report;
  report.tol = tol;
  report.value = identity;
  Eigen::MatrixXd excess = Eigen::MatrixXd::Zero(g.x_points(), g.lambda_points());
  for (long it = 1; it <= options.max_iter; ++it) {
    SweepResult next = bellman_sweep(kernel, report.value, exit_values);
    Eigen::MatrixXd next_excess = next.value.values - identity.values;
    const Eigen::MatrixXd change = next_excess - excess;
    report.residual = change.cwiseAbs().maxCoeff();
    report.max_iterate_decrease = std::max(report.max_iterate_decrease, -change.minCoeff());
    report.value = std::move(next.value);
    report.policy = std::move(next.policy);
    report.iterations = it;
    excess = std::move(next_excess);
    if (report.residual < tol) break;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.residual >= tol) throw NonConvergence(state_index, report.iterations, report.residual);
  return report;
}

SolveReport solve_state(const StateSpec& spec, const GridSpec& grid, const ValueSurface* g,
                        const SolverOptions& options, int state_index) {
  const TransitionKernel kernel = build_kernel(spec, grid, options.quad_nodes);
  SolverOptions opts = options;
  if (opts.tol <= 0.0) opts.tol = default_tolerance(spec);
  if (spec.switch_rate > 0.0) {
    if (g == nullptr) throw std::invalid_argument("solve_state: switching regime needs g");
    const Eigen::MatrixXd exit = switch_term(kernel, *g);
    return value_iteration(kernel, &exit, opts, state_index);
  }
  return value_iteration(kernel, nullptr, opts, state_index);
}

std::vector<SolveReport> solve_chain(const TippingProblem& problem,
                                     const std::vector<GridSpec>& grids,
                                     const SolverOptions& options) {
  if (problem.states.empty()) throw std::invalid_argument("solve_chain: empty problem");
  if (grids.size() != problem.states.size())
    throw std::invalid_argument("solve_chain: need one grid per state");
  if (problem.states[0].switch_rate != 0.0)
    throw std::invalid_argument("solve_chain: State 0 must not switch");
  std::vector<SolveReport> reports;
  reports.reserve(problem.states.size());
  for (std::size_t m = 0; m < problem.states.size(); ++m) {
    const ValueSurface* g = m == 0 ? nullptr : &reports[m - 1].value;
    reports.push_back(solve_state(problem.states[m], grids[m], g, options, static_cast<int>(m)));
  }
  return reports;
}

std::vector<SolveReport> solve_chain_from(const TippingProblem& problem,
                                          const std::vector<GridSpec>& grids,
                                          const SolverOptions& options, int first,
                                          const ValueSurface& below) {
  if (first < 1 || first > problem.top())
    throw std::invalid_argument("solve_chain_from: first must be a pre-tipping state");
  if (grids.size() != problem.states.size())
    throw std::invalid_argument("solve_chain_from: need one grid per state");
  std::vector<SolveReport> reports;
  for (int m = first; m <= problem.top(); ++m) {
    const ValueSurface* g = reports.empty() ? &below : &reports.back().value;
    const auto k = static_cast<std::size_t>(m);
    reports.push_back(solve_state(problem.states[k], grids[k], g, options, m));
  }
  return reports;
}

RegionMap extract_regions(const PolicyMap& policy) {
  RegionMap out;
  const Index rows = policy.codes.rows();
  const Index cols = policy.codes.cols();
  out.action.resize(rows, cols);
  out.intervals.assign(static_cast<std::size_t>(cols), 0);
  for (Index m = 0; m < cols; ++m) {
    bool inside = false;
    for (Index n = 0; n < rows; ++n) {
      const bool act = policy.is_action(n, m);
      out.action(n, m) = act;
      if (act && !inside) ++out.intervals[static_cast<std::size_t>(m)];
      inside = act;
    }
  }
  return out;
}

PropertyReport check_properties(const SolveReport& report, double cap_tol) {
  const GridSpec& g = report.value.grid;
  const Eigen::MatrixXd& v = report.value.values;
  const double tol = report.tol;
  const double round = 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff());
  PropertyReport r;
  r.tol_mono = 10.0 * tol;
  r.cap_tol = cap_tol;
  r.converged = report.residual < tol;
  r.monotone_iterates = report.max_iterate_decrease <= round;

  Eigen::MatrixXd excess = v - identity_surface(g).values;
  r.min_excess = excess.minCoeff();
  r.max_excess = excess.maxCoeff();
  r.dominates_identity = r.min_excess >= -round;

  if (g.n1 >= 1) {
    const Eigen::MatrixXd diffs = v.bottomRows(g.n1) - v.topRows(g.n1);
    r.min_slope_gap = diffs.minCoeff() - g.x_step;
  }
  r.slope_at_least_one = r.min_slope_gap >= -(tol + round);

  if (g.m1 >= 1) {
    const Eigen::MatrixXd rises = v.rightCols(g.m1) - v.leftCols(g.m1);
    r.max_lambda_increase = rises.maxCoeff();
  }
  r.lambda_monotone = r.max_lambda_increase <= r.tol_mono;

  r.cap_excess = excess.col(g.m1).maxCoeff();
  // A single intensity column has no truncation in lambda.
  r.cap_adequate = g.m1 == 0 || r.cap_excess <= cap_tol;

  r.policy_admissible = true;
  for (Index m = 0; m <= g.m1; ++m) {
    if (report.policy(0, m) == Action::E1 || report.policy(g.n1, m) == Action::E0)
      r.policy_admissible = false;
  }
  return r;
}

}  // namespace tipdiv
