// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tipdiv/config.hpp"
#include "tipdiv/experiment.hpp"
#include "tipdiv/parallel.hpp"
#include "tipdiv/simulate.hpp"

using namespace tipdiv;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail, double seconds) {
  std::printf("%s  criterion %2d  %-34s %s  [%.1f s]\n", pass ? "PASS" : "FAIL", id, title.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Rows and columns of the value part of a grid-matrix CSV (header and x column excluded).
std::pair<long, long> csv_shape(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  long rows = -1, cols = 0;
  while (std::getline(in, line)) {
    if (rows < 0) cols = static_cast<long>(std::count(line.begin(), line.end(), ','));
    ++rows;
  }
  return {rows, cols};
}

/// Checks whose name starts with `prefix`; all of them must pass and at least one must exist.
bool all_with_prefix(const RunResult& r, const std::string& prefix, int* count = nullptr,
                     std::string* failed = nullptr) {
  int n = 0;
  bool ok = true;
  for (const auto& c : r.checks) {
    if (c.name.rfind(prefix, 0) != 0) continue;
    ++n;
    if (!c.pass) {
      ok = false;
      if (failed) *failed += " " + c.name;
    }
  }
  if (count) *count += n;
  return ok && n > 0;
}

double classical_sup_error(Index x_points, double lambda) {
  StateSpec s;
  s.lambda_floor = lambda;
  s.beta = 0.0;
  s.decay = 0.7;
  s.claim_dist = Distribution::exponential(10.0);
  s.discount = 0.2;
  s.loading = 0.2;
  s.premium_override = 101.0 / 700;
  const GridSpec g = make_grid(premium(s), 0.4, x_points, lambda, lambda, 1);
  const SolveReport r = solve_state(s, g, nullptr, {});
  double err = 0.0, scale = 0.0;
  for (Index n = 0; n <= g.n1; ++n) {
    const double exact = cl_closed_form(g.x(n), lambda, premium(s), s.discount, s.claim_dist);
    err = std::max(err, std::abs(exact - r.value.values(n, 0)));
    scale = std::max(scale, std::abs(exact));
  }
  return err / scale;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path base = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(base);
  fs::create_directories(base);
  const auto t_all = std::chrono::steady_clock::now();

  // 1. Premium calibration.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const double e = std::exp(1.0);
    const std::vector<std::tuple<std::string, int, double>> expected{
        {"example1", 2, 101.0 / 700}, {"example1", 0, 141.0 / 700}, {"example2", 2, 749.0 / 30},
        {"example2", 0, 642.0 / 25},  {"example3", 1, 101.0 / 700}, {"example3", 0, 141.0 / 700},
        {"example4", 1, 101.0 * (e - 1.0) / (700.0 * e)},           {"example4", 0, 141.0 / 700}};
    double worst = 0.0;
    for (const auto& [name, state, value] : expected) {
      const ExperimentConfig cfg = resolve_config(name);
      const double p = premium(cfg.problem.states[static_cast<std::size_t>(state)]);
      worst = std::max(worst, std::abs(p - value) / value);
    }
    report(1, "premium calibration", worst <= 1e-12, fmt("max relative error %.2e (limit 1e-12)", worst), elapsed(t0));
  }

  // Full runs of the four examples with both comparisons and Monte Carlo validation.
  std::map<std::string, RunResult> runs;
  std::map<std::string, double> run_seconds;
  bool solved = true;
  std::string solve_error;
  for (const std::string name : {"example1", "example2", "example3", "example4"}) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOptions opt;
    opt.out_dir = (base / name).string();
    opt.compare_classical = true;
    opt.no_tipping = true;
    opt.check = true;
    try {
      runs.emplace(name, run_experiment(resolve_config(name), opt));
    } catch (const std::exception& ex) {
      solved = false;
      solve_error += name + ": " + ex.what() + "; ";
    }
    run_seconds[name] = elapsed(t0);
    std::printf("----  %s finished in %.1f s\n", name.c_str(), run_seconds[name]);
  }
  if (!solved) {
    std::printf("FAIL  solver error: %s\n", solve_error.c_str());
    return 1;
  }

  // 2. Kernel validity.
  {
    long points = 0, bad = 0;
    double worst = 0.0;
    for (const auto& [name, r] : runs) {
      for (const auto& k : r.kernel_checks) {
        ++points;
        bad += k.pass ? 0 : 1;
        worst = std::max(worst, std::abs(k.kernel - k.oracle.mean) / k.oracle.std_error);
      }
    }
    report(2, "kernel vs one-step Monte Carlo", points == 200 && bad == 0,
           fmt("%.0f points, %.0f outside 4 SE, worst |z| %.2f", static_cast<double>(points),
               static_cast<double>(bad), worst),
           0.0);
  }

  // 3. Classical oracle.
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (const double lambda : {101.0 / 84, 0.25}) {
      const double e60 = classical_sup_error(60, lambda);
      const double e119 = classical_sup_error(119, lambda);
      const double e237 = classical_sup_error(237, lambda);
      ok = ok && e60 <= 0.02 && e119 < e60 && e237 < e119;
      detail += fmt("lambda %.3f: %.2e > %.2e", lambda, e60, e119) + fmt(" > %.2e; ", e237);
    }
    report(3, "classical closed-form oracle", ok, detail, elapsed(t0));
  }

  // 4. Fixed-point and monotonicity properties of every solve.
  {
    bool ok = true;
    int solves = 0;
    std::string failed;
    for (const auto& [name, r] : runs) ok = all_with_prefix(r, "properties_", &solves, &failed) && ok;
    report(4, "fixed-point and monotonicity", ok,
           fmt("%.0f solves checked", solves) + (failed.empty() ? "" : ", failing:" + failed), 0.0);
  }

  // 5. Example 1 structure.
  {
    const RunResult& r = runs.at("example1");
    std::string failed;
    const bool barrier = all_with_prefix(r, "barrier_rows_", nullptr, &failed);
    const bool ordered = all_with_prefix(r, "ordered_state1_over_state2", nullptr, &failed);
    const bool nt = all_with_prefix(r, "no_tipping_dominated_state1", nullptr, &failed) &&
                    all_with_prefix(r, "no_tipping_dominated_state2", nullptr, &failed);
    const double dv = r.find("ordered_state1_over_state2")->value;
    const double d1 = r.find("no_tipping_dominated_state1")->value;
    const double d2 = r.find("no_tipping_dominated_state2")->value;
    report(5, "example 1 structure", barrier && ordered && nt && run_seconds.at("example1") <= 300.0,
           fmt("min(V1-V2) %.2e, min(V1-VNT) %.2e, min(V2-VNT) %.2e", dv, d1, d2) +
               (failed.empty() ? "" : ", failing:" + failed),
           run_seconds.at("example1"));
  }

  // 6. Example 2 structure.
  {
    const RunResult& r = runs.at("example2");
    std::string failed;
    const bool bands = all_with_prefix(r, "two_band_row_", nullptr, &failed);
    const bool top = all_with_prefix(r, "top_row_action_", nullptr, &failed);
    std::string rows;
    for (int m = 0; m <= 2; ++m)
      rows += fmt("%.0f ", r.find("two_band_row_state" + std::to_string(m))->value);
    report(6, "example 2 structure", bands && top && run_seconds.at("example2") <= 300.0,
           "two-band rows per state: " + rows + (failed.empty() ? "" : ", failing:" + failed),
           run_seconds.at("example2"));
  }

  // 7. Example 3/4 region maps on the prescribed grids; kink on the Example 4 slice.
  {
    bool shapes = true;
    for (const auto& [name, states, rows, cols] :
         {std::tuple{"example3", 2, 80L, 80L}, std::tuple{"example4", 2, 80L, 110L}}) {
      for (int m = 0; m < states; ++m) {
        const auto [r, c] = csv_shape(base / name / ("region_state" + std::to_string(m) + ".csv"));
        shapes = shapes && r == rows && c == cols;
      }
    }
    const CheckResult* kink = runs.at("example4").find("slice_kink");
    const bool ok = shapes && kink != nullptr && kink->pass;
    report(7, "example 3/4 regions and kink", ok,
           std::string(shapes ? "region CSVs 80x80 and 80x110" : "region CSV shape mismatch") +
               fmt(", slope-change ratio at x=1/10 %.3g (needs > 3)", kink ? kink->value : 0.0),
           run_seconds.at("example3") + run_seconds.at("example4"));
  }

  // 8. Shot-noise advantage over the classical model.
  {
    const CheckResult* a = runs.at("example1").find("classical_advantage");
    const CheckResult* b = runs.at("example2").find("classical_advantage");
    report(8, "shot-noise advantage", a->pass && b->pass,
           fmt("min(V^top - V_CL): example1 %.4g (tol %.1e), ", a->value, -a->threshold) +
               fmt("example2 %.4g (tol %.1e)", b->value, -b->threshold),
           0.0);
  }

  // 9. Monte Carlo consistency.
  {
    int probes = 0, bad = 0;
    std::string detail;
    for (const auto& [name, r] : runs) {
      double worst = 0.0;
      for (const auto& p : r.probes) {
        ++probes;
        bad += p.pass ? 0 : 1;
        worst = std::max(worst, std::abs(p.mc.mean - p.solver_value) / p.bound);
      }
      detail += name + fmt(" C=%.2g worst gap/bound %.2f; ", r.cfg.validation.slack_constant, worst);
    }
    report(9, "Monte Carlo consistency", probes == 20 && bad == 0,
           fmt("%.0f probes, %.0f outside bound; ", probes, bad) + detail, 0.0);
  }

  // 10. Determinism across worker counts.
  {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<fs::path> dirs;
    for (const int workers : {1, 4}) {
      set_worker_count(workers);
      RunOptions opt;
      opt.out_dir = (base / ("determinism_w" + std::to_string(workers))).string();
      opt.check = true;
      run_experiment(resolve_config("example1"), opt);
      dirs.emplace_back(*opt.out_dir);
    }
    set_worker_count(0);
    int files = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const std::string a = slurp(entry.path());
      if (a != slurp(dirs[1] / entry.path().filename())) ++differ;
      // The main run used the default worker count.
      const fs::path main_run = base / "example1" / entry.path().filename();
      if (fs::exists(main_run) && entry.path().filename() != "checks.csv" &&
          entry.path().filename() != "properties.csv" && a != slurp(main_run))
        ++differ;
    }
    report(10, "determinism", files > 0 && differ == 0,
           fmt("%.0f CSVs compared across 1, 4 and %.0f (default) workers, %.0f differ", files, worker_count(), differ),
           elapsed(t0));
  }

  std::printf("%d of 10 criteria failed, total %.1f s\n", failures, elapsed(t_all));
  return failures == 0 ? 0 : 1;
}
