#include "tipdiv/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tipdiv/checkpoint.hpp"
#include "tipdiv/kernel.hpp"
#include "tipdiv/parallel.hpp"

#ifndef TIPDIV_VERSION
#define TIPDIV_VERSION "unknown"
#endif

namespace tipdiv {

namespace fs = std::filesystem;

std::string version_string() { return TIPDIV_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct GridCsv {
  std::vector<double> lambdas;
  std::vector<double> xs;
  Eigen::MatrixXd values;
};

GridCsv read_grid_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  GridCsv out;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    bool first = true;
    while (std::getline(row, cell, ',')) {
      if (header && first) {
        first = false;
        continue;
      }
      cells.push_back(std::strtod(cell.c_str(), nullptr));
      first = false;
    }
    if (header) {
      out.lambdas = cells;
      header = false;
    } else if (!cells.empty()) {
      out.xs.push_back(cells.front());
      rows.emplace_back(cells.begin() + 1, cells.end());
    }
  }
  const auto cols = static_cast<Index>(out.lambdas.size());
  out.values.resize(static_cast<Index>(rows.size()), cols);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (static_cast<Index>(rows[n].size()) != cols)
      throw std::runtime_error(path.string() + ": ragged grid CSV");
    for (Index m = 0; m < cols; ++m) out.values(static_cast<Index>(n), m) = rows[n][static_cast<std::size_t>(m)];
  }
  return out;
}

void write_header(std::ostream& out, const GridSpec& g) {
  out << "x";
  for (Index m = 0; m <= g.m1; ++m) out << ',' << format_double(g.lambda(m));
  out << '\n';
}

std::map<std::string, std::string> solver_metadata(const SolveReport& r, int state, int quad_nodes) {
  return {{"state", std::to_string(state)},
          {"iterations", std::to_string(r.iterations)},
          {"residual", format_double(r.residual)},
          {"tol", format_double(r.tol)},
          {"max_iterate_decrease", format_double(r.max_iterate_decrease)},
          {"quad_nodes", std::to_string(quad_nodes)}};
}

double min_difference(const ValueSurface& a, const ValueSurface& b) {
  return (a.values - b.values).minCoeff();
}

bool same_nodes(const GridSpec& a, const GridSpec& b) {
  GridSpec c = b;
  c.x_bar = a.x_bar;
  return a == c;
}

void add_check(RunResult& r, std::string name, bool pass, double value, double threshold) {
  r.checks.push_back({std::move(name), pass, value, threshold});
}

/// Solves State m of the chain, recording the x_bar bound on its grid.
SolveReport solve_stage(const TippingProblem& problem, std::vector<GridSpec>& grids,
                        const std::vector<SolveReport>& below, const SolverOptions& opts,
                        std::size_t m) {
  const ValueSurface* g = m == 0 ? nullptr : &below[m - 1].value;
  grids[m].x_bar = compute_x_bar(problem.states[m], g);
  return solve_state(problem.states[m], grids[m], g, opts, static_cast<int>(m));
}

SolveReport load_stage(const fs::path& dir, std::size_t m, const GridSpec& expected) {
  const Checkpoint cp = load_checkpoint(dir / ("checkpoint_state" + std::to_string(m) + ".csv"));
  if (!same_nodes(cp.surface.grid, expected))
    throw CheckpointError("resume: checkpoint grid of State " + std::to_string(m) + " differs from the config");
  SolveReport r;
  r.value = cp.surface;
  const auto meta = [&](const std::string& key) {
    const auto it = cp.solver.find(key);
    return it == cp.solver.end() ? std::string("0") : it->second;
  };
  r.iterations = std::stol(meta("iterations"));
  r.residual = std::strtod(meta("residual").c_str(), nullptr);
  r.tol = std::strtod(meta("tol").c_str(), nullptr);
  r.max_iterate_decrease = std::strtod(meta("max_iterate_decrease").c_str(), nullptr);
  const GridCsv regions = read_grid_csv(dir / ("region_state" + std::to_string(m) + ".csv"));
  if (regions.values.rows() != r.value.values.rows() || regions.values.cols() != r.value.values.cols())
    throw CheckpointError("resume: region map of State " + std::to_string(m) + " has the wrong shape");
  r.policy.grid = r.value.grid;
  r.policy.codes = regions.values.cast<std::uint8_t>();
  return r;
}

}  // namespace

void write_value_csv(const fs::path& path, const ValueSurface& surface) {
  auto out = open_out(path);
  const GridSpec& g = surface.grid;
  write_header(out, g);
  for (Index n = 0; n <= g.n1; ++n) {
    out << format_double(g.x(n));
    for (Index m = 0; m <= g.m1; ++m) out << ',' << format_double(surface.values(n, m));
    out << '\n';
  }
}

void write_region_csv(const fs::path& path, const PolicyMap& policy) {
  auto out = open_out(path);
  const GridSpec& g = policy.grid;
  write_header(out, g);
  for (Index n = 0; n <= g.n1; ++n) {
    out << format_double(g.x(n));
    for (Index m = 0; m <= g.m1; ++m) out << ',' << static_cast<int>(policy.codes(n, m));
    out << '\n';
  }
}

void render_heatmap_svg(const fs::path& csv, const fs::path& svg, const std::string& title,
                        bool categorical) {
  const GridCsv data = read_grid_csv(csv);
  const Index rows = data.values.rows();
  const Index cols = data.values.cols();
  constexpr int kCell = 8;
  constexpr int kMargin = 48;
  const int width = static_cast<int>(rows) * kCell + 2 * kMargin;
  const int height = static_cast<int>(cols) * kCell + 2 * kMargin;
  const double lo = data.values.minCoeff();
  const double hi = data.values.maxCoeff();

  const auto colour = [&](double v) -> std::string {
    if (categorical) {
      static const char* kCodes[] = {"#e6e6e6", "#2f2f2f", "#7f1d1d"};
      return kCodes[std::clamp(static_cast<int>(v), 0, 2)];
    }
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    const auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + t * (b - a))); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(0xfd, 0x44), mix(0xe7, 0x01), mix(0x25, 0x54));
    return buf;
  };

  auto out = open_out(svg);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin / 2 << "\">" << title << "</text>\n";
  for (Index n = 0; n < rows; ++n) {
    for (Index m = 0; m < cols; ++m) {
      const int px = kMargin + static_cast<int>(n) * kCell;
      const int py = kMargin + static_cast<int>(cols - 1 - m) * kCell;
      out << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"" << colour(data.values(n, m)) << "\"/>\n";
    }
  }
  const int base = kMargin + static_cast<int>(cols) * kCell;
  out << "<text x=\"" << kMargin << "\" y=\"" << base + 16 << "\">x " << format_double(data.xs.front())
      << " .. " << format_double(data.xs.back()) << "</text>\n";
  out << "<text x=\"4\" y=\"" << kMargin - 4 << "\">lambda " << format_double(data.lambdas.front())
      << " .. " << format_double(data.lambdas.back()) << "</text>\n";
  out << "</svg>\n";
}

KinkReport detect_kink(const Eigen::VectorXd& values, double x_step, double x_kink) {
  const Index cells = values.size() - 1;
  KinkReport r;
  r.cell = static_cast<Index>(std::floor(x_kink / x_step + 1e-9));
  if (r.cell < 3 || r.cell + 3 >= cells) throw std::invalid_argument("detect_kink: kink too close to the grid edge");
  const auto slope = [&](Index j) { return (values(j + 1) - values(j)) / x_step; };
  const auto change = [&](Index j) { return std::abs(slope(j + 1) - slope(j - 1)); };
  r.jump = change(r.cell);
  r.neighbour = std::max(change(r.cell - 2), change(r.cell + 2));
  // Slope changes at rounding level count as none; a linear slice has no kink.
  const double tiny = 1e-8 * (1.0 + std::abs(slope(r.cell)));
  if (r.jump <= tiny)
    r.ratio = 0.0;
  else
    r.ratio = r.neighbour > tiny ? r.jump / r.neighbour : std::numeric_limits<double>::infinity();
  return r;
}

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* RunResult::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunResult r;
  r.cfg = config;
  ExperimentConfig& cfg = r.cfg;
  if (options.tol) cfg.solver.tol = *options.tol;
  if (options.quad_nodes) cfg.solver.quad_nodes = *options.quad_nodes;
  if (options.paths) cfg.validation.paths = *options.paths;
  if (options.seed) cfg.validation.seed = *options.seed;
  if (options.out_dir) cfg.output_dir = *options.out_dir;
  cfg.compare_classical = (options.config_comparisons && cfg.compare_classical) || options.compare_classical;
  cfg.compare_no_tipping = (options.config_comparisons && cfg.compare_no_tipping) || options.no_tipping;
  cfg.svg = cfg.svg || options.svg;

  r.out_dir = cfg.output_dir;
  fs::create_directories(r.out_dir);
  const TippingProblem& problem = cfg.problem;
  const std::size_t states = problem.states.size();
  const int top = problem.top();
  r.grids = build_grids(cfg);

  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> inputs{{"config", sha256_hex(cfg.source_text)}};

  // Chain solve, optionally resumed from a previous run's checkpoints.
  std::size_t first = 0;
  if (options.resume) {
    const fs::path dir = *options.resume;
    while (first < states && fs::exists(dir / ("checkpoint_state" + std::to_string(first) + ".csv"))) {
      const ValueSurface* g = first == 0 ? nullptr : &r.chain[first - 1].value;
      r.grids[first].x_bar = compute_x_bar(problem.states[first], g);
      r.chain.push_back(load_stage(dir, first, r.grids[first]));
      inputs.emplace_back("checkpoint_state" + std::to_string(first),
                          sha256_hex(read_file(dir / ("checkpoint_state" + std::to_string(first) + ".csv"))));
      ++first;
    }
    if (first == 0) throw CheckpointError("resume: no checkpoint_state0.csv in " + dir.string());
  }
  for (std::size_t m = first; m < states; ++m)
    r.chain.push_back(solve_stage(problem, r.grids, r.chain, cfg.solver, m));

  for (std::size_t m = 0; m < states; ++m) {
    const std::string tag = "state" + std::to_string(m);
    const SolveReport& rep = r.chain[m];
    write_value_csv(r.out_dir / ("value_" + tag + ".csv"), rep.value);
    write_region_csv(r.out_dir / ("region_" + tag + ".csv"), rep.policy);
    save_checkpoint(r.out_dir / ("checkpoint_" + tag + ".csv"), rep.value, problem.states[m],
                    solver_metadata(rep, static_cast<int>(m), cfg.solver.quad_nodes));
    if (r.grids[m].x_max() < r.grids[m].x_bar) {
      warnings.push_back("State " + std::to_string(m) + ": x range ends at " +
                         format_double(r.grids[m].x_max()) + ", below the truncation bound " +
                         format_double(r.grids[m].x_bar));
    }
  }

  // Structural properties of every solve.
  std::vector<std::pair<std::string, const SolveReport*>> solves;
  for (std::size_t m = 0; m < states; ++m) solves.emplace_back("state" + std::to_string(m), &r.chain[m]);

  if (cfg.compare_no_tipping) {
    SolverOptions opts = cfg.solver;
    GridSpec grid = r.grids.back();
    const StateSpec nt = no_tipping_state(problem);
    grid.x_bar = compute_x_bar(nt, nullptr);
    r.no_tipping = solve_state(nt, grid, nullptr, opts, top);
    write_value_csv(r.out_dir / "value_no_tipping.csv", r.no_tipping->value);
    write_region_csv(r.out_dir / "region_no_tipping.csv", r.no_tipping->policy);
    solves.emplace_back("no_tipping", &*r.no_tipping);
    for (std::size_t m = 1; m < states; ++m) {
      if (!same_nodes(r.chain[m].value.grid, grid)) {
        warnings.push_back("State " + std::to_string(m) + " grid differs from the no-tipping grid; skipped");
        continue;
      }
      ValueSurface diff{grid, r.chain[m].value.values - r.no_tipping->value.values};
      write_value_csv(r.out_dir / ("diff_no_tipping_state" + std::to_string(m) + ".csv"), diff);
      const double tol = std::max(r.chain[m].tol, r.no_tipping->tol);
      const double worst = diff.values.minCoeff();
      add_check(r, "no_tipping_dominated_state" + std::to_string(m), worst >= -tol, worst, -tol);
    }
  }

  if (cfg.compare_classical) {
    const TippingProblem cl = classical_analogue(problem);
    const std::vector<GridSpec> cl_grids = classical_grids(cfg, cl);
    r.classical = solve_chain(cl, cl_grids, cfg.solver);
    for (std::size_t m = 0; m < states; ++m) {
      write_value_csv(r.out_dir / ("value_classical_state" + std::to_string(m) + ".csv"), r.classical[m].value);
      solves.emplace_back("classical_state" + std::to_string(m), &r.classical[m]);
    }
    const SolveReport& v = r.chain.back();
    const SolveReport& vc = r.classical.back();
    const GridSpec& g = v.value.grid;
    const Index m_av = sigma_up(g, lambda_av(problem.states.back()));
    const double tol = std::max(v.tol, vc.tol);
    auto out = open_out(r.out_dir / "classical_slice.csv");
    out << "x,lambda,value,classical,difference\n";
    double worst = std::numeric_limits<double>::infinity();
    const Index rows = std::min(g.n1, vc.value.grid.n1);
    for (Index n = 0; n <= rows; ++n) {
      const double a = v.value.values(n, m_av);
      const double b = vc.value.values(n, 0);
      worst = std::min(worst, a - b);
      out << format_double(g.x(n)) << ',' << format_double(g.lambda(m_av)) << ',' << format_double(a)
          << ',' << format_double(b) << ',' << format_double(a - b) << '\n';
    }
    add_check(r, "classical_advantage", worst >= -tol, worst, -tol);
    if (cfg.expect.kink_at) {
      const KinkReport k = detect_kink(v.value.values.col(m_av), g.x_step, *cfg.expect.kink_at);
      add_check(r, "slice_kink", k.ratio > 3.0, k.ratio, 3.0);
    }
  }

  {
    auto out = open_out(r.out_dir / "properties.csv");
    out << "solve,iterations,residual,tol,max_iterate_decrease,min_excess,min_slope_gap,"
           "max_lambda_increase,tol_mono,cap_excess,cap_tol,pass\n";
    for (const auto& [name, rep] : solves) {
      const double max_excess = (rep->value.values - identity_surface(rep->value.grid).values).maxCoeff();
      const PropertyReport p = check_properties(*rep, cfg.cap_tolerance * max_excess);
      out << name << ',' << rep->iterations << ',' << format_double(rep->residual) << ','
          << format_double(rep->tol) << ',' << format_double(rep->max_iterate_decrease) << ','
          << format_double(p.min_excess) << ',' << format_double(p.min_slope_gap) << ','
          << format_double(p.max_lambda_increase) << ',' << format_double(p.tol_mono) << ','
          << format_double(p.cap_excess) << ',' << format_double(p.cap_tol) << ',' << p.all() << '\n';
      add_check(r, "properties_" + name, p.all(), p.all() ? 1.0 : 0.0, 1.0);
      if (!p.cap_adequate)
        warnings.push_back(name + ": excess at the intensity cap exceeds the cap tolerance; enlarge the lambda range");
    }
  }

  // Region structure expectations.
  for (std::size_t m = 0; m < states; ++m) {
    const std::string tag = "_state" + std::to_string(m);
    const PolicyMap& pol = r.chain[m].policy;
    const RegionMap reg = extract_regions(pol);
    const GridSpec& g = pol.grid;
    if (cfg.expect.barrier_rows) {
      long bad = 0;
      for (Index m2 = 0; m2 <= g.m1; ++m2) {
        if (reg.intervals[static_cast<std::size_t>(m2)] != 1 || !reg.action(g.n1, m2)) ++bad;
      }
      add_check(r, "barrier_rows" + tag, bad == 0, static_cast<double>(bad), 0.0);
    }
    if (cfg.expect.two_band_row) {
      const long two = std::count(reg.intervals.begin(), reg.intervals.end(), 2);
      add_check(r, "two_band_row" + tag, two >= 1, static_cast<double>(two), 1.0);
    }
    if (cfg.expect.top_row_action) {
      // E1 is unavailable at zero surplus, so the row is judged for n >= 1.
      long waiting = 0;
      for (Index n = 1; n <= g.n1; ++n) waiting += reg.action(n, g.m1) ? 0 : 1;
      add_check(r, "top_row_action" + tag, waiting == 0, static_cast<double>(waiting), 0.0);
    }
  }
  if (cfg.expect.states_increase_towards_tipping) {
    for (std::size_t m = 1; m + 1 < states; ++m) {
      if (!same_nodes(r.chain[m].value.grid, r.chain[m + 1].value.grid)) continue;
      const double tol = std::max(r.chain[m].tol, r.chain[m + 1].tol);
      const double worst = min_difference(r.chain[m].value, r.chain[m + 1].value);
      add_check(r, "ordered_state" + std::to_string(m) + "_over_state" + std::to_string(m + 1),
                worst >= -tol, worst, -tol);
    }
  }

  // Monte Carlo validation against the solved surfaces.
  const ValidationConfig& val = cfg.validation;
  if (options.validate && val.enabled) {
    if (!val.probes.empty()) {
      PathConfig pc;
      pc.problem = problem;
      pc.horizon = val.horizon;
      pc.paths = val.paths;
      pc.start_state = top;
      for (const auto& rep : r.chain) pc.policies.push_back(rep.policy);
      const GridSpec& g = r.chain.back().value.grid;
      const double slack = val.slack_constant * (g.delta + g.lambda_step);
      auto out = open_out(r.out_dir / "mc_validation.csv");
      out << "probe,x,lambda,n,m,solver_value,mc_mean,std_error,paths,ruin_fraction,"
             "switch_fraction,mean_switch_time,bound,required_slack_constant,pass\n";
      for (std::size_t i = 0; i < val.probes.size(); ++i) {
        const ProbePoint& probe = val.probes[i];
        ProbeResult pr;
        pr.n = *rho_down(g, probe.x);
        pr.m = sigma_up(g, probe.lambda.value_or(lambda_av(problem.states.back())));
        pr.x = g.x(pr.n);
        pr.lambda = g.lambda(pr.m);
        pr.solver_value = r.chain.back().value.values(pr.n, pr.m);
        pc.seed = val.seed + i;
        pc.x0 = pr.x;
        pc.lambda0 = pr.lambda;
        pr.mc = evaluate_policy(pc);
        pr.bound = 3.0 * pr.mc.std_error + slack;
        const double gap = std::abs(pr.mc.mean - pr.solver_value);
        pr.pass = gap <= pr.bound;
        out << i << ',' << format_double(pr.x) << ',' << format_double(pr.lambda) << ',' << pr.n << ','
            << pr.m << ',' << format_double(pr.solver_value) << ',' << format_double(pr.mc.mean) << ','
            << format_double(pr.mc.std_error) << ',' << pr.mc.paths << ','
            << format_double(pr.mc.ruin_fraction) << ',' << format_double(pr.mc.switch_fraction) << ','
            << format_double(pr.mc.mean_switch_time) << ',' << format_double(pr.bound) << ','
            << format_double((gap - 3.0 * pr.mc.std_error) / (g.delta + g.lambda_step)) << ','
            << pr.pass << '\n';
        add_check(r, "mc_probe" + std::to_string(i), pr.pass, gap, pr.bound);
        r.probes.push_back(pr);
      }
    }
    if (val.one_step_points > 0) {
      std::vector<TransitionKernel> kernels;
      std::vector<Eigen::MatrixXd> exits(states);
      for (std::size_t m = 0; m < states; ++m) {
        kernels.push_back(build_kernel(problem.states[m], r.chain[m].value.grid, cfg.solver.quad_nodes));
        if (m > 0) exits[m] = switch_term(kernels[m], r.chain[m - 1].value);
      }
      StreamRng pick(val.seed, 0x5eed);
      const auto draw = [&pick](Index count) {
        return std::min(count - 1, static_cast<Index>(pick.uniform() * static_cast<double>(count)));
      };
      auto out = open_out(r.out_dir / "one_step.csv");
      out << "state,n,m,kernel,oracle,std_error,z,pass\n";
      long failures = 0;
      double worst_z = 0.0;
      for (int i = 0; i < val.one_step_points; ++i) {
        KernelCheck kc;
        kc.state = static_cast<int>(draw(static_cast<Index>(states)));
        const auto s = static_cast<std::size_t>(kc.state);
        const GridSpec& g = r.chain[s].value.grid;
        kc.n = draw(g.n1);
        kc.m = draw(g.lambda_points());
        const ValueSurface* gsurf = s == 0 ? nullptr : &r.chain[s - 1].value;
        kc.kernel = apply_t0(kernels[s], r.chain[s].value, s == 0 ? nullptr : &exits[s], kc.n, kc.m);
        kc.oracle = one_step_oracle(problem.states[s], g, kc.n, kc.m, r.chain[s].value, gsurf,
                                    val.one_step_samples, val.seed + 1000 + static_cast<std::uint64_t>(i));
        const double z = (kc.kernel - kc.oracle.mean) / kc.oracle.std_error;
        kc.pass = std::abs(z) <= 4.0;
        failures += kc.pass ? 0 : 1;
        worst_z = std::max(worst_z, std::abs(z));
        out << kc.state << ',' << kc.n << ',' << kc.m << ',' << format_double(kc.kernel) << ','
            << format_double(kc.oracle.mean) << ',' << format_double(kc.oracle.std_error) << ','
            << format_double(z) << ',' << kc.pass << '\n';
        r.kernel_checks.push_back(kc);
      }
      add_check(r, "one_step_kernel", failures == 0, worst_z, 4.0);
    }
  }

  {
    auto out = open_out(r.out_dir / "checks.csv");
    out << "check,value,threshold,pass\n";
    for (const auto& c : r.checks)
      out << c.name << ',' << format_double(c.value) << ',' << format_double(c.threshold) << ',' << c.pass << '\n';
  }

  std::vector<std::string> outputs;
  for (const auto& entry : fs::directory_iterator(r.out_dir)) {
    if (entry.path().extension() == ".csv") outputs.push_back(entry.path().filename().string());
  }
  std::sort(outputs.begin(), outputs.end());
  if (cfg.svg) {
    for (const auto& name : outputs) {
      const bool region = name.rfind("region_", 0) == 0;
      if (!region && name.rfind("value_", 0) != 0 && name.rfind("diff_", 0) != 0) continue;
      const fs::path csv = r.out_dir / name;
      render_heatmap_svg(csv, fs::path(csv).replace_extension(".svg"), cfg.name + " " + csv.stem().string(), region);
    }
  }

  nlohmann::ordered_json manifest;
  manifest["name"] = cfg.name;
  manifest["version"] = version_string();
  for (const auto& [k, v] : inputs) manifest["inputs"][k] = v;
  manifest["seed"] = val.seed;
  manifest["paths"] = val.paths;
  manifest["quad_nodes"] = cfg.solver.quad_nodes;
  manifest["cap_tolerance"] = cfg.cap_tolerance;
  manifest["slack_constant"] = val.slack_constant;
  manifest["workers"] = worker_count();
  for (const auto& [name, rep] : solves) {
    manifest["solves"][name] = {{"tol", rep->tol},
                                {"residual", rep->residual},
                                {"iterations", rep->iterations},
                                {"wall_seconds", rep->wall_seconds}};
  }
  for (const auto& name : outputs) manifest["outputs"][name] = sha256_hex(read_file(r.out_dir / name));
  manifest["warnings"] = warnings;
  manifest["passed"] = r.all_passed();
  auto out = open_out(r.out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  r.warnings = std::move(warnings);
  return r;
}

}  // namespace tipdiv
