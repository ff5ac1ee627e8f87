#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "tipdiv/checkpoint.hpp"
#include "tipdiv/experiment.hpp"

namespace {

using namespace tipdiv;

enum class Verb { run, solve, simulate, compare, check };

struct Args {
  std::string config;
  std::string out;
  double tol = 0.0;
  int quad_nodes = 0;
  long paths = 0;
  std::uint64_t seed = 0;
  bool check = false;
  bool compare_cl = false;
  bool no_tipping = false;
  bool svg = false;
  std::string resume;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("config,--config", a.config, "bundled example name or YAML file");
  cmd->add_option("--out", a.out, "output directory (overrides output.dir)");
  cmd->add_option("--tol", a.tol, "sup-norm stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--quad-nodes", a.quad_nodes, "Gauss-Legendre nodes per panel")->check(CLI::Range(4, 256));
  cmd->add_option("--paths", a.paths, "Monte Carlo paths per probe")->check(CLI::Range(2L, 1'000'000'000L));
  cmd->add_option("--seed", a.seed, "Monte Carlo seed");
  cmd->add_flag("--check", a.check, "exit nonzero when any check fails");
  cmd->add_flag("--compare-cl", a.compare_cl, "also solve the constant-intensity analogue");
  cmd->add_flag("--no-tipping", a.no_tipping, "also solve the top state without tipping");
  cmd->add_flag("--svg", a.svg, "render SVG heatmaps of the value and region CSVs");
  cmd->add_option("--resume", a.resume, "reuse checkpoints from an earlier output directory");
}

int execute(Verb verb, const Args& a) {
  if (a.config.empty()) {
    std::cerr << "error: no configuration given (bundled:";
    for (const auto& n : bundled_config_names()) std::cerr << ' ' << n;
    std::cerr << ")\n";
    return 2;
  }
  const ExperimentConfig cfg = resolve_config(a.config);
  RunOptions opt;
  if (!a.out.empty()) opt.out_dir = a.out;
  if (a.tol > 0.0) opt.tol = a.tol;
  if (a.quad_nodes > 0) opt.quad_nodes = a.quad_nodes;
  if (a.paths > 0) opt.paths = a.paths;
  if (a.seed != 0) opt.seed = a.seed;
  if (!a.resume.empty()) opt.resume = a.resume;
  opt.compare_classical = a.compare_cl;
  opt.no_tipping = a.no_tipping;
  opt.svg = a.svg;
  opt.check = a.check || verb == Verb::check;
  switch (verb) {
    case Verb::solve:
      opt.config_comparisons = false;
      opt.validate = false;
      break;
    case Verb::compare:
      opt.validate = false;
      if (!a.compare_cl && !a.no_tipping) opt.compare_classical = opt.no_tipping = true;
      break;
    case Verb::simulate:
      opt.config_comparisons = false;
      break;
    case Verb::run:
    case Verb::check:
      break;
  }

  const RunResult r = run_experiment(cfg, opt);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (std::size_t m = 0; m < r.chain.size(); ++m) {
    const SolveReport& s = r.chain[m];
    std::printf("State %zu: %ld iterations, residual %.3g (tol %.3g), %.2f s\n", m, s.iterations,
                s.residual, s.tol, s.wall_seconds);
  }
  for (const auto& c : r.checks) {
    std::printf("%s %-40s value %.6g threshold %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.value, c.threshold);
  }
  std::printf("artifacts written to %s\n", r.out_dir.string().c_str());
  return opt.check && !r.all_passed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dividend strategies for a shot-noise insurer with regime switches"};
  app.require_subcommand(1);
  Args args;
  Verb verb = Verb::run;
  const std::pair<const char*, Verb> verbs[] = {{"run", Verb::run},
                                                {"solve", Verb::solve},
                                                {"simulate", Verb::simulate},
                                                {"compare", Verb::compare},
                                                {"check", Verb::check}};
  const std::pair<const char*, const char*> help[] = {
      {"run", "solve the chain, run the configured comparisons and validation"},
      {"solve", "solve the chain and write value, region and checkpoint CSVs"},
      {"simulate", "solve, then validate against Monte Carlo policy evaluation"},
      {"compare", "solve with the constant-intensity and no-tipping comparisons"},
      {"check", "run everything and exit nonzero when a check fails"}};
  for (std::size_t i = 0; i < std::size(verbs); ++i) {
    CLI::App* cmd = app.add_subcommand(verbs[i].first, help[i].second);
    add_common(cmd, args);
    cmd->callback([&verb, v = verbs[i].second] { verb = v; });
  }
  app.add_subcommand("list", "print the bundled configuration names")->callback([] {
    for (const auto& n : bundled_config_names()) std::cout << n << '\n';
    std::exit(0);
  });
  CLI11_PARSE(app, argc, argv);

  try {
    return execute(verb, args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
