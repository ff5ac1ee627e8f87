#include "tipdiv/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "bundled_configs.hpp"

namespace tipdiv {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line(line) {}

double parse_number(const std::string& raw) {
  const auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  const auto parse_plain = [&](std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size())
      throw std::invalid_argument("not a number: '" + raw + "'");
    return v;
  };
  const std::string_view text = trim(raw);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double den = parse_plain(text.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator in '" + raw + "'");
    return parse_plain(text.substr(0, slash)) / den;
  }
  return parse_plain(text);
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    throw ConfigError(source_, node.Mark().line + 1, what);
  }

  YAML::Node require(const YAML::Node& map, const std::string& key) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, "missing key '" + key + "'");
    return n;
  }

  double number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "'" + key + "' must be a number");
    try {
      return parse_number(n.Scalar());
    } catch (const std::invalid_argument& e) {
      fail(n, "'" + key + "': " + e.what());
    }
  }

  double number(const YAML::Node& map, const std::string& key, double fallback) const {
    const YAML::Node n = map[key];
    return n ? number(n, key) : fallback;
  }

  long integer(const YAML::Node& map, const std::string& key, long fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    const double v = number(n, key);
    if (v != static_cast<double>(static_cast<long>(v))) fail(n, "'" + key + "' must be an integer");
    return static_cast<long>(v);
  }

  bool flag(const YAML::Node& map, const std::string& key, bool fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + key + "' must be true or false");
    }
  }

  std::string text(const YAML::Node& map, const std::string& key, const std::string& fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, "'" + key + "' must be a string");
    return n.Scalar();
  }

  Distribution distribution(const YAML::Node& n, const std::string& key) const {
    if (!n.IsMap()) fail(n, "'" + key + "' must be a mapping with a 'type' key");
    const std::string type = text(n, "type", "");
    try {
      if (type == "exponential") return Distribution::exponential(number(require(n, "rate"), "rate"));
      if (type == "erlang") {
        return Distribution::erlang(static_cast<int>(integer(n, "shape", 1)),
                                    number(require(n, "rate"), "rate"));
      }
      if (type == "deterministic")
        return Distribution::deterministic(number(require(n, "value"), "value"));
      if (type == "truncated_exponential") {
        return Distribution::truncated_exponential(number(require(n, "rate"), "rate"),
                                                   number(require(n, "cap"), "cap"));
      }
    } catch (const std::invalid_argument& e) {
      fail(n, "'" + key + "': " + e.what());
    }
    fail(n, "'" + key + "': unknown distribution type '" + type + "'");
  }

  StateSpec state(const YAML::Node& n) const {
    StateSpec s;
    s.lambda_floor = number(require(n, "lambda_floor"), "lambda_floor");
    s.beta = number(n, "beta", 0.0);
    s.decay = number(require(n, "decay"), "decay");
    s.claim_dist = distribution(require(n, "claim"), "claim");
    s.jump_dist = n["jump"] ? distribution(n["jump"], "jump") : Distribution::exponential(1.0);
    s.discount = number(require(n, "discount"), "discount");
    s.loading = number(n, "loading", 0.0);
    if (n["premium"]) s.premium_override = number(n["premium"], "premium");
    s.switch_rate = number(n, "switch_rate", 0.0);
    try {
      validate(s);
    } catch (const std::invalid_argument& e) {
      fail(n, e.what());
    }
    return s;
  }

  GridRange grid(const YAML::Node& n, const GridRange& base) const {
    if (!n.IsMap()) fail(n, "'grid' must be a mapping");
    GridRange g = base;
    g.x_max = number(n, "x_max", base.x_max);
    g.x_points = integer(n, "x_points", base.x_points);
    g.lambda_max = number(n, "lambda_max", base.lambda_max);
    g.lambda_points = integer(n, "lambda_points", base.lambda_points);
    if (!(g.x_max > 0.0)) fail(n, "grid x_max must be > 0");
    if (g.x_points < 2) fail(n, "grid x_points must be >= 2");
    if (g.lambda_points < 1) fail(n, "grid lambda_points must be >= 1");
    return g;
  }

 private:
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(source, 1, "empty configuration");
  if (!root.IsMap()) rd.fail(root, "top level must be a mapping");

  ExperimentConfig cfg;
  cfg.source_text = text;
  cfg.name = rd.text(root, "name", "experiment");

  const YAML::Node states = rd.require(root, "states");
  if (!states.IsSequence() || states.size() == 0)
    rd.fail(states, "'states' must be a non-empty list, from the highest phase down to State 0");

  GridRange base_grid;
  const YAML::Node grid_node = rd.require(root, "grid");
  base_grid = rd.grid(grid_node, base_grid);

  // Listed top-down; stored with State 0 first.
  std::vector<std::pair<StateSpec, GridRange>> top_down;
  for (const YAML::Node& entry : states) {
    if (!entry.IsMap()) rd.fail(entry, "each state must be a mapping");
    const long phases = rd.integer(entry, "phases", 1);
    if (phases < 1) rd.fail(entry, "'phases' must be >= 1");
    const StateSpec spec = rd.state(entry);
    const GridRange range = entry["grid"] ? rd.grid(entry["grid"], base_grid) : base_grid;
    for (long k = 0; k < phases; ++k) top_down.emplace_back(spec, range);
  }
  for (auto it = top_down.rbegin(); it != top_down.rend(); ++it) {
    cfg.problem.states.push_back(it->first);
    cfg.grids.push_back(it->second);
  }
  try {
    validate(cfg.problem);
  } catch (const std::invalid_argument& e) {
    rd.fail(states, e.what());
  }
  for (std::size_t m = 0; m < cfg.grids.size(); ++m) {
    if (cfg.grids[m].lambda_points > 1 &&
        !(cfg.grids[m].lambda_max > cfg.problem.states[m].lambda_floor)) {
      rd.fail(grid_node, "grid lambda range of State " + std::to_string(m) +
                             " must start at its lambda_floor and extend above it");
    }
  }

  if (const YAML::Node s = root["solver"]) {
    cfg.solver.tol = rd.number(s, "tol", 0.0);
    cfg.solver.max_iter = rd.integer(s, "max_iter", cfg.solver.max_iter);
    cfg.solver.quad_nodes = static_cast<int>(rd.integer(s, "quad_nodes", cfg.solver.quad_nodes));
    cfg.cap_tolerance = rd.number(s, "cap_tolerance", cfg.cap_tolerance);
    if (cfg.solver.quad_nodes < 4) rd.fail(s, "quad_nodes must be >= 4");
    if (cfg.solver.max_iter < 1) rd.fail(s, "max_iter must be >= 1");
  }
  if (const YAML::Node c = root["compare"]) {
    cfg.compare_classical = rd.flag(c, "classical", false);
    cfg.compare_no_tipping = rd.flag(c, "no_tipping", false);
  }
  if (const YAML::Node v = root["validation"]) {
    ValidationConfig& val = cfg.validation;
    val.enabled = rd.flag(v, "enabled", true);
    val.seed = static_cast<std::uint64_t>(rd.integer(v, "seed", static_cast<long>(val.seed)));
    val.paths = rd.integer(v, "paths", val.paths);
    val.horizon = rd.number(v, "horizon", 0.0);
    val.slack_constant = rd.number(v, "slack_constant", 0.0);
    val.one_step_points = static_cast<int>(rd.integer(v, "one_step_points", 0));
    val.one_step_samples = rd.integer(v, "one_step_samples", val.one_step_samples);
    if (val.paths < 2) rd.fail(v, "validation paths must be >= 2");
    if (const YAML::Node probes = v["probes"]) {
      if (!probes.IsSequence()) rd.fail(probes, "'probes' must be a list of [x, lambda] pairs");
      for (const YAML::Node& p : probes) {
        if (!p.IsSequence() || p.size() != 2) rd.fail(p, "probe must be [x, lambda]");
        ProbePoint probe;
        probe.x = rd.number(p[0], "probe x");
        if (!(p[1].IsScalar() && p[1].Scalar() == "lambda_av"))
          probe.lambda = rd.number(p[1], "probe lambda");
        val.probes.push_back(probe);
      }
    }
  }
  if (const YAML::Node e = root["expect"]) {
    cfg.expect.barrier_rows = rd.flag(e, "barrier_rows", false);
    cfg.expect.two_band_row = rd.flag(e, "two_band_row", false);
    cfg.expect.top_row_action = rd.flag(e, "top_row_action", false);
    cfg.expect.states_increase_towards_tipping =
        rd.flag(e, "states_increase_towards_tipping", false);
    if (e["kink_at"]) cfg.expect.kink_at = rd.number(e["kink_at"], "kink_at");
  }
  if (const YAML::Node o = root["output"]) {
    cfg.output_dir = rd.text(o, "dir", cfg.output_dir);
    cfg.svg = rd.flag(o, "svg", false);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

namespace {
constexpr std::string_view kCompareSuffix = "-compare";
}

std::vector<std::string> bundled_config_names() {
  std::vector<std::string> out;
  for (const auto& entry : detail::kBundledConfigs) {
    out.emplace_back(entry.name);
    out.push_back(std::string(entry.name) + std::string(kCompareSuffix));
  }
  return out;
}

std::optional<std::string> bundled_config_text(const std::string& name) {
  for (const auto& entry : detail::kBundledConfigs) {
    if (name == entry.name) return std::string(entry.text);
  }
  return std::nullopt;
}

ExperimentConfig resolve_config(const std::string& name_or_path) {
  if (const auto text = bundled_config_text(name_or_path)) return parse_config(*text, name_or_path);
  // "<bundled>-compare": the same example with both comparison runs enabled.
  if (name_or_path.size() > kCompareSuffix.size() && name_or_path.ends_with(kCompareSuffix)) {
    const std::string base = name_or_path.substr(0, name_or_path.size() - kCompareSuffix.size());
    if (const auto text = bundled_config_text(base)) {
      ExperimentConfig cfg = parse_config(*text, base);
      cfg.name += std::string(kCompareSuffix);
      cfg.compare_classical = true;
      cfg.compare_no_tipping = true;
      cfg.output_dir += std::string(kCompareSuffix);
      return cfg;
    }
  }
  return load_config(name_or_path);
}

std::vector<GridSpec> build_grids(const ExperimentConfig& cfg) {
  std::vector<GridSpec> grids;
  for (std::size_t m = 0; m < cfg.problem.states.size(); ++m) {
    const StateSpec& s = cfg.problem.states[m];
    const GridRange& r = cfg.grids[m];
    grids.push_back(make_grid(premium(s), r.x_max, r.x_points, s.lambda_floor, r.lambda_max,
                              r.lambda_points));
  }
  return grids;
}

TippingProblem classical_analogue(const TippingProblem& problem) {
  TippingProblem out = problem;
  for (StateSpec& s : out.states) {
    const double p = premium(s);
    s.lambda_floor = lambda_av(s);
    s.beta = 0.0;
    s.premium_override = p;
  }
  return out;
}

std::vector<GridSpec> classical_grids(const ExperimentConfig& cfg, const TippingProblem& classical) {
  std::vector<GridSpec> grids;
  for (std::size_t m = 0; m < classical.states.size(); ++m) {
    const StateSpec& s = classical.states[m];
    const GridRange& r = cfg.grids[m];
    grids.push_back(make_grid(premium(s), r.x_max, r.x_points, s.lambda_floor, s.lambda_floor, 1));
  }
  return grids;
}

StateSpec no_tipping_state(const TippingProblem& problem) {
  StateSpec s = problem.states.back();
  s.switch_rate = 0.0;
  return s;
}

}  // namespace tipdiv
