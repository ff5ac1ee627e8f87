#include "tipdiv/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tipdiv {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw CheckpointError("checkpoint: malformed " + what + " '" + s + "'");
  return v;
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  for (std::string token; in >> token;) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw CheckpointError("checkpoint: malformed field '" + token + "'");
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

std::string field(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw CheckpointError("checkpoint: grid header lacks '" + key + "'");
  return it->second;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ValueSurface& surface,
                     const StateSpec& spec, const std::map<std::string, std::string>& solver) {
  const GridSpec& g = surface.grid;
  if (surface.values.rows() != g.x_points() || surface.values.cols() != g.lambda_points())
    throw CheckpointError("save_checkpoint: surface does not match its grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("save_checkpoint: cannot write " + path.string());
  out << "# tipdiv-checkpoint " << kCheckpointSchema << '\n';
  out << "# state " << describe(spec) << '\n';
  out << "# grid delta=" << format_double(g.delta) << " x_step=" << format_double(g.x_step)
      << " lambda_step=" << format_double(g.lambda_step)
      << " lambda_floor=" << format_double(g.lambda_floor) << " x_bar=" << format_double(g.x_bar)
      << " n1=" << g.n1 << " m1=" << g.m1 << '\n';
  out << "# solver";
  for (const auto& [k, v] : solver) out << ' ' << k << '=' << v;
  out << '\n';
  for (Index n = 0; n <= g.n1; ++n) {
    for (Index m = 0; m <= g.m1; ++m) out << (m ? "," : "") << format_double(surface.values(n, m));
    out << '\n';
  }
  if (!out) throw CheckpointError("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("load_checkpoint: cannot open " + path.string());
  Checkpoint cp;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# tipdiv-checkpoint ", 0) != 0)
    throw CheckpointError("load_checkpoint: not a checkpoint file: " + path.string());
  cp.schema = static_cast<int>(to_double(line.substr(20), "schema version"));
  if (cp.schema != kCheckpointSchema) {
    throw CheckpointError("load_checkpoint: schema mismatch (file has " + std::to_string(cp.schema) +
                          ", expected " + std::to_string(kCheckpointSchema) + ")");
  }

  bool have_grid = false;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (line.rfind("# state ", 0) == 0) {
      cp.state_echo = line.substr(8);
    } else if (line.rfind("# grid ", 0) == 0) {
      const auto kv = key_values(line.substr(7));
      GridSpec& g = cp.surface.grid;
      g.delta = to_double(field(kv, "delta"), "delta");
      g.x_step = to_double(field(kv, "x_step"), "x_step");
      g.lambda_step = to_double(field(kv, "lambda_step"), "lambda_step");
      g.lambda_floor = to_double(field(kv, "lambda_floor"), "lambda_floor");
      g.x_bar = to_double(field(kv, "x_bar"), "x_bar");
      g.n1 = static_cast<Index>(to_double(field(kv, "n1"), "n1"));
      g.m1 = static_cast<Index>(to_double(field(kv, "m1"), "m1"));
      have_grid = true;
    } else if (line.rfind("# solver", 0) == 0) {
      cp.solver = key_values(line.substr(8));
    } else if (!line.empty() && line[0] != '#') {
      rows.push_back(line);
    }
  }
  if (!have_grid) throw CheckpointError("load_checkpoint: missing grid header");

  const GridSpec& g = cp.surface.grid;
  if (static_cast<Index>(rows.size()) != g.x_points()) {
    throw CheckpointError("load_checkpoint: dimension mismatch: " + std::to_string(rows.size()) +
                          " rows, grid declares " + std::to_string(g.x_points()));
  }
  cp.surface.values.resize(g.x_points(), g.lambda_points());
  for (Index n = 0; n < g.x_points(); ++n) {
    std::vector<std::string> cells;
    std::istringstream row(rows[static_cast<std::size_t>(n)]);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (static_cast<Index>(cells.size()) != g.lambda_points()) {
      throw CheckpointError("load_checkpoint: dimension mismatch in row " + std::to_string(n) +
                            ": " + std::to_string(cells.size()) + " columns, grid declares " +
                            std::to_string(g.lambda_points()));
    }
    for (Index m = 0; m < g.lambda_points(); ++m)
      cp.surface.values(n, m) = to_double(cells[static_cast<std::size_t>(m)], "value");
  }
  return cp;
}

}  // namespace tipdiv
