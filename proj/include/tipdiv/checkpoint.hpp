#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "tipdiv/grid.hpp"
#include "tipdiv/model.hpp"

namespace tipdiv {

inline constexpr int kCheckpointSchema = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * On-disk layout: '#'-prefixed header lines
 *
 *   # tipdiv-checkpoint <schema>
 *   # state <StateSpec echo>
 *   # grid delta=.. x_step=.. lambda_step=.. lambda_floor=.. x_bar=.. n1=.. m1=..
 *   # solver key=value ...
 *
 * followed by n1 + 1 rows of m1 + 1 comma-separated values (row n, column m).
 * Doubles are written with 17 significant digits.
 */
struct Checkpoint {
  int schema = kCheckpointSchema;
  std::string state_echo;
  std::map<std::string, std::string> solver;
  ValueSurface surface;
};

/// "%.17g".
std::string format_double(double v);

void save_checkpoint(const std::filesystem::path& path, const ValueSurface& surface,
                     const StateSpec& spec, const std::map<std::string, std::string>& solver = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tipdiv
