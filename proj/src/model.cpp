#include "tipdiv/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tipdiv {

double lambda_av(const StateSpec& spec) {
  return spec.lambda_floor + spec.beta * spec.jump_dist.mean() / spec.decay;
}

double premium_rate(const StateSpec& spec) {
  return (1.0 + spec.loading) * spec.claim_dist.mean() * lambda_av(spec);
}

double premium(const StateSpec& spec) {
  return spec.premium_override ? *spec.premium_override : premium_rate(spec);
}

void validate(const StateSpec& spec) {
  if (!(spec.lambda_floor > 0.0)) throw std::invalid_argument("lambda_floor must be > 0");
  if (!(spec.decay > 0.0)) throw std::invalid_argument("decay must be > 0");
  if (!(spec.discount > 0.0)) throw std::invalid_argument("discount must be > 0");
  if (spec.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  if (spec.switch_rate < 0.0) throw std::invalid_argument("switch_rate must be >= 0");
  if (!(premium(spec) > 0.0)) throw std::invalid_argument("premium must be > 0");
}

void validate(const TippingProblem& problem) {
  if (problem.states.empty()) throw std::invalid_argument("tipping problem has no states");
  for (const auto& s : problem.states) validate(s);
  if (problem.states[0].switch_rate != 0.0)
    throw std::invalid_argument("State 0 must have switch_rate 0 (terminal regime)");
  for (int m = 1; m <= problem.top(); ++m) {
    const auto& s = problem.states[m];
    if (!(s.switch_rate > 0.0))
      throw std::invalid_argument("State " + std::to_string(m) + " must have switch_rate > 0");
    if (s.switch_rate != problem.states[1].switch_rate)
      throw std::invalid_argument("pre-tipping states must share one switch_rate");
    if (std::abs(premium(s) - premium(problem.states[1])) > 1e-14 * premium(s))
      throw std::invalid_argument("pre-tipping states must carry the same premium");
    if (s.lambda_floor < problem.states[m - 1].lambda_floor)
      throw std::invalid_argument("baseline intensity of State " + std::to_string(m) +
                                  " is below that of State " + std::to_string(m - 1) +
                                  " (baseline intensities must satisfy lambda_m >= lambda_{m-1})");
  }
}

std::string describe(const StateSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "lambda_floor=" << spec.lambda_floor << " beta=" << spec.beta << " decay=" << spec.decay
      << " claim=" << spec.claim_dist.describe() << " jump=" << spec.jump_dist.describe()
      << " discount=" << spec.discount << " loading=" << spec.loading
      << " premium=" << premium(spec) << " switch_rate=" << spec.switch_rate;
  return out.str();
}

}  // namespace tipdiv
