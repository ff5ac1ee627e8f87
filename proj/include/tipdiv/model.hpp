#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tipdiv/distribution.hpp"

namespace tipdiv {

/// Parameters of one regime of the compound Cox shot-noise surplus.
struct StateSpec {
  double lambda_floor = 1.0;  ///< baseline claim intensity
  double beta = 0.0;          ///< catastrophe arrival rate
  double decay = 1.0;         ///< exponential decay rate of intensity shots
  Distribution claim_dist = Distribution::exponential(1.0);
  Distribution jump_dist = Distribution::exponential(1.0);
  double discount = 0.1;
  double loading = 0.1;
  std::optional<double> premium_override;
  double switch_rate = 0.0;  ///< 0 marks the terminal regime
};

/// Long-run mean intensity lambda_floor + beta E[Y] / decay.
double lambda_av(const StateSpec& spec);

/// Expected-value-principle premium (1 + loading) E[U] lambda_av; ignores any override.
double premium_rate(const StateSpec& spec);

/// Premium actually charged: the override when present, otherwise `premium_rate`.
double premium(const StateSpec& spec);

/// Throws std::invalid_argument when lambda_floor, decay or discount are not positive.
void validate(const StateSpec& spec);

/**
 * Chain of regimes for an Erlang(k, xi) tipping time.
 *
 * `states[m]` is State m: State 0 is the post-tipping regime (switch_rate 0),
 * States 1..k are the pre-tipping phases, each leaving to State m-1 at rate xi.
 */
struct TippingProblem {
  std::vector<StateSpec> states;

  int top() const { return static_cast<int>(states.size()) - 1; }
};

/// Checks the chain constraints (terminal State 0, shared xi, shared pre-tipping
/// premium, non-increasing baseline intensity towards State 0).
void validate(const TippingProblem& problem);

std::string describe(const StateSpec& spec);

}  // namespace tipdiv
