#include "tipdiv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tipdiv/kernel.hpp"
#include "tipdiv/parallel.hpp"

namespace tipdiv {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t StreamRng::next() { return mix64(key_ + (++counter_) * kGolden); }

double StreamRng::uniform() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double StreamRng::exponential(double rate) { return -std::log(uniform()) / rate; }

double pairwise_sum(const double* data, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += data[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

double effective_horizon(const PathConfig& cfg) {
  if (cfg.horizon > 0.0) return cfg.horizon;
  double q = kInf;
  for (const auto& s : cfg.problem.states) q = std::min(q, s.discount);
  return 40.0 / q;
}

PathOutcome sample_path(const PathConfig& cfg, std::uint64_t path_index, double time_offset) {
  const auto& states = cfg.problem.states;
  if (cfg.policies.size() != states.size())
    throw std::invalid_argument("sample_path: need one policy per state");
  StreamRng rng(cfg.seed, path_index);
  const double horizon = effective_horizon(cfg);

  int s = cfg.start_state;
  double t = 0.0;
  double log_disc = states[static_cast<std::size_t>(s)].discount * time_offset;
  double lam = cfg.lambda0;
  PathOutcome out;

  const GridSpec* grid = &cfg.policies[static_cast<std::size_t>(s)].grid;
  auto start = rho_down(*grid, cfg.x0);
  if (!start) throw std::invalid_argument("sample_path: initial surplus must be >= 0");
  Index n = *start;
  out.payoff += std::exp(-log_disc) * (cfg.x0 - grid->x(n));

  while (t < horizon) {
    const StateSpec& st = states[static_cast<std::size_t>(s)];
    const PolicyMap& policy = cfg.policies[static_cast<std::size_t>(s)];
    grid = &policy.grid;
    const double disc = std::exp(-log_disc);
    const Index m = sigma_up(*grid, lam);
    const Action act = policy(n, m);
    if (act == Action::EF) {
      out.payoff += disc * grid->x(n);
      break;
    }
    if (act == Action::E1) {
      out.payoff += disc * grid->x_step;
      --n;
      continue;
    }

    const double p = grid->premium();
    const double delta = grid->delta;
    const double cat = st.beta > 0.0 ? rng.exponential(st.beta) : kInf;
    const double flip = (s >= 1 && st.switch_rate > 0.0) ? rng.exponential(st.switch_rate) : kInf;
    const double window = std::min({delta, cat, flip});

    // Thinning: the decaying intensity is bounded by its value at the step start.
    double claim = kInf;
    if (lam > 0.0) {
      for (double u = 0.0;;) {
        u += rng.exponential(lam);
        if (u >= window) break;
        if (rng.uniform() * lam <= decayed_intensity(st.lambda_floor, lam, st.decay, u)) {
          claim = u;
          break;
        }
      }
    }

    if (claim < window) {
      const double y = grid->x(n) + p * claim - st.claim_dist.sample(rng);
      lam = decayed_intensity(st.lambda_floor, lam, st.decay, claim);
      t += claim;
      log_disc += st.discount * claim;
      const auto dest = rho_down(*grid, y);
      if (!dest) {
        out.ruined = true;
        break;
      }
      out.payoff += std::exp(-log_disc) * (y - grid->x(*dest));
      n = *dest;
    } else if (window == delta) {
      lam = decayed_intensity(st.lambda_floor, lam, st.decay, delta);
      t += delta;
      log_disc += st.discount * delta;
      ++n;
    } else if (cat <= flip) {
      lam = decayed_intensity(st.lambda_floor, lam, st.decay, cat) + st.jump_dist.sample(rng);
      t += cat;
      log_disc += st.discount * cat;
      out.payoff += std::exp(-log_disc) * p * cat;
    } else {
      lam = decayed_intensity(st.lambda_floor, lam, st.decay, flip);
      t += flip;
      log_disc += st.discount * flip;
      const double y = grid->x(n) + p * flip;
      if (std::isnan(out.switch_time)) out.switch_time = t;
      --s;
      const GridSpec& next = cfg.policies[static_cast<std::size_t>(s)].grid;
      const Index dest = *rho_down(next, y);
      out.payoff += std::exp(-log_disc) * (y - next.x(dest));
      n = dest;
    }
  }
  return out;
}

EstimateReport evaluate_policy(const PathConfig& cfg) {
  if (cfg.paths < 2) throw std::invalid_argument("evaluate_policy: need at least 2 paths");
  const auto count = static_cast<std::size_t>(cfg.paths);
  std::vector<double> payoff(count), ruined(count), switched(count), switch_time(count);
  parallel_for(cfg.paths, [&](std::ptrdiff_t i) {
    const PathOutcome o = sample_path(cfg, static_cast<std::uint64_t>(i));
    const auto k = static_cast<std::size_t>(i);
    payoff[k] = o.payoff;
    ruined[k] = o.ruined ? 1.0 : 0.0;
    switched[k] = std::isnan(o.switch_time) ? 0.0 : 1.0;
    switch_time[k] = std::isnan(o.switch_time) ? 0.0 : o.switch_time;
  });
  EstimateReport r;
  r.paths = cfg.paths;
  const double n = static_cast<double>(count);
  r.mean = pairwise_sum(payoff.data(), count) / n;
  for (double& v : payoff) v = (v - r.mean) * (v - r.mean);
  r.std_error = std::sqrt(pairwise_sum(payoff.data(), count) / (n - 1.0) / n);
  r.ruin_fraction = pairwise_sum(ruined.data(), count) / n;
  const double switches = pairwise_sum(switched.data(), count);
  r.switch_fraction = switches / n;
  if (switches > 0.0) r.mean_switch_time = pairwise_sum(switch_time.data(), count) / switches;
  return r;
}

OracleEstimate one_step_oracle(const StateSpec& spec, const GridSpec& grid, Index n, Index m,
                               const ValueSurface& w, const ValueSurface* g, long samples,
                               std::uint64_t seed) {
  if (samples < 10'000) throw std::invalid_argument("one_step_oracle: need >= 1e4 samples");
  if (n >= grid.n1) throw std::out_of_range("one_step_oracle: waiting is not available at n1");
  if (spec.switch_rate > 0.0 && g == nullptr)
    throw std::invalid_argument("one_step_oracle: switching regime needs g");
  const double p = premium(spec);
  const double lam_m = grid.lambda(m);
  const double x_n = grid.x(n);
  const double q = spec.discount;
  const auto count = static_cast<std::size_t>(samples);
  std::vector<double> values(count);
  parallel_for(samples, [&](std::ptrdiff_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i));
    const double cat = spec.beta > 0.0 ? rng.exponential(spec.beta) : kInf;
    const double flip = spec.switch_rate > 0.0 ? rng.exponential(spec.switch_rate) : kInf;
    double claim = kInf;
    for (double u = 0.0;;) {
      u += rng.exponential(lam_m);
      if (u >= grid.delta) break;
      if (rng.uniform() * lam_m <= decayed_intensity(spec.lambda_floor, lam_m, spec.decay, u)) {
        claim = u;
        break;
      }
    }
    const double first = std::min({grid.delta, cat, flip, claim});
    const double lam_t = decayed_intensity(spec.lambda_floor, lam_m, spec.decay, first);
    double v = 0.0;
    if (first == claim) {
      const double y = x_n + p * claim - spec.claim_dist.sample(rng);
      if (const auto dest = rho_down(grid, y)) {
        v = std::exp(-q * claim) * (w.values(*dest, sigma_up(grid, lam_t)) + y - grid.x(*dest));
      }
    } else if (first == grid.delta) {
      v = std::exp(-q * grid.delta) * w.values(n + 1, sigma_up(grid, lam_t));
    } else if (first == cat) {
      const Index dest = sigma_up(grid, lam_t + spec.jump_dist.sample(rng));
      v = std::exp(-q * cat) * (w.values(n, dest) + p * cat);
    } else {
      v = std::exp(-q * flip) * eval_surface(*g, x_n + p * flip, sigma_up(g->grid, lam_t));
    }
    values[static_cast<std::size_t>(i)] = v;
  });
  OracleEstimate out;
  const double cnt = static_cast<double>(count);
  out.mean = pairwise_sum(values.data(), count) / cnt;
  for (double& v : values) v = (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(pairwise_sum(values.data(), count) / (cnt - 1.0) / cnt);
  return out;
}

namespace {

struct ClRoots {
  double alpha, r1, r2;
};

ClRoots cl_roots(double lambda, double p, double q, const Distribution& claim) {
  const auto* law = std::get_if<Exponential>(&claim.variant());
  if (law == nullptr) throw std::invalid_argument("cl_closed_form needs exponential claims");
  const double alpha = law->rate;
  // p r^2 + (p alpha - lambda - q) r - q alpha = 0
  const double b = p * alpha - lambda - q;
  const double disc = std::sqrt(b * b + 4.0 * p * q * alpha);
  const double r1 = b > 0.0 ? (2.0 * q * alpha) / (b + disc) : (-b + disc) / (2.0 * p);
  const double r2 = -q * alpha / (p * r1);
  return {alpha, r1, r2};
}

}  // namespace

double cl_barrier(double lambda, double p, double q, const Distribution& claim) {
  const auto [alpha, r1, r2] = cl_roots(lambda, p, q, claim);
  const double b = std::log((r2 * r2 * (alpha + r2)) / (r1 * r1 * (alpha + r1))) / (r1 - r2);
  return std::max(0.0, b);
}

double cl_closed_form(double x, double lambda, double p, double q, const Distribution& claim) {
  if (x < 0.0) return 0.0;
  const auto [alpha, r1, r2] = cl_roots(lambda, p, q, claim);
  const double b = cl_barrier(lambda, p, q, claim);
  auto h = [&](double z) { return (alpha + r1) * std::exp(r1 * z) - (alpha + r2) * std::exp(r2 * z); };
  const double hb = r1 * (alpha + r1) * std::exp(r1 * b) - r2 * (alpha + r2) * std::exp(r2 * b);
  return x <= b ? h(x) / hb : x - b + h(b) / hb;
}

}  // namespace tipdiv
