#include "tipdiv/distribution.hpp"

#include <sstream>
#include <stdexcept>

namespace tipdiv {

namespace detail {

double erlang_cdf(int shape, double rate, double x) {
  if (x <= 0.0) return 0.0;
  const double z = rate * x;
  if (z < shape + 1.0) {
    // Lower tail series e^{-z} sum_{j>=k} z^j / j!; avoids 1 - (1 - tiny).
    double term = std::exp(-z);
    for (int j = 1; j <= shape; ++j) term *= z / j;
    double sum = 0.0;
    for (int j = shape; j < shape + 400; ++j) {
      sum += term;
      term *= z / (j + 1);
      if (term < 1e-17 * sum) break;
    }
    return std::min(sum, 1.0);
  }
  double term = std::exp(-z);
  double upper = 0.0;
  for (int j = 0; j < shape; ++j) {
    upper += term;
    term *= z / (j + 1);
  }
  return 1.0 - upper;
}

}  // namespace detail

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Distribution Distribution::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential rate must be positive");
  return Distribution(Exponential{rate});
}

Distribution Distribution::erlang(int shape, double rate) {
  require(shape >= 1, "erlang shape must be >= 1");
  require(rate > 0.0 && std::isfinite(rate), "erlang rate must be positive");
  return Distribution(Erlang{shape, rate});
}

Distribution Distribution::deterministic(double atom) {
  require(atom >= 0.0 && std::isfinite(atom), "deterministic atom must be >= 0");
  return Distribution(Deterministic{atom});
}

Distribution Distribution::truncated_exponential(double rate, double cap) {
  require(rate > 0.0 && std::isfinite(rate), "truncated exponential rate must be positive");
  require(cap > 0.0 && std::isfinite(cap), "truncated exponential cap must be positive");
  return Distribution(TruncatedExponential{rate, cap});
}

double Distribution::cdf(double x) const {
  return std::visit(
      [x](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if (x < 0.0) return 0.0;
        if constexpr (std::is_same_v<T, Exponential>) {
          return -std::expm1(-law.rate * x);
        } else if constexpr (std::is_same_v<T, Erlang>) {
          return detail::erlang_cdf(law.shape, law.rate, x);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return x >= law.atom ? 1.0 : 0.0;
        } else {
          return x >= law.cap ? 1.0 : -std::expm1(-law.rate * x);
        }
      },
      law_);
}

double Distribution::mean() const {
  return std::visit(
      [](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / law.rate;
        } else if constexpr (std::is_same_v<T, Erlang>) {
          return law.shape / law.rate;
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return law.atom;
        } else {
          return -std::expm1(-law.rate * law.cap) / law.rate;
        }
      },
      law_);
}

// E[U 1{U <= x}] uses the identity u f_{k,r}(u) = (k/r) f_{k+1,r}(u) for Erlang densities.
double Distribution::truncated_mean(double x) const {
  return std::visit(
      [x](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if (x < 0.0) return 0.0;
        if constexpr (std::is_same_v<T, Exponential>) {
          return detail::erlang_cdf(2, law.rate, x) / law.rate;
        } else if constexpr (std::is_same_v<T, Erlang>) {
          return law.shape / law.rate * detail::erlang_cdf(law.shape + 1, law.rate, x);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return x >= law.atom ? law.atom : 0.0;
        } else {
          if (x < law.cap) return detail::erlang_cdf(2, law.rate, x) / law.rate;
          return detail::erlang_cdf(2, law.rate, law.cap) / law.rate +
                 law.cap * std::exp(-law.rate * law.cap);
        }
      },
      law_);
}

double Distribution::partial_mean(double a, double b) const {
  if (b < a) throw std::invalid_argument("partial_mean requires a <= b");
  return truncated_mean(b) - truncated_mean(a);
}

std::vector<double> Distribution::atoms() const {
  return std::visit(
      [](const auto& law) -> std::vector<double> {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          return {law.atom};
        } else if constexpr (std::is_same_v<T, TruncatedExponential>) {
          return {law.cap};
        } else {
          return {};
        }
      },
      law_);
}

std::string Distribution::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&out](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          out << "exponential(rate=" << law.rate << ")";
        } else if constexpr (std::is_same_v<T, Erlang>) {
          out << "erlang(shape=" << law.shape << ";rate=" << law.rate << ")";
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          out << "deterministic(atom=" << law.atom << ")";
        } else {
          out << "truncated_exponential(rate=" << law.rate << ";cap=" << law.cap << ")";
        }
      },
      law_);
  return out.str();
}

}  // namespace tipdiv
