#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace tipdiv {

struct Exponential {
  double rate;

  bool operator==(const Exponential&) const = default;
};

struct Erlang {
  int shape;
  double rate;

  bool operator==(const Erlang&) const = default;
};

struct Deterministic {
  double atom;

  bool operator==(const Deterministic&) const = default;
};

/// Exponential law censored at `cap`: the mass beyond the cap sits as an atom at the cap.
struct TruncatedExponential {
  double rate;
  double cap;

  bool operator==(const TruncatedExponential&) const = default;
};

/**
 * Claim-size or intensity-jump law on [0, inf).
 *
 * All queries are closed form. `truncated_mean(x)` is E[U 1{U <= x}], so every
 * interval quantity on (a, b] is a difference of two right-continuous
 * evaluations and atoms are counted consistently with `cdf`.
 */
class Distribution {
 public:
  using Variant = std::variant<Exponential, Erlang, Deterministic, TruncatedExponential>;

  static Distribution exponential(double rate);
  static Distribution erlang(int shape, double rate);
  static Distribution deterministic(double atom);
  static Distribution truncated_exponential(double rate, double cap);

  double cdf(double x) const;
  double mean() const;
  double truncated_mean(double x) const;
  /// E[U 1{a < U <= b}].
  double partial_mean(double a, double b) const;

  /// Locations carrying positive point mass.
  std::vector<double> atoms() const;

  /// Inverse-transform style sampling from i.i.d. U(0,1] draws supplied by `uniform`.
  template <class UniformSource>
  double sample(UniformSource&& uniform) const;

  const Variant& variant() const { return law_; }
  std::string describe() const;

  bool operator==(const Distribution&) const = default;

 private:
  explicit Distribution(Variant law) : law_(law) {}
  Variant law_;
};

inline double cdf(const Distribution& dist, double x) { return dist.cdf(x); }
inline double mean(const Distribution& dist) { return dist.mean(); }
inline double partial_mean(const Distribution& dist, double a, double b) {
  return dist.partial_mean(a, b);
}

namespace detail {
/// P(Erlang(shape, rate) <= x), stable for small and large arguments.
double erlang_cdf(int shape, double rate, double x);
}  // namespace detail

template <class UniformSource>
double Distribution::sample(UniformSource&& uniform) const {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log(uniform()) / law.rate;
        } else if constexpr (std::is_same_v<T, Erlang>) {
          double total = 0.0;
          for (int i = 0; i < law.shape; ++i) total -= std::log(uniform());
          return total / law.rate;
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return law.atom;
        } else {
          return std::min(-std::log(uniform()) / law.rate, law.cap);
        }
      },
      law_);
}

}  // namespace tipdiv
