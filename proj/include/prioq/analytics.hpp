#pragma once

// Closed-form equilibrium results for the preemptive M/M/c queue with
// continuous IID U([0,1]) priority levels and unit-rate servers.
//
// For a priority level p, the customers above p see an ordinary M/M/c queue
// with arrival rate (1-p)*alpha. Everything here is built on that reduction.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "prioq/extended_real.hpp"

namespace prioq {

/// Arrival rate and server count. Service rate is 1 per server.
class SystemParams {
public:
  SystemParams(double alpha, int servers) : alpha_(alpha), servers_(servers) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("SystemParams: alpha must be positive and finite");
    if (servers < 1) throw std::invalid_argument("SystemParams: server count must be >= 1");
  }

  double alpha() const { return alpha_; }
  int servers() const { return servers_; }
  double load() const { return alpha_ / servers_; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;

private:
  double alpha_;
  int servers_;
};

enum class Regime { Stable, CriticalOrUnstable };

struct StabilityRegime {
  Regime regime = Regime::Stable;
  /// 1 - c/alpha when alpha >= c; empty when every level is stable.
  std::optional<double> p_star;
};

namespace detail {

// Factorials and powers switch to log space above this server count.
inline constexpr int kLogSpaceServers = 20;

inline void check_level(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("priority level must lie in [0, 1]");
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// x^n / n! with 0^0 = 1.
inline double pow_over_factorial(double x, int n, bool log_space) {
  if (n == 0) return 1.0;
  if (x == 0.0) return 0.0;
  if (log_space) return std::exp(n * std::log(x) - std::lgamma(n + 1.0));
  return std::pow(x, n) / factorial(n);
}

// Quantities of the M/M/c tail queue at level p, assuming stability.
struct TailQueue {
  double alpha;  // total arrival rate
  int c;
  double x;    // tail arrival rate (1-p)*alpha
  double rho;  // x / c
  bool log_space;

  double term(int n) const { return pow_over_factorial(x, n, log_space); }
};

inline TailQueue tail_queue(const SystemParams& params, double p) {
  const double x = (1.0 - p) * params.alpha();
  return {params.alpha(), params.servers(), x, x / params.servers(),
          params.servers() > kLogSpaceServers};
}

inline void require_stable(const SystemParams& params, double p, const char* what) {
  if (!((1.0 - p) * params.alpha() < params.servers()))
    throw std::domain_error(std::string(what) + ": (1-p)*alpha >= c, no equilibrium distribution");
}

inline double p0_mass(const TailQueue& q) {
  double sum = 0.0;
  for (int i = 0; i < q.c; ++i) sum += q.term(i);
  sum += q.term(q.c) / (1.0 - q.rho);
  return 1.0 / sum;
}

inline double p0_derivative(const TailQueue& q, double P0) {
  // c * x^(c-1) / c! == x^(c-1) / (c-1)!, and likewise for each i in the sum.
  const double one_minus = 1.0 - q.rho;
  double bracket = 0.0;
  for (int i = 1; i < q.c; ++i) bracket += q.alpha * q.term(i - 1);
  bracket += q.alpha * q.term(q.c - 1) / one_minus;
  bracket += q.alpha * q.term(q.c) / (q.c * one_minus * one_minus);
  return -P0 * P0 * bracket;
}

inline double expected_tail_count(const TailQueue& q) {
  const double P0 = p0_mass(q);
  const double one_minus = 1.0 - q.rho;
  return q.x + q.x * q.term(q.c) * P0 / (q.c * one_minus * one_minus);
}

inline double priority_density(const TailQueue& q) {
  const double P0 = p0_mass(q);
  const double dP0 = p0_derivative(q, P0);
  const double Fc = q.term(q.c);
  const double one_minus = 1.0 - q.rho;
  const double c = q.c;
  const double first = (q.alpha * (c + 1.0) * Fc * P0 + q.x * Fc * dP0) / (c * one_minus * one_minus);
  const double second = 2.0 * q.alpha * q.x * Fc * P0 / (c * c * one_minus * one_minus * one_minus);
  return q.alpha + first + second;
}

}  // namespace detail

/// True iff the tail queue above p is stable: (1-p)*alpha < c. Exact
/// floating-point comparison, no tolerance.
inline bool is_stable_at(const SystemParams& params, double p) {
  return (1.0 - p) * params.alpha() < params.servers();
}

inline StabilityRegime stability_threshold(const SystemParams& params) {
  if (params.alpha() < params.servers()) return {Regime::Stable, std::nullopt};
  return {Regime::CriticalOrUnstable, 1.0 - params.servers() / params.alpha()};
}

/// P(no customer above p) in equilibrium. Throws std::domain_error when
/// (1-p)*alpha >= c.
inline double p0_mass(const SystemParams& params, double p) {
  detail::check_level(p);
  detail::require_stable(params, p, "p0_mass");
  return detail::p0_mass(detail::tail_queue(params, p));
}

/// -dP0/dp. Negative throughout the stable region.
inline double p0_derivative(const SystemParams& params, double p) {
  detail::check_level(p);
  detail::require_stable(params, p, "p0_derivative");
  const auto q = detail::tail_queue(params, p);
  return detail::p0_derivative(q, detail::p0_mass(q));
}

/// P(Xbar(p) = k): equilibrium law of the number of customers above p.
inline double tail_pmf(const SystemParams& params, double p, long long k) {
  detail::check_level(p);
  if (k < 0) throw std::invalid_argument("tail_pmf: k must be nonnegative");
  detail::require_stable(params, p, "tail_pmf");
  const auto q = detail::tail_queue(params, p);
  const double P0 = detail::p0_mass(q);
  if (k == 0) return P0;
  if (k <= q.c) return P0 * q.term(static_cast<int>(k));
  return P0 * q.term(q.c) * std::pow(q.rho, static_cast<double>(k - q.c));
}

/// E[Xbar(p)]; +inf when the tail queue is unstable.
inline ExtendedReal expected_tail_count(const SystemParams& params, double p) {
  detail::check_level(p);
  if (!is_stable_at(params, p)) return ExtendedReal::infinity();
  return ExtendedReal::finite(detail::expected_tail_count(detail::tail_queue(params, p)));
}

/// m(p), the density of the mean equilibrium measure with respect to
/// Lebesgue measure on [0,1]. Equals -d/dp E[Xbar(p)].
inline ExtendedReal priority_density(const SystemParams& params, double p) {
  detail::check_level(p);
  if (!is_stable_at(params, p)) return ExtendedReal::infinity();
  return ExtendedReal::finite(detail::priority_density(detail::tail_queue(params, p)));
}

/// Mean number of customers with priority in [a, b].
inline ExtendedReal mean_measure(const SystemParams& params, double a, double b) {
  detail::check_level(a);
  detail::check_level(b);
  if (a > b) throw std::invalid_argument("mean_measure: a must not exceed b");
  if (a == b) return ExtendedReal::finite(0.0);
  const auto upper = expected_tail_count(params, a);
  if (upper.is_infinite()) return upper;
  return ExtendedReal::finite(upper.value() - expected_tail_count(params, b).value());
}

/// Expected sojourn time of a customer with priority p: m(p)/alpha.
inline ExtendedReal sojourn_time(const SystemParams& params, double p) {
  return priority_density(params, p) / params.alpha();
}

/// Expected waiting time (arrival to start of the final service period).
inline ExtendedReal waiting_time(const SystemParams& params, double p) {
  return sojourn_time(params, p) - 1.0;
}

/// Maps a uniform level through a caller-supplied quantile function.
/// Scheduling depends only on relative order, so any nondecreasing
/// quantile leaves the dynamics unchanged.
template <typename Quantile>
double quantile_transform(const Quantile& quantile, double p) {
  return quantile(p);
}

}  // namespace prioq
