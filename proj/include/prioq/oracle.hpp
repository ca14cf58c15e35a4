#pragma once

// Independent checks for the closed forms and the simulator:
//   - a truncated birth-death chain solved by detailed balance,
//   - a reference simulator with a separate exponential clock per customer,
//   - central finite differences.
// None of this shares code with the formulas or the fast simulator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "prioq/extended_real.hpp"
#include "prioq/random.hpp"
#include "prioq/simulate.hpp"

namespace prioq::oracle {

struct BirthDeathSpec {
  double arrival_rate = 0.0;
  int servers = 1;
  std::size_t truncation = 0;  // K: states 0..K
};

/// K = c + ceil(60 / (1 - lambda/c)), capped at 10^6.
inline std::size_t default_truncation(double arrival_rate, int servers) {
  const double ratio = arrival_rate / servers;
  if (!(ratio < 1.0)) throw std::domain_error("default_truncation: unstable chain");
  const double k = servers + std::ceil(60.0 / (1.0 - ratio));
  return static_cast<std::size_t>(std::min(k, 1e6));
}

/// Stationary law of the M/M/c population chain truncated at K.
inline std::vector<double> birth_death_stationary(const BirthDeathSpec& spec) {
  if (spec.servers < 1) throw std::invalid_argument("birth_death_stationary: servers must be >= 1");
  if (!(spec.arrival_rate >= 0.0)) throw std::invalid_argument("birth_death_stationary: negative rate");
  if (!(spec.arrival_rate < spec.servers))
    throw std::domain_error("birth_death_stationary: arrival rate >= server count");
  if (spec.truncation < static_cast<std::size_t>(spec.servers))
    throw std::invalid_argument("birth_death_stationary: truncation below server count");

  // pi_{k+1} * min(k+1, c) = pi_k * lambda, from pi_0 = 1.
  std::vector<double> pi(spec.truncation + 1);
  pi[0] = 1.0;
  for (std::size_t k = 0; k < spec.truncation; ++k) {
    const double death = static_cast<double>(std::min<std::size_t>(k + 1, spec.servers));
    pi[k + 1] = pi[k] * spec.arrival_rate / death;
  }
  // Sum smallest-first.
  double total = 0.0;
  for (auto it = pi.rbegin(); it != pi.rend(); ++it) total += *it;
  for (double& v : pi) v /= total;
  return pi;
}

inline std::vector<double> birth_death_stationary(double arrival_rate, int servers) {
  return birth_death_stationary({arrival_rate, servers, default_truncation(arrival_rate, servers)});
}

/// (f(p+h) - f(p-h)) / 2h. Throws std::domain_error if either side is infinite.
template <typename F>
double finite_difference(F&& fn, double p, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference: h must be positive");
  auto as_real = [](auto v) -> double {
    if constexpr (std::is_same_v<decltype(v), ExtendedReal>) {
      if (v.is_infinite()) throw std::domain_error("finite_difference: infinite evaluation");
      return v.value();
    } else {
      if (!std::isfinite(v)) throw std::domain_error("finite_difference: infinite evaluation");
      return static_cast<double>(v);
    }
  };
  const double hi = as_real(fn(p + h));
  const double lo = as_real(fn(p - h));
  return (hi - lo) / (2.0 * h);
}

/// Reference simulator. Every entry into service starts a fresh Exp(1)
/// clock; a preempted customer's clock is thrown away. Same trace contract
/// as prioq::simulate, equal only in distribution.
inline SimTrace reference_simulate(const SimConfig& config) {
  config.validate();
  const double alpha = config.params.alpha();
  const std::size_t servers = static_cast<std::size_t>(config.params.servers());
  const double warmup_end = config.warmup_fraction * config.horizon;
  constexpr double kNever = std::numeric_limits<double>::infinity();

  // Its own random stream layout: a distinct stream tag keeps it from
  // replaying the fast simulator's numbers.
  RandomStream rng(config.seed, config.stream ^ 0x5eed0fcafe000000ull);

  struct Customer {
    double level;
    std::size_t id;
    bool operator<(const Customer& o) const {
      return level != o.level ? level > o.level : id < o.id;  // highest first
    }
  };
  std::set<Customer> present;
  std::map<std::size_t, double> completion;  // in-service id -> completion time

  SimTrace trace;
  auto quantile = [&](double u) { return config.priority_quantile ? config.priority_quantile(u) : u; };

  auto start_service = [&](const Customer& cust, double now) {
    completion[cust.id] = now + rng.exponential(1.0);
    trace.records[cust.id].last_service_entry = now;
  };

  double next_arrival = rng.exponential(alpha);
  for (;;) {
    double next_completion = kNever;
    std::size_t finishing = 0;
    for (const auto& [id, t] : completion) {
      if (t < next_completion) {
        next_completion = t;
        finishing = id;
      }
    }
    const double now = std::min(next_arrival, next_completion);
    if (now > config.horizon) break;
    ++trace.event_count;

    if (next_arrival <= next_completion) {
      if (now >= warmup_end) {
        Snapshot snap{now, {}};
        for (const auto& cust : present) snap.priorities.push_back(quantile(cust.level));
        std::reverse(snap.priorities.begin(), snap.priorities.end());
        trace.snapshots.push_back(std::move(snap));
      }
      const double u = rng.uniform();
      const Customer cust{u, trace.records.size()};
      CustomerRecord rec;
      rec.id = cust.id;
      rec.priority = quantile(u);
      rec.arrival_time = now;
      trace.records.push_back(rec);
      present.insert(cust);

      // Find where the newcomer landed among the top `servers`.
      std::size_t rank = 0;
      for (auto it = present.begin(); it != present.end() && it->id != cust.id; ++it) ++rank;
      if (rank < servers) {
        if (present.size() > servers) {
          // Bump whoever just fell to position `servers`.
          auto it = present.begin();
          std::advance(it, servers);
          completion.erase(it->id);
        }
        start_service(cust, now);
      }
      next_arrival = now + rng.exponential(alpha);
    } else {
      completion.erase(finishing);
      trace.records[finishing].departure_time = now;
      for (auto it = present.begin(); it != present.end(); ++it) {
        if (it->id == finishing) {
          present.erase(it);
          break;
        }
      }
      if (present.size() >= servers) {
        auto it = present.begin();
        std::advance(it, servers - 1);
        if (!completion.contains(it->id)) start_service(*it, now);
      }
    }
  }
  trace.final_population = present.size();
  return trace;
}

}  // namespace prioq::oracle
