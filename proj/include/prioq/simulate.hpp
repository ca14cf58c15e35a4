#pragma once

// Discrete-event simulation of the preemptive priority M/M/c queue.
//
// State is the registry of customers present. At every instant the min(N, c)
// highest-ordered customers are in service. Departures use one aggregate
// exponential clock of rate min(N, c), with the departing customer chosen
// uniformly among those in service; by memorylessness this has the same law
// as per-customer unit-rate clocks that restart on every service entry.
//
// Random stream consumption order, per event:
//   arrival:   inter-arrival gap for the next arrival, then the priority draw
//   departure: choice of departing customer
//   then, if the system is nonempty, a fresh departure-clock draw.
// The stream never depends on the priority quantile, which only relabels
// logged priorities, so runs with different quantiles share random numbers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prioq/analytics.hpp"
#include "prioq/random.hpp"
#include "prioq/registry.hpp"

namespace prioq {

struct CustomerRecord {
  CustomerId id = 0;
  double priority = 0.0;  // after the quantile transform
  double arrival_time = 0.0;
  std::optional<double> last_service_entry;
  std::optional<double> departure_time;  // empty: censored at the horizon

  bool censored() const { return !departure_time.has_value(); }
  std::optional<double> sojourn() const {
    if (!departure_time) return std::nullopt;
    return *departure_time - arrival_time;
  }
  /// Arrival to the start of the final service period.
  std::optional<double> waiting() const {
    if (!departure_time) return std::nullopt;
    return *last_service_entry - arrival_time;
  }

  friend bool operator==(const CustomerRecord&, const CustomerRecord&) = default;
};

/// System state seen by an arriving customer, just before it joins.
struct Snapshot {
  double time = 0.0;
  std::vector<double> priorities;  // ascending

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

using SnapshotSeries = std::vector<Snapshot>;

struct SimConfig {
  SystemParams params{1.0, 1};
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Snapshots earlier than warmup_fraction * horizon are not emitted.
  double warmup_fraction = 0.0;
  /// Maps the uniform draw to the logged priority; empty means identity.
  std::function<double(double)> priority_quantile;

  void validate() const {
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("SimConfig: horizon must be finite and nonnegative");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
      throw std::invalid_argument("SimConfig: warmup_fraction must lie in [0, 1)");
  }
};

struct SimTrace {
  std::vector<CustomerRecord> records;  // indexed by customer id
  SnapshotSeries snapshots;
  std::size_t event_count = 0;
  std::size_t final_population = 0;

  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Receives (time, registry) right before each arriving customer is inserted.
/// Registry priorities are the uniform scheduling levels.
template <typename Sink>
concept SnapshotSink = requires(Sink& s, double t, const PriorityRegistry& r) { s(t, r); };

namespace detail {

inline double apply_quantile(const SimConfig& config, double u) {
  return config.priority_quantile ? config.priority_quantile(u) : u;
}

}  // namespace detail

/// Runs one replication, streaming snapshots to `sink`. The returned trace
/// has an empty snapshot series.
template <SnapshotSink Sink>
SimTrace simulate(const SimConfig& config, Sink&& sink) {
  config.validate();
  const double alpha = config.params.alpha();
  const int servers = config.params.servers();
  const auto c = static_cast<std::size_t>(servers);
  const double horizon = config.horizon;
  const double warmup_end = config.warmup_fraction * horizon;
  constexpr double kNever = std::numeric_limits<double>::infinity();

  RandomStream rng(config.seed, config.stream);
  PriorityRegistry registry;
  SimTrace trace;

  double next_arrival = rng.exponential(alpha);
  double next_departure = kNever;

  for (;;) {
    const bool is_arrival = next_arrival <= next_departure;
    const double now = is_arrival ? next_arrival : next_departure;
    if (now > horizon) break;
    ++trace.event_count;
    const std::size_t before = registry.size();

    if (is_arrival) {
      next_arrival = now + rng.exponential(alpha);
      const double u = rng.uniform();
      if (now >= warmup_end) sink(now, std::as_const(registry));

      const auto id = static_cast<CustomerId>(trace.records.size());
      CustomerRecord rec;
      rec.id = id;
      rec.priority = detail::apply_quantile(config, u);
      rec.arrival_time = now;
      const RegistryEntry entry{u, id};
      registry.insert(entry);
      // Joins service if a server is free or it outranks the lowest in-service
      // customer; in the latter case that customer drops to waiting.
      if (before < c || registry.rank_from_top(entry) < c) rec.last_service_entry = now;
      trace.records.push_back(std::move(rec));
    } else {
      const std::size_t busy = std::min(before, c);
      const RegistryEntry leaving = registry.at_rank_from_top(rng.index(busy));
      registry.erase(leaving);
      trace.records[leaving.id].departure_time = now;
      if (before > c) {
        // The highest waiting customer takes the freed server.
        const RegistryEntry promoted = registry.at_rank_from_top(c - 1);
        trace.records[promoted.id].last_service_entry = now;
      }
    }

    const std::size_t population = registry.size();
    next_departure = population > 0
                         ? now + rng.exponential(static_cast<double>(std::min(population, c)))
                         : kNever;
  }

  trace.final_population = registry.size();
  return trace;
}

/// Runs one replication and records the full snapshot series. Snapshot
/// priorities are the logged (transformed) values.
inline SimTrace simulate(const SimConfig& config) {
  SnapshotSeries snapshots;
  auto trace = simulate(config, [&](double t, const PriorityRegistry& r) {
    Snapshot s{t, {}};
    s.priorities.reserve(r.size());
    r.for_each([&](const RegistryEntry& e) {
      s.priorities.push_back(detail::apply_quantile(config, e.priority));
    });
    snapshots.push_back(std::move(s));
  });
  trace.snapshots = std::move(snapshots);
  return trace;
}

}  // namespace prioq
