#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "prioq/oracle.hpp"

namespace prioq {
namespace {

TEST(BirthDeath, SingleServerIsGeometric) {
  const auto pi = oracle::birth_death_stationary({0.5, 1, 200});
  for (std::size_t k = 0; k < pi.size(); ++k) EXPECT_NEAR(pi[k], 0.5 * std::pow(0.5, k), 1e-12);
}

TEST(BirthDeath, VanishingLoadConcentratesAtZero) {
  for (int c : {1, 3}) {
    const auto pi = oracle::birth_death_stationary({1e-12, c, 50});
    EXPECT_NEAR(pi[0], 1.0, 1e-11);
  }
}

TEST(BirthDeath, MM2AtThreeQuartersLoad) {
  const auto pi = oracle::birth_death_stationary({1.5, 2, 200});
  EXPECT_NEAR(pi[0], 1.0 / 7.0, 1e-12);
  double mean = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) mean += k * pi[k];
  EXPECT_NEAR(mean, 24.0 / 7.0, 1e-12);
}

TEST(BirthDeath, Errors) {
  EXPECT_THROW(oracle::birth_death_stationary({2.0, 2, 100}), std::domain_error);
  EXPECT_THROW(oracle::birth_death_stationary({1.0, 3, 2}), std::invalid_argument);
  EXPECT_THROW(oracle::default_truncation(3.0, 2), std::domain_error);
}

TEST(BirthDeath, NormalizedWithSmallDetailedBalanceResidual) {
  for (int c : {1, 2, 3, 5}) {
    for (double load : {0.1, 0.5, 0.9}) {
      const double lambda = load * c;
      const auto pi = oracle::birth_death_stationary(lambda, c);
      EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-14);
      double residual = 0.0;
      for (std::size_t k = 0; k + 1 < pi.size(); ++k)
        residual = std::max(residual, std::abs(pi[k + 1] * std::min<double>(k + 1, c) - pi[k] * lambda));
      EXPECT_LT(residual, 1e-13);
    }
  }
}

TEST(BirthDeath, TruncationInsensitive) {
  for (int c : {1, 2, 5}) {
    for (double load : {0.1, 0.5, 0.9}) {
      const double lambda = load * c;
      const auto k = oracle::default_truncation(lambda, c);
      const auto a = oracle::birth_death_stationary({lambda, c, k});
      const auto b = oracle::birth_death_stationary({lambda, c, 2 * k});
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
  }
}

TEST(FiniteDifference, Basics) {
  EXPECT_EQ(oracle::finite_difference([](double) { return 3.0; }, 0.4, 1e-3), 0.0);
  EXPECT_NEAR(oracle::finite_difference([](double x) { return x; }, 0.4, 1e-3), 1.0, 1e-12);
  EXPECT_THROW(oracle::finite_difference([](double) { return ExtendedReal::infinity(); }, 0.4, 1e-3),
               std::domain_error);
  EXPECT_THROW(oracle::finite_difference([](double x) { return x; }, 0.4, 0.0), std::invalid_argument);
}

SimConfig config(double alpha, int c, double horizon, std::uint64_t stream) {
  SimConfig sc;
  sc.params = SystemParams(alpha, c);
  sc.horizon = horizon;
  sc.seed = 77;
  sc.stream = stream;
  return sc;
}

TEST(ReferenceSimulate, TraceContract) {
  const auto trace = oracle::reference_simulate(config(1.7, 2, 500.0, 0));
  ASSERT_EQ(trace.snapshots.size(), trace.records.size());
  std::size_t censored = 0;
  for (const auto& r : trace.records) {
    if (r.censored()) {
      ++censored;
      continue;
    }
    EXPECT_LE(r.arrival_time, *r.last_service_entry);
    EXPECT_LE(*r.last_service_entry, *r.departure_time);
  }
  EXPECT_EQ(censored, trace.final_population);
  EXPECT_EQ(trace, oracle::reference_simulate(config(1.7, 2, 500.0, 0)));
}

TEST(ReferenceSimulate, SingleServerSingleCustomer) {
  // With arrivals this rare, the first customer is served alone and its
  // sojourn is a unit-mean exponential.
  double total = 0.0;
  int n = 0;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto trace = oracle::reference_simulate(config(1e-4, 1, 1e4, r));
    if (trace.records.empty() || trace.records.front().censored()) continue;
    const auto& first = trace.records.front();
    if (trace.records.size() > 1 && trace.records[1].arrival_time < *first.departure_time) continue;
    EXPECT_EQ(*first.waiting(), 0.0);
    total += *first.sojourn();
    ++n;
  }
  ASSERT_GT(n, 1000);
  EXPECT_NEAR(total / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(ReferenceSimulate, MeanPopulationMatchesBirthDeath) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto trace = oracle::reference_simulate(config(1.5, 2, 1e4, r));
    for (const auto& s : trace.snapshots) total += static_cast<double>(s.priorities.size());
    count += trace.snapshots.size();
  }
  EXPECT_NEAR(total / static_cast<double>(count) / (24.0 / 7.0), 1.0, 0.05);
}

}  // namespace
}  // namespace prioq
