#pragma once

// Experiment runner: replicated simulations, pooled estimates, comparison
// against the closed forms, and the on-disk artifact set.
//
// Layout under output_dir:
//   rep_000/trace.csv  rep_000/snapshots.csv  rep_000/{m,s,w}_hat.csv
//   pooled/{m,s,w}_hat.csv
//   analytic/{m,s,w}.csv        dense samples at curve_resolution points
//   summary.json
//
// Replication r runs the random stream (seed, r), so any single replication
// can be regenerated in isolation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prioq/analytics.hpp"
#include "prioq/csv_io.hpp"
#include "prioq/estimate.hpp"
#include "prioq/simulate.hpp"

namespace prioq {

struct ExperimentConfig {
  double alpha = 1.5;
  int servers = 2;
  double horizon = 2000.0;
  double delta = 0.05;
  std::uint64_t seed = 1;
  int replications = 1;
  CensoredPolicy policy = CensoredPolicy::Infinite;
  double warmup_fraction = 0.0;
  std::filesystem::path output_dir = "prioq-out";
  int curve_resolution = 201;
  int workers = 0;  // 0: one per hardware thread
  bool write_snapshots = true;

  SystemParams params() const { return SystemParams(alpha, servers); }
  BinGrid grid() const { return BinGrid(delta); }

  void validate() const {
    (void)params();
    (void)grid();
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("horizon must be finite and nonnegative");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
      throw std::invalid_argument("warmup fraction must lie in [0, 1)");
    if (curve_resolution < 2) throw std::invalid_argument("curve resolution must be >= 2");
    if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  }

  SimConfig sim_config(std::size_t replication) const {
    SimConfig sc;
    sc.params = params();
    sc.horizon = horizon;
    sc.seed = seed;
    sc.stream = replication;
    sc.warmup_fraction = warmup_fraction;
    return sc;
  }
};

/// Fig. 1 setting: stable, c = 2, alpha = 1.5.
inline ExperimentConfig stable_paper_preset() {
  ExperimentConfig c;
  c.alpha = 1.5;
  c.servers = 2;
  c.delta = 0.05;
  c.horizon = 2000.0;
  return c;
}

/// Fig. 2 setting: overloaded, c = 2, alpha = 5.
inline ExperimentConfig unstable_paper_preset() {
  ExperimentConfig c = stable_paper_preset();
  c.alpha = 5.0;
  return c;
}

inline ExperimentConfig preset(const std::string& name) {
  if (name == "stable-paper") return stable_paper_preset();
  if (name == "unstable-paper") return unstable_paper_preset();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

inline std::string to_string(CensoredPolicy p) {
  return p == CensoredPolicy::Infinite ? "infinite" : "exclude";
}

inline CensoredPolicy parse_policy(const std::string& s) {
  if (s == "infinite") return CensoredPolicy::Infinite;
  if (s == "exclude") return CensoredPolicy::Exclude;
  throw std::invalid_argument("unknown censored policy '" + s + "'");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"alpha", c.alpha},
          {"servers", c.servers},
          {"horizon", c.horizon},
          {"delta", c.delta},
          {"seed", c.seed},
          {"replications", c.replications},
          {"policy", to_string(c.policy)},
          {"warmup", c.warmup_fraction},
          {"out", c.output_dir.string()},
          {"resolution", c.curve_resolution},
          {"workers", c.workers},
          {"write_snapshots", c.write_snapshots}};
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "servers") c.servers = v.get<int>();
    else if (key == "horizon") c.horizon = v.get<double>();
    else if (key == "delta") c.delta = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "replications") c.replications = v.get<int>();
    else if (key == "policy") c.policy = parse_policy(v.get<std::string>());
    else if (key == "warmup") c.warmup_fraction = v.get<double>();
    else if (key == "out") c.output_dir = v.get<std::string>();
    else if (key == "resolution") c.curve_resolution = v.get<int>();
    else if (key == "workers") c.workers = v.get<int>();
    else if (key == "write_snapshots") c.write_snapshots = v.get<bool>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

// ----------------------------------------------------------------------------
// Curve comparison

struct ComparisonRow {
  double p = 0.0;
  ExtendedReal analytic;
  CurveValue estimate;
  std::optional<double> abs_err;
  std::optional<double> rel_err;
};

struct CompareOptions {
  /// Keep only bins whose analytic value is finite.
  bool stable_region_only = false;
  /// Bins with |center - threshold| < band are left out of the
  /// finiteness-classification counts.
  std::optional<double> threshold;
  double band = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::size_t classification_agree = 0;
  std::size_t classification_disagree = 0;
  std::size_t undefined_bins = 0;
  std::size_t near_threshold = 0;
  std::size_t finite_pairs = 0;
  std::optional<double> max_rel_err;
  std::optional<double> mean_rel_err;
};

template <typename Analytic>
ComparisonReport compare_curves(const CurveEstimate& estimate, Analytic&& analytic,
                                const CompareOptions& options = {}) {
  ComparisonReport report;
  double rel_sum = 0.0;
  std::size_t rel_count = 0;
  for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
    ComparisonRow row;
    row.p = estimate.grid.center(i);
    row.analytic = analytic(row.p);
    row.estimate = estimate.values[i];
    if (options.stable_region_only && row.analytic.is_infinite()) continue;

    if (!row.estimate) {
      ++report.undefined_bins;
    } else if (options.threshold && std::abs(row.p - *options.threshold) < options.band) {
      ++report.near_threshold;
    } else if (row.estimate->is_finite() == row.analytic.is_finite()) {
      ++report.classification_agree;
    } else {
      ++report.classification_disagree;
    }

    if (row.estimate && row.estimate->is_finite() && row.analytic.is_finite()) {
      ++report.finite_pairs;
      const double a = row.analytic.value();
      row.abs_err = std::abs(row.estimate->value() - a);
      if (a != 0.0) {
        row.rel_err = *row.abs_err / std::abs(a);
        rel_sum += *row.rel_err;
        ++rel_count;
        report.max_rel_err = std::max(report.max_rel_err.value_or(0.0), *row.rel_err);
      }
    }
    report.rows.push_back(row);
  }
  if (rel_count > 0) report.mean_rel_err = rel_sum / static_cast<double>(rel_count);
  return report;
}

// ----------------------------------------------------------------------------
// Replications

struct ReplicationResult {
  DensityAccumulator density;
  DelayAccumulator sojourn;
  DelayAccumulator waiting;
  std::size_t customers = 0;
  std::size_t censored = 0;
  std::size_t events = 0;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  auto out = open_output(path);
  writer(out);
  close_output(out, path);
}

inline std::string replication_dir_name(std::size_t r) {
  std::ostringstream os;
  os << "rep_" << std::setw(3) << std::setfill('0') << r;
  return os.str();
}

}  // namespace detail

/// Runs replication r. When `dir` is set, writes its trace, snapshots and
/// estimate curves there.
inline ReplicationResult run_replication(const ExperimentConfig& config, std::size_t r,
                                         const std::optional<std::filesystem::path>& dir = {}) {
  const BinGrid grid = config.grid();
  ReplicationResult result{DensityAccumulator(grid), DelayAccumulator(grid, DelayKind::Sojourn),
                           DelayAccumulator(grid, DelayKind::Waiting)};
  const SimConfig sc = config.sim_config(r);

  SimTrace trace;
  if (dir && config.write_snapshots) {
    const auto path = *dir / "snapshots.csv";
    auto out = detail::open_output(path);
    csv::SnapshotWriter writer(out);
    trace = simulate(sc, [&](double t, const PriorityRegistry& reg) {
      result.density.observe(reg);
      writer(t, reg);
    });
    detail::close_output(out, path);
  } else {
    trace = simulate(sc, result.density);
  }

  const double warmup_end = config.warmup_fraction * config.horizon;
  for (const auto& rec : trace.records) {
    if (rec.arrival_time < warmup_end) continue;
    result.sojourn.add(rec);
    result.waiting.add(rec);
  }
  result.customers = trace.records.size();
  result.censored = trace.final_population;
  result.events = trace.event_count;

  if (dir) {
    detail::write_file(*dir / "trace.csv", [&](std::ostream& o) { csv::write_trace(o, trace.records); });
    if (result.density.observations() > 0)
      detail::write_file(*dir / "m_hat.csv",
                         [&](std::ostream& o) { csv::write_curve(o, result.density.curve()); });
    detail::write_file(*dir / "s_hat.csv",
                       [&](std::ostream& o) { csv::write_curve(o, result.sojourn.curve(config.policy)); });
    detail::write_file(*dir / "w_hat.csv",
                       [&](std::ostream& o) { csv::write_curve(o, result.waiting.curve(config.policy)); });
  }
  return result;
}

/// Runs all replications on up to `workers` threads. Results are returned in
/// replication order regardless of scheduling.
inline std::vector<ReplicationResult> run_replications(const ExperimentConfig& config,
                                                       bool write_artifacts) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.replications);
  std::vector<std::optional<ReplicationResult>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n) return;
      try {
        std::optional<std::filesystem::path> dir;
        if (write_artifacts) {
          dir = config.output_dir / detail::replication_dir_name(r);
          std::filesystem::create_directories(*dir);
        }
        slots[r] = run_replication(config, r, dir);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };

  std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ReplicationResult> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct PooledEstimates {
  DensityAccumulator density;
  DelayAccumulator sojourn;
  DelayAccumulator waiting;
};

inline PooledEstimates pool(const BinGrid& grid, const std::vector<ReplicationResult>& reps) {
  PooledEstimates p{DensityAccumulator(grid), DelayAccumulator(grid, DelayKind::Sojourn),
                    DelayAccumulator(grid, DelayKind::Waiting)};
  for (const auto& r : reps) {
    p.density.merge(r.density);
    p.sojourn.merge(r.sojourn);
    p.waiting.merge(r.waiting);
  }
  return p;
}

// ----------------------------------------------------------------------------
// Full experiment

struct ExperimentResult {
  std::optional<double> p_star;
  std::optional<CurveEstimate> density;  // empty when no snapshot was taken
  CurveEstimate sojourn;
  CurveEstimate waiting;
  std::optional<ComparisonReport> density_report;
  ComparisonReport sojourn_report;
  ComparisonReport waiting_report;
  nlohmann::json summary;
};

namespace detail {

inline nlohmann::json json_value(const CurveValue& v) {
  if (!v) return nullptr;
  if (v->is_infinite()) return "inf";
  return v->value();
}

inline nlohmann::json json_optional(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

inline nlohmann::json report_json(const ComparisonReport& r) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& row : r.rows) {
    bins.push_back({{"p", row.p},
                    {"analytic", json_value(row.analytic)},
                    {"estimate", json_value(row.estimate)},
                    {"abs_err", json_optional(row.abs_err)},
                    {"rel_err", json_optional(row.rel_err)}});
  }
  return {{"bins", bins},
          {"classification_agree", r.classification_agree},
          {"classification_disagree", r.classification_disagree},
          {"undefined_bins", r.undefined_bins},
          {"near_threshold", r.near_threshold},
          {"finite_pairs", r.finite_pairs},
          {"max_rel_err", json_optional(r.max_rel_err)},
          {"mean_rel_err", json_optional(r.mean_rel_err)}};
}

}  // namespace detail

/// Runs the configured experiment and writes the artifact set.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const SystemParams params = config.params();
  const BinGrid grid = config.grid();
  const auto regime = stability_threshold(params);

  std::filesystem::create_directories(config.output_dir);
  const auto reps = run_replications(config, true);
  const auto pooled = pool(grid, reps);

  ExperimentResult result{regime.p_star,
                          std::nullopt,
                          pooled.sojourn.curve(config.policy),
                          pooled.waiting.curve(config.policy),
                          std::nullopt,
                          {},
                          {},
                          {}};
  CompareOptions options;
  options.threshold = regime.p_star;
  options.band = grid.delta();

  auto m = [&](double p) { return priority_density(params, p); };
  auto s = [&](double p) { return sojourn_time(params, p); };
  auto w = [&](double p) { return waiting_time(params, p); };

  const auto pooled_dir = config.output_dir / "pooled";
  const auto analytic_dir = config.output_dir / "analytic";
  std::filesystem::create_directories(pooled_dir);
  std::filesystem::create_directories(analytic_dir);

  if (pooled.density.observations() > 0) {
    result.density = pooled.density.curve();
    result.density_report = compare_curves(*result.density, m, options);
    detail::write_file(pooled_dir / "m_hat.csv", [&](std::ostream& o) { csv::write_curve(o, *result.density); });
  }
  result.sojourn_report = compare_curves(result.sojourn, s, options);
  result.waiting_report = compare_curves(result.waiting, w, options);
  detail::write_file(pooled_dir / "s_hat.csv", [&](std::ostream& o) { csv::write_curve(o, result.sojourn); });
  detail::write_file(pooled_dir / "w_hat.csv", [&](std::ostream& o) { csv::write_curve(o, result.waiting); });

  const auto points = static_cast<std::size_t>(config.curve_resolution);
  detail::write_file(analytic_dir / "m.csv", [&](std::ostream& o) { csv::write_sampled(o, m, points); });
  detail::write_file(analytic_dir / "s.csv", [&](std::ostream& o) { csv::write_sampled(o, s, points); });
  detail::write_file(analytic_dir / "w.csv", [&](std::ostream& o) { csv::write_sampled(o, w, points); });

  nlohmann::json replications = nlohmann::json::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    replications.push_back({{"index", r},
                            {"directory", detail::replication_dir_name(r)},
                            {"seed", config.seed},
                            {"stream", r},
                            {"customers", reps[r].customers},
                            {"censored", reps[r].censored},
                            {"events", reps[r].events},
                            {"snapshots", reps[r].density.observations()}});
  }

  nlohmann::json& summary = result.summary;
  summary["config"] = to_json(config);
  summary["regime"] = regime.regime == Regime::Stable ? "stable" : "critical-or-unstable";
  summary["p_star"] = detail::json_optional(regime.p_star);
  summary["replications"] = replications;
  summary["estimates"]["m"] =
      result.density_report ? detail::report_json(*result.density_report) : nlohmann::json(nullptr);
  summary["estimates"]["s"] = detail::report_json(result.sojourn_report);
  summary["estimates"]["w"] = detail::report_json(result.waiting_report);

  detail::write_file(config.output_dir / "summary.json",
                     [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
  return result;
}

}  // namespace prioq
