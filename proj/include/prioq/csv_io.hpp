#pragma once

// CSV formats for traces, snapshots and curves.
//
//   trace:     customer_id,priority,arrival_time,last_service_entry,departure_time
//              (empty last_service_entry: never served; empty departure_time: censored)
//   snapshots: snapshot_time,priorities   (priorities ';'-separated, ascending)
//   curve:     p,value                     (value: number, "inf", or empty if undefined)
//
// Numbers are written in shortest round-trip form, so write/read is exact.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "prioq/estimate.hpp"
#include "prioq/extended_real.hpp"
#include "prioq/registry.hpp"
#include "prioq/simulate.hpp"

namespace prioq::csv {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_value(const CurveValue& v) {
  if (!v) return {};
  if (v->is_infinite()) return "inf";
  return format_number(v->value());
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("csv: bad number '" + std::string(s) + "'");
  return v;
}

inline std::optional<double> parse_optional(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_number(s);
}

inline CurveValue parse_value(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s == "inf") return ExtendedReal::infinity();
  return ExtendedReal::finite(parse_number(s));
}

/// Splits one CSV line, honouring double-quoted fields.
inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

namespace detail {

inline std::vector<std::vector<std::string>> read_rows(std::istream& in, std::string_view header,
                                                       std::size_t width) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("csv: unexpected header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != width) throw std::runtime_error("csv: wrong field count in '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

// ---- trace -----------------------------------------------------------------

inline constexpr std::string_view kTraceHeader =
    "customer_id,priority,arrival_time,last_service_entry,departure_time";

inline void write_record(std::ostream& out, const CustomerRecord& r) {
  out << r.id << ',' << format_number(r.priority) << ',' << format_number(r.arrival_time) << ',';
  if (r.last_service_entry) out << format_number(*r.last_service_entry);
  out << ',';
  if (r.departure_time) out << format_number(*r.departure_time);
  out << '\n';
}

inline void write_trace(std::ostream& out, std::span<const CustomerRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) write_record(out, r);
}

inline std::vector<CustomerRecord> read_trace(std::istream& in) {
  std::vector<CustomerRecord> out;
  for (const auto& f : detail::read_rows(in, kTraceHeader, 5)) {
    CustomerRecord r;
    r.id = std::stoull(f[0]);
    r.priority = parse_number(f[1]);
    r.arrival_time = parse_number(f[2]);
    r.last_service_entry = parse_optional(f[3]);
    r.departure_time = parse_optional(f[4]);
    out.push_back(r);
  }
  return out;
}

// ---- snapshots -------------------------------------------------------------

inline constexpr std::string_view kSnapshotHeader = "snapshot_time,priorities";

template <typename Priorities>
void write_snapshot(std::ostream& out, double time, const Priorities& priorities) {
  out << format_number(time) << ',';
  bool first = true;
  for (double p : priorities) {
    if (!first) out << ';';
    out << format_number(p);
    first = false;
  }
  out << '\n';
}

inline void write_snapshots(std::ostream& out, const SnapshotSeries& series) {
  out << kSnapshotHeader << '\n';
  for (const auto& s : series) write_snapshot(out, s.time, s.priorities);
}

/// Streams snapshots to a file as the simulation runs; usable as a
/// simulate() sink. Writes registry levels, i.e. untransformed priorities.
class SnapshotWriter {
public:
  explicit SnapshotWriter(std::ostream& out) : out_(&out) { *out_ << kSnapshotHeader << '\n'; }

  void operator()(double time, const PriorityRegistry& registry) {
    *out_ << format_number(time) << ',';
    bool first = true;
    registry.for_each([&](const RegistryEntry& e) {
      if (!first) *out_ << ';';
      *out_ << format_number(e.priority);
      first = false;
    });
    *out_ << '\n';
  }

private:
  std::ostream* out_;
};

inline SnapshotSeries read_snapshots(std::istream& in) {
  SnapshotSeries out;
  for (const auto& f : detail::read_rows(in, kSnapshotHeader, 2)) {
    Snapshot s;
    s.time = parse_number(f[0]);
    std::string_view rest = f[1];
    while (!rest.empty()) {
      const auto cut = rest.find(';');
      s.priorities.push_back(parse_number(rest.substr(0, cut)));
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- curves ----------------------------------------------------------------

inline constexpr std::string_view kCurveHeader = "p,value";

inline void write_curve(std::ostream& out, const CurveEstimate& curve) {
  out << kCurveHeader << '\n';
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << format_number(curve.grid.center(i)) << ',' << format_value(curve.values[i]) << '\n';
}

/// Dense samples of an analytic function, same two-column layout.
template <typename F>
void write_sampled(std::ostream& out, F&& fn, std::size_t points) {
  if (points < 2) throw std::invalid_argument("write_sampled: need at least two points");
  out << kCurveHeader << '\n';
  for (std::size_t k = 0; k < points; ++k) {
    const double p = static_cast<double>(k) / static_cast<double>(points - 1);
    out << format_number(p) << ',' << format_value(CurveValue(fn(p))) << '\n';
  }
}

/// Parses a bin-center curve file; the grid is inferred from the row count
/// and the centers are checked against it.
inline CurveEstimate read_curve(std::istream& in) {
  const auto rows = detail::read_rows(in, kCurveHeader, 2);
  const auto grid = BinGrid::with_bins(rows.size());
  CurveEstimate curve{grid, std::vector<CurveValue>(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (parse_number(rows[i][0]) != grid.center(i))
      throw std::runtime_error("csv: curve row " + std::to_string(i) + " is not at a bin center");
    curve.values[i] = parse_value(rows[i][1]);
  }
  return curve;
}

}  // namespace prioq::csv
