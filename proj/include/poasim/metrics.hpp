#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poasim/trace.hpp"

namespace poasim::metrics {

struct Stats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;  // nearest-rank
  double max = 0.0;
  std::size_t count = 0;
};

/// Empty input yields nothing.
std::optional<Stats> summarize(std::vector<double> samples);

struct EnergyByClass {
  double sensors = 0.0;
  double heads = 0.0;
  double validators = 0.0;
  double total() const { return sensors + heads + validators; }
};

struct Counts {
  std::uint64_t created = 0;
  std::uint64_t committed = 0;
  std::uint64_t pending = 0;
  std::uint64_t dropped = 0;
};

struct MetricsReport {
  std::string policy;
  std::string fingerprint;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::optional<Stats> response_time;
  double throughput_bps = 0.0;  // committed transaction bytes per simulated second
  EnergyByClass energy_j;
  Counts counts;
};

/// Delay from creation to commit of every committed transaction.
std::optional<Stats> response_time_stats(std::span<const Record> records);

/// Committed bytes over the simulated duration; 0 when nothing committed.
double throughput(std::span<const Record> records);

/// Debit totals per node class.
EnergyByClass energy_report(std::span<const Record> records);

MetricsReport build_report(std::span<const Record> records);
MetricsReport build_report(const MetricsTrace& trace);

Record to_json(const MetricsReport& report);

class ConfigMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Delta {
  std::string metric;
  bool lower_is_better = true;
  double a = 0.0;
  double b = 0.0;
  double delta_pct = 0.0;        // (a - b) / a * 100
  double improvement_pct = 0.0;  // positive when b is better than a
};

/// Percent change of b relative to a, metric by metric. `a` is the baseline
/// (TBS in policy comparisons). Throws ConfigMismatch when the reports come
/// from different scenarios.
std::vector<Delta> compare(const MetricsReport& a, const MetricsReport& b);

/// Comma-separated table with a fixed header.
void write_comparison_csv(std::span<const Delta> deltas, std::ostream& out);

/// Replays the trace-level invariants: per-node energy conservation,
/// transaction accounting, causality, in-range timestamps, selection
/// conformance and chain linkage. Returns one line per violation.
std::vector<std::string> validate_trace(std::span<const Record> records, double energy_tol_j = 1e-9);

}  // namespace poasim::metrics
