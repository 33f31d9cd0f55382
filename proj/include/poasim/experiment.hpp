#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "poasim/config.hpp"
#include "poasim/metrics.hpp"

namespace poasim::experiment {

/// Improvements smaller than this (in percent) are float summation noise and
/// count as ties in the sign columns.
inline constexpr double kTiePct = 1e-9;

/// Sign of an improvement after applying kTiePct: +1 WBS better, -1 worse.
int improvement_sign(double improvement_pct);

/// One scenario run under both policies with the same seed.
struct PairResult {
  std::uint64_t seed = 0;
  metrics::MetricsReport tbs;
  metrics::MetricsReport wbs;
  std::vector<metrics::Delta> deltas;  // TBS is the baseline
  std::vector<std::string> violations;  // invariant breaches in either trace
};

PairResult run_pair(ScenarioConfig config, std::uint64_t seed);

/// Runs seeds sequentially; each run owns its state, so results do not depend
/// on order.
std::vector<PairResult> run_pairs(const ScenarioConfig& config, std::span<const std::uint64_t> seeds);

struct MetricSummary {
  std::string metric;
  double mean_tbs = 0.0;
  double mean_wbs = 0.0;
  double mean_improvement_pct = 0.0;
  std::size_t wbs_better = 0;
  std::size_t tbs_better = 0;
  std::size_t ties = 0;
};

std::vector<MetricSummary> aggregate(std::span<const PairResult> pairs);
const MetricSummary& find(std::span<const MetricSummary> summaries, const std::string& metric);

void write_per_seed_csv(std::span<const PairResult> pairs, std::ostream& out);
void write_aggregate_csv(std::span<const MetricSummary> summaries, std::ostream& out);

/// One cell of a validator-count x interval x policy grid.
struct GridCell {
  std::uint32_t validators = 0;
  double interval_s = 0.0;
  std::string policy;
  std::size_t seeds = 0;
  double response_mean_s = 0.0;
  double throughput_bps = 0.0;
  double validator_energy_j = 0.0;
};

std::vector<GridCell> sweep_grid(const ScenarioConfig& base, std::span<const std::uint32_t> validator_counts,
                                 std::span<const double> intervals, std::span<const std::uint64_t> seeds);

void write_grid_csv(std::span<const GridCell> cells, std::ostream& out);

/// Parses "1..10" or "1,2,5" (also mixed: "1..3,7").
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace poasim::experiment
