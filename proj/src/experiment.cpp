#include "poasim/experiment.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "poasim/engine.hpp"

namespace poasim::experiment {

int improvement_sign(double improvement_pct) {
  if (improvement_pct > kTiePct) return 1;
  if (improvement_pct < -kTiePct) return -1;
  return 0;
}

PairResult run_pair(ScenarioConfig config, std::uint64_t seed) {
  PairResult out;
  out.seed = seed;
  config.seed = seed;
  for (auto policy : {consensus::SelectionPolicy::kTbs, consensus::SelectionPolicy::kWbs}) {
    config.policy = policy;
    const auto trace = engine::run(config);
    const auto records = trace.records();
    for (auto& v : metrics::validate_trace(records))
      out.violations.push_back(std::string(consensus::to_string(policy)) + " seed " + std::to_string(seed) + ": " + v);
    auto report = metrics::build_report(records);
    (policy == consensus::SelectionPolicy::kTbs ? out.tbs : out.wbs) = std::move(report);
  }
  out.deltas = metrics::compare(out.tbs, out.wbs);
  return out;
}

std::vector<PairResult> run_pairs(const ScenarioConfig& config, std::span<const std::uint64_t> seeds) {
  std::vector<PairResult> out;
  out.reserve(seeds.size());
  for (auto seed : seeds) out.push_back(run_pair(config, seed));
  return out;
}

std::vector<MetricSummary> aggregate(std::span<const PairResult> pairs) {
  std::vector<MetricSummary> out;
  if (pairs.empty()) return out;
  for (std::size_t m = 0; m < pairs.front().deltas.size(); ++m) {
    MetricSummary s;
    s.metric = pairs.front().deltas[m].metric;
    for (const auto& p : pairs) {
      const auto& d = p.deltas[m];
      s.mean_tbs += d.a;
      s.mean_wbs += d.b;
      s.mean_improvement_pct += d.improvement_pct;
      switch (improvement_sign(d.improvement_pct)) {
        case 1: ++s.wbs_better; break;
        case -1: ++s.tbs_better; break;
        default: ++s.ties;
      }
    }
    const auto n = static_cast<double>(pairs.size());
    s.mean_tbs /= n;
    s.mean_wbs /= n;
    s.mean_improvement_pct /= n;
    out.push_back(std::move(s));
  }
  return out;
}

const MetricSummary& find(std::span<const MetricSummary> summaries, const std::string& metric) {
  for (const auto& s : summaries)
    if (s.metric == metric) return s;
  throw std::out_of_range("no metric named " + metric);
}

void write_per_seed_csv(std::span<const PairResult> pairs, std::ostream& out) {
  out << "seed,metric,tbs,wbs,improvement_pct,sign\n" << std::setprecision(10);
  for (const auto& p : pairs) {
    for (const auto& d : p.deltas) {
      const int k = improvement_sign(d.improvement_pct);
      const char sign = k > 0 ? '+' : (k < 0 ? '-' : '0');
      out << p.seed << ',' << d.metric << ',' << d.a << ',' << d.b << ',' << d.improvement_pct << ',' << sign << '\n';
    }
  }
}

void write_aggregate_csv(std::span<const MetricSummary> summaries, std::ostream& out) {
  // improvement_pct > 0 means WBS beats TBS on that metric.
  out << "metric,mean_tbs,mean_wbs,mean_improvement_pct,wbs_better,tbs_better,ties\n" << std::setprecision(10);
  for (const auto& s : summaries)
    out << s.metric << ',' << s.mean_tbs << ',' << s.mean_wbs << ',' << s.mean_improvement_pct << ','
        << s.wbs_better << ',' << s.tbs_better << ',' << s.ties << '\n';
}

std::vector<GridCell> sweep_grid(const ScenarioConfig& base, std::span<const std::uint32_t> validator_counts,
                                 std::span<const double> intervals, std::span<const std::uint64_t> seeds) {
  std::vector<GridCell> cells;
  for (auto validators : validator_counts) {
    for (auto interval : intervals) {
      ScenarioConfig cfg = base;
      cfg.validator_ratio.reset();
      cfg.validator_count = validators;
      cfg.dissemination_interval_s = interval;
      const auto pairs = run_pairs(cfg, seeds);
      GridCell tbs{validators, interval, "tbs", seeds.size()};
      GridCell wbs{validators, interval, "wbs", seeds.size()};
      for (const auto& p : pairs) {
        tbs.response_mean_s += p.tbs.response_time ? p.tbs.response_time->mean : 0.0;
        wbs.response_mean_s += p.wbs.response_time ? p.wbs.response_time->mean : 0.0;
        tbs.throughput_bps += p.tbs.throughput_bps;
        wbs.throughput_bps += p.wbs.throughput_bps;
        tbs.validator_energy_j += p.tbs.energy_j.validators;
        wbs.validator_energy_j += p.wbs.energy_j.validators;
      }
      for (auto* c : {&tbs, &wbs}) {
        const auto n = static_cast<double>(std::max<std::size_t>(c->seeds, 1));
        c->response_mean_s /= n;
        c->throughput_bps /= n;
        c->validator_energy_j /= n;
        cells.push_back(*c);
      }
    }
  }
  return cells;
}

void write_grid_csv(std::span<const GridCell> cells, std::ostream& out) {
  out << "validators,interval_s,policy,seeds,response_mean_s,throughput_bps,validator_energy_j\n"
      << std::setprecision(10);
  for (const auto& c : cells)
    out << c.validators << ',' << c.interval_s << ',' << c.policy << ',' << c.seeds << ',' << c.response_mean_s << ','
        << c.throughput_bps << ',' << c.validator_energy_j << '\n';
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dots));
        const auto hi = std::stoull(part.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad seed list \"" + text + "\"; expected e.g. 1..10 or 1,2,3");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

}  // namespace poasim::experiment
