#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "poasim/engine.hpp"
#include "poasim/experiment.hpp"
#include "poasim/metrics.hpp"

namespace fs = std::filesystem;
using namespace poasim;

namespace {

enum Exit : int { kOk = 0, kConfigError = 1, kInvariantViolation = 2, kIoError = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("POASIM_OUT_DIR"); env && *env) return env;
  return "out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

ScenarioConfig load_scenario(const std::string& path) {
  try {
    return load_config(path);
  } catch (const std::ios_base::failure&) {
    throw IoError("cannot read scenario " + path);
  }
}

int report_violations(const std::vector<std::string>& violations) {
  for (const auto& v : violations) std::cerr << "violation: " << v << '\n';
  return violations.empty() ? kOk : kInvariantViolation;
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& policy, const std::string& out_flag) {
  auto cfg = load_scenario(scenario);
  if (seed) cfg.seed = *seed;
  if (!policy.empty()) cfg.policy = *consensus::parse_policy(policy);
  const auto dir = resolve_out(out_flag);
  ensure_dir(dir);

  const auto result = engine::simulate(cfg);
  result.trace.save(dir / "trace.jsonl");
  {
    auto out = open_out(dir / "chain.jsonl");
    ledger::export_chain(result.chain, out);
  }
  const auto records = result.trace.records();
  const auto report = metrics::build_report(records);
  open_out(dir / "report.json") << metrics::to_json(report).dump(2) << '\n';

  std::cout << "policy " << report.policy << ", seed " << report.seed << ": " << report.counts.committed << '/'
            << report.counts.created << " txs committed, validator energy " << report.energy_j.validators << " J\n";
  std::cout << "wrote " << (dir / "trace.jsonl").string() << '\n';
  return report_violations(metrics::validate_trace(records));
}

int cmd_compare(const std::string& scenario, const std::string& seed_text, const std::string& out_flag, bool grid) {
  const auto cfg = load_scenario(scenario);
  std::vector<std::uint64_t> seeds;
  try {
    seeds = experiment::parse_seed_list(seed_text);
  } catch (const std::invalid_argument& e) {
    throw ConfigInvalid({std::string("--seeds: ") + e.what()});
  }
  const auto dir = resolve_out(out_flag);
  ensure_dir(dir / "reports");

  const auto pairs = experiment::run_pairs(cfg, seeds);
  std::vector<std::string> violations;
  for (const auto& p : pairs) {
    open_out(dir / "reports" / ("seed" + std::to_string(p.seed) + "_tbs.json")) << metrics::to_json(p.tbs).dump(2)
                                                                                  << '\n';
    open_out(dir / "reports" / ("seed" + std::to_string(p.seed) + "_wbs.json")) << metrics::to_json(p.wbs).dump(2)
                                                                                  << '\n';
    violations.insert(violations.end(), p.violations.begin(), p.violations.end());
  }
  {
    auto out = open_out(dir / "per_seed.csv");
    experiment::write_per_seed_csv(pairs, out);
  }
  const auto summary = experiment::aggregate(pairs);
  {
    auto out = open_out(dir / "aggregate.csv");
    experiment::write_aggregate_csv(summary, out);
  }
  experiment::write_aggregate_csv(summary, std::cout);

  if (grid) {
    const std::vector<std::uint32_t> validators{4, 8, 12};
    const std::vector<double> intervals{30.0, 300.0, 600.0};
    const auto cells = experiment::sweep_grid(cfg, validators, intervals, seeds);
    auto out = open_out(dir / "grid.csv");
    experiment::write_grid_csv(cells, out);
    std::cout << "wrote " << (dir / "grid.csv").string() << '\n';
  }
  return report_violations(violations);
}

int cmd_validate(const std::string& path) {
  MetricsTrace trace;
  try {
    trace = MetricsTrace::load(path);
  } catch (const std::ios_base::failure&) {
    throw IoError("cannot read trace " + path);
  }
  const auto records = trace.records();
  const auto violations = metrics::validate_trace(records);
  if (violations.empty()) std::cout << "ok: " << records.size() << " records, all invariants hold\n";
  return report_violations(violations);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for PoA transaction processing over clustered IoT networks"};
  app.require_subcommand(1);

  std::string scenario, policy, out, seeds = "1..10", trace;
  std::optional<std::uint64_t> seed;
  bool grid = false;

  auto* run = app.add_subcommand("run", "Run one simulation and write trace.jsonl, chain.jsonl and report.json");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Random seed (default: the scenario's)");
  run->add_option("--policy", policy, "Selection policy")->check(CLI::IsMember({"tbs", "wbs"}));
  run->add_option("--out", out, "Output directory (default $POASIM_OUT_DIR or ./out)");

  auto* cmp = app.add_subcommand("compare", "Run both policies over a seed range and write comparison tables");
  cmp->add_option("--scenario", scenario, "Scenario JSON file")->required();
  cmp->add_option("--seeds", seeds, "Seeds, e.g. 1..10 or 1,4,9");
  cmp->add_option("--out", out, "Output directory (default $POASIM_OUT_DIR or ./out)");
  cmp->add_flag("--grid", grid, "Also sweep 4/8/12 validators x 30/300/600 s intervals into grid.csv");

  auto* val = app.add_subcommand("validate", "Replay invariant checks over a stored trace");
  val->add_option("--trace", trace, "Trace file (JSON Lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(scenario, seed, policy, out);
    if (*cmp) return cmd_compare(scenario, seeds, out, grid);
    return cmd_validate(trace);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error:\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << '\n';
    return kConfigError;
  } catch (const TraceFormatError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariantViolation;
  }
}
