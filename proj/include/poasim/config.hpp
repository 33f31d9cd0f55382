#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "poasim/cluster_net.hpp"
#include "poasim/consensus.hpp"
#include "poasim/virt.hpp"

namespace poasim {

struct DowntimeWindow {
  std::uint32_t validator = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Everything one simulation run needs. Defaults reproduce the
/// 50-sensor / 5-head network of the reference setup.
struct ScenarioConfig {
  // engine
  double duration_s = 600.0;
  std::uint64_t seed = 1;
  double bandwidth_bps = 1e6;
  double propagation_s = 1e-3;
  bool dissemination_jitter = true;

  // sensor network
  std::uint32_t sensor_count = 50;
  std::uint32_t head_count = 5;
  double area_side_m = 100.0;
  double sensing_interval_s = 10.0;
  double dissemination_interval_s = 30.0;
  std::uint64_t packet_bits = 1000;
  double sensor_energy_j = 3.0;
  double head_energy_j = 5.0;
  wsn::RadioParams radio;
  wsn::AggregationParams aggregation;

  // validators
  std::optional<std::uint32_t> validator_count;
  std::optional<double> validator_ratio;
  virt::MachineSpec machine;
  virt::WorkModel work;
  double task_cpu_cores = 1.0;
  double task_mem_gb = 0.5;

  // consensus
  consensus::SelectionPolicy policy = consensus::SelectionPolicy::kWbs;
  double round_length_s = 5.0;
  std::size_t max_txs_per_block = 256;
  double verify_cost_factor = 0.1;
  double commit_threshold = 0.51;
  std::size_t queue_capacity = 50;
  std::uint64_t block_header_bytes = 80;
  std::uint64_t vote_bytes = 64;
  std::vector<DowntimeWindow> downtime;

  /// round(ratio * (sensors + heads)), at least 1, when a ratio is given;
  /// otherwise the explicit count (default 4).
  std::uint32_t resolved_validator_count() const;

  /// Canonical JSON form; round-trips through parse_config.
  nlohmann::ordered_json to_json() const;

  /// Hash of every setting except the selection policy, so that a TBS run and
  /// a WBS run of the same scenario share a fingerprint.
  std::string fingerprint() const;
};

class ConfigInvalid : public std::runtime_error {
 public:
  explicit ConfigInvalid(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Parses and validates; unknown keys, wrong types and out-of-range values are
/// all reported together as field-level diagnostics.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Throws ConfigInvalid when a hand-built config breaks a constraint.
void validate_config(const ScenarioConfig& cfg);

}  // namespace poasim
