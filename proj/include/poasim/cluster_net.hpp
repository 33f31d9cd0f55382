#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "poasim/energy.hpp"
#include "poasim/ledger.hpp"

namespace poasim::wsn {

using NodeId = std::uint32_t;

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(Position a, Position b);

/// First-order radio model.
struct RadioParams {
  double e_elec_j_per_bit = 50e-9;
  double e_amp_j_per_bit_m2 = 100e-12;
};

enum class RadioDirection { kTx, kRx };

double radio_energy(RadioDirection direction, std::uint64_t bits, double distance_m,
                    const RadioParams& radio = {});

struct SensorNode {
  NodeId node_id = 0;
  Position position;
  NodeEnergy energy;
  double sensing_interval_s = 10.0;
  std::optional<NodeId> assigned_head;
  bool alive = true;
};

struct SensingPacket {
  NodeId sensor = 0;
  NodeId head = 0;
  std::uint64_t bits = 0;
  double sent_at = 0.0;
};

struct ClusterHead {
  NodeId head_id = 0;
  Position position;
  NodeEnergy energy;
  std::vector<NodeId> members;
  double aggregation_window_s = 30.0;
  double dissemination_interval_s = 30.0;
  std::vector<SensingPacket> buffer;
  bool alive = true;
};

class NoHeads : public std::runtime_error {
 public:
  NoHeads() : std::runtime_error("cluster assignment needs at least one head") {}
};

/// sensor id -> head id. Nearest head by Euclidean distance, ties to the
/// lowest head_id. Dead sensors and dead heads take no part.
std::map<NodeId, NodeId> assign_clusters(std::span<const SensorNode> sensors,
                                         std::span<const ClusterHead> heads);

/// Debits the sensor's transmit energy toward its head and returns the packet.
/// A sensor that cannot pay is marked dead and nothing is sent.
std::optional<SensingPacket> sense_and_send(SensorNode& sensor, const ClusterHead& head, double now,
                                            std::uint64_t packet_bits, const RadioParams& radio = {});

struct AggregationParams {
  std::uint64_t header_bytes = 64;
  std::uint64_t digest_bytes_per_packet = 32;
};

std::uint64_t aggregated_size(std::size_t packet_count, const AggregationParams& agg = {});

/// Flushes the head's buffer into one transaction. Debits receive energy for
/// the buffered packets plus transmit energy over `uplink_distance_m`. An
/// empty buffer emits nothing; a head that cannot pay is marked dead and its
/// buffer is discarded.
std::optional<ledger::Transaction> aggregate_and_emit(ClusterHead& head, double now, ledger::TxId tx_id,
                                                      double uplink_distance_m,
                                                      const AggregationParams& agg = {},
                                                      const RadioParams& radio = {});

}  // namespace poasim::wsn
