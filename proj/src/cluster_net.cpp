#include "poasim/cluster_net.hpp"

#include <cmath>
#include <limits>

namespace poasim::wsn {

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

double radio_energy(RadioDirection direction, std::uint64_t bits, double distance_m, const RadioParams& radio) {
  const auto b = static_cast<double>(bits);
  double e = radio.e_elec_j_per_bit * b;
  if (direction == RadioDirection::kTx) e += radio.e_amp_j_per_bit_m2 * b * distance_m * distance_m;
  return e;
}

std::map<NodeId, NodeId> assign_clusters(std::span<const SensorNode> sensors, std::span<const ClusterHead> heads) {
  bool any_alive = false;
  for (const auto& h : heads) any_alive = any_alive || h.alive;
  if (!any_alive) throw NoHeads();

  std::map<NodeId, NodeId> assignment;
  for (const auto& s : sensors) {
    if (!s.alive) continue;
    const ClusterHead* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& h : heads) {
      if (!h.alive) continue;
      const double d = distance(s.position, h.position);
      if (d < best_d || (d == best_d && best != nullptr && h.head_id < best->head_id)) {
        best = &h;
        best_d = d;
      }
    }
    assignment.emplace(s.node_id, best->head_id);
  }
  return assignment;
}

std::optional<SensingPacket> sense_and_send(SensorNode& sensor, const ClusterHead& head, double now,
                                            std::uint64_t packet_bits, const RadioParams& radio) {
  if (!sensor.alive) return std::nullopt;
  const double cost =
      radio_energy(RadioDirection::kTx, packet_bits, distance(sensor.position, head.position), radio);
  if (!sensor.energy.can_afford(cost)) {
    sensor.alive = false;
    return std::nullopt;
  }
  sensor.energy.debit(now, cost, DebitCause::kSenseTx);
  return SensingPacket{sensor.node_id, head.head_id, packet_bits, now};
}

std::uint64_t aggregated_size(std::size_t packet_count, const AggregationParams& agg) {
  return agg.header_bytes + agg.digest_bytes_per_packet * packet_count;
}

std::optional<ledger::Transaction> aggregate_and_emit(ClusterHead& head, double now, ledger::TxId tx_id,
                                                      double uplink_distance_m, const AggregationParams& agg,
                                                      const RadioParams& radio) {
  if (!head.alive || head.buffer.empty()) return std::nullopt;

  std::uint64_t rx_bits = 0;
  ByteWriter digest_input;
  for (const auto& p : head.buffer) {
    rx_bits += p.bits;
    digest_input.u32(p.sensor);
    digest_input.f64(p.sent_at);
  }
  const std::uint64_t size = aggregated_size(head.buffer.size(), agg);
  const double rx_cost = radio_energy(RadioDirection::kRx, rx_bits, 0.0, radio);
  const double tx_cost = radio_energy(RadioDirection::kTx, size * 8, uplink_distance_m, radio);
  if (!head.energy.can_afford(rx_cost + tx_cost)) {
    head.alive = false;
    head.buffer.clear();
    return std::nullopt;
  }
  head.energy.debit(now, rx_cost, DebitCause::kHeadRx);
  head.energy.debit(now, tx_cost, DebitCause::kHeadTx);
  head.buffer.clear();

  ledger::Transaction tx;
  tx.tx_id = tx_id;
  tx.origin_head = head.head_id;
  tx.size_bytes = size;
  tx.created_at = now;
  tx.payload_digest = sha256(digest_input.data());
  return tx;
}

}  // namespace poasim::wsn
