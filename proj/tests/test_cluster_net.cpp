#include <cmath>
#include <random>

#include "doctest.h"
#include "poasim/cluster_net.hpp"

using namespace poasim;
using namespace poasim::wsn;

namespace {

SensorNode sensor_at(NodeId id, double x, double y, double energy = 3.0) {
  SensorNode s;
  s.node_id = id;
  s.position = {x, y};
  s.energy = NodeEnergy(energy);
  return s;
}

ClusterHead head_at(NodeId id, double x, double y, double energy = 5.0) {
  ClusterHead h;
  h.head_id = id;
  h.position = {x, y};
  h.energy = NodeEnergy(energy);
  return h;
}

}  // namespace

TEST_CASE("radio energy") {
  CHECK(radio_energy(RadioDirection::kTx, 0, 25.0) == 0.0);
  CHECK(radio_energy(RadioDirection::kTx, 1000, 10.0) == doctest::Approx(6.0e-5).epsilon(1e-12));
  CHECK(radio_energy(RadioDirection::kRx, 1000, 10.0) == doctest::Approx(5.0e-5).epsilon(1e-12));
}

TEST_CASE("nearest head with lowest-id tie break") {
  std::vector<SensorNode> sensors{sensor_at(0, 0, 0), sensor_at(1, 3, 0)};
  std::vector<ClusterHead> heads{head_at(0, 1, 0), head_at(1, 5, 0)};
  auto a = assign_clusters(sensors, heads);
  CHECK(a.at(0) == 0);
  CHECK(a.at(1) == 0);  // 2 m from both heads

  std::vector<ClusterHead> none;
  CHECK_THROWS_AS(assign_clusters(sensors, none), NoHeads);

  heads[0].alive = false;
  a = assign_clusters(sensors, heads);
  CHECK(a.at(0) == 1);
  sensors[1].alive = false;
  a = assign_clusters(sensors, heads);
  CHECK(a.count(1) == 0);
}

TEST_CASE("property: assignment matches brute-force nearest search") {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> coord(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SensorNode> sensors;
    std::vector<ClusterHead> heads;
    for (NodeId i = 0; i < 50; ++i) sensors.push_back(sensor_at(i, coord(g), coord(g)));
    for (NodeId i = 0; i < 5; ++i) heads.push_back(head_at(i, coord(g), coord(g)));
    const auto a = assign_clusters(sensors, heads);
    REQUIRE(a.size() == sensors.size());
    for (const auto& s : sensors) {
      NodeId best = 0;
      for (NodeId h = 1; h < heads.size(); ++h)
        if (distance(s.position, heads[h].position) < distance(s.position, heads[best].position)) best = h;
      CHECK(a.at(s.node_id) == best);
    }
  }
}

TEST_CASE("sense_and_send debits the transmit cost") {
  auto s = sensor_at(0, 0, 0);
  const auto h = head_at(0, 10, 0);
  const auto p = sense_and_send(s, h, 10.0, 1000);
  REQUIRE(p.has_value());
  CHECK(p->sensor == 0);
  CHECK(p->head == 0);
  CHECK(p->sent_at == 10.0);
  REQUIRE(s.energy.debits().size() == 1);
  CHECK(s.energy.debits()[0].amount_j == doctest::Approx(6.0e-5).epsilon(1e-12));
  CHECK(s.energy.remaining() == doctest::Approx(3.0 - 6.0e-5).epsilon(1e-15));
}

TEST_CASE("a sensor that cannot pay dies silently") {
  auto s = sensor_at(0, 0, 0, 5.0e-5);
  const auto h = head_at(0, 10, 0);
  CHECK_FALSE(sense_and_send(s, h, 10.0, 1000).has_value());
  CHECK_FALSE(s.alive);
  CHECK(s.energy.debits().empty());
  CHECK_FALSE(sense_and_send(s, h, 20.0, 1000).has_value());
}

TEST_CASE("aggregation size and head debits") {
  CHECK(aggregated_size(3) == 160);
  CHECK(aggregated_size(0) == 64);

  auto h = head_at(2, 50, 50);
  CHECK_FALSE(aggregate_and_emit(h, 30.0, 0, 20.0).has_value());
  CHECK(h.energy.debits().empty());

  for (NodeId i = 0; i < 3; ++i) h.buffer.push_back({i, 2, 1000, 10.0 + i});
  const auto tx = aggregate_and_emit(h, 30.0, 9, 20.0);
  REQUIRE(tx.has_value());
  CHECK(tx->tx_id == 9);
  CHECK(tx->origin_head == 2);
  CHECK(tx->size_bytes == 160);
  CHECK(tx->created_at == 30.0);
  CHECK(h.buffer.empty());
  const double rx = 50e-9 * 3000;
  const double txj = 50e-9 * 1280 + 100e-12 * 1280 * 400.0;
  REQUIRE(h.energy.debits().size() == 2);
  CHECK(h.energy.debits()[0].amount_j == doctest::Approx(rx).epsilon(1e-12));
  CHECK(h.energy.debits()[1].amount_j == doctest::Approx(txj).epsilon(1e-12));
}

TEST_CASE("a head that cannot pay dies and drops its buffer") {
  auto h = head_at(0, 0, 0, 1e-6);
  h.buffer.push_back({0, 0, 1000, 1.0});
  CHECK_FALSE(aggregate_and_emit(h, 30.0, 0, 10.0).has_value());
  CHECK_FALSE(h.alive);
  CHECK(h.buffer.empty());
}

TEST_CASE("node energy clips at zero and conserves") {
  NodeEnergy e(1.0);
  CHECK(e.debit(0.0, 0.0, DebitCause::kIdle) == 0.0);
  CHECK(e.debits().empty());
  CHECK(e.debit(1.0, 0.4, DebitCause::kBusy) == doctest::Approx(0.4));
  CHECK(e.debit(2.0, 0.9, DebitCause::kBusy) == doctest::Approx(0.6));
  CHECK(e.depleted());
  CHECK(e.remaining() == doctest::Approx(0.0).epsilon(1e-15));
  double sum = 0.0;
  for (const auto& d : e.debits()) sum += d.amount_j;
  CHECK(std::abs(e.initial() - e.remaining() - sum) < 1e-12);
}
