#pragma once

#include <cstdint>
#include <queue>
#include <random>
#include <string_view>
#include <vector>

#include "poasim/config.hpp"
#include "poasim/consensus.hpp"
#include "poasim/ledger.hpp"
#include "poasim/trace.hpp"

namespace poasim::engine {

/// propagation_s + 8 * bytes / bandwidth_bps.
double link_delay(std::uint64_t bytes, double bandwidth_bps, double propagation_s);

/// The run's only source of randomness.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) from the top 53 bits of one draw; identical on every
  /// platform, unlike std::uniform_real_distribution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 gen_;
};

enum class EventKind {
  kSense,
  kPacketArrive,
  kDisseminate,
  kTxArriveAtConsensus,
  kRoundStart,
  kTaskComplete,
  kBlockArrive,
  kVoteArrive,
  kCommitApplied,
  kDowntimeToggle,
};

std::string_view to_string(EventKind kind);

/// Kind-specific fields; unused ones stay zero.
struct EventPayload {
  std::uint32_t node = 0;   // sensor, head or validator index
  std::uint64_t id = 0;     // tx, task or proposal id
  consensus::Slot slot;     // task placement
  std::uint64_t bits = 0;   // packet size
  double stamp = 0.0;       // packet send time
  bool flag = false;        // approve vote / go active
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kSense;
  EventPayload payload;
};

/// Min-queue on (time, seq). seq is handed out at schedule time, so events
/// at equal times fire in the order they were scheduled.
class EventQueue {
 public:
  /// Returns the sequence number given to the event.
  std::uint64_t schedule(double time, EventKind kind, EventPayload payload = {});
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Event& top() const { return heap_.top(); }
  Event pop();

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

struct RunResult {
  MetricsTrace trace;
  ledger::Chain chain;  // canonical chain at the end of the run
  std::size_t events_dispatched = 0;
};

/// Runs one scenario to completion. Throws ConfigInvalid on a bad config.
RunResult simulate(const ScenarioConfig& config);

inline MetricsTrace run(const ScenarioConfig& config) { return simulate(config).trace; }

}  // namespace poasim::engine
