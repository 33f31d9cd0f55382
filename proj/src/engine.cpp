#include "poasim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace poasim::engine {

using consensus::Slot;
using ledger::TxId;
using virt::TaskPurpose;
using virt::ValidationTask;

double link_delay(std::uint64_t bytes, double bandwidth_bps, double propagation_s) {
  if (!(bandwidth_bps > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return propagation_s + 8.0 * static_cast<double>(bytes) / bandwidth_bps;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kSense: return "Sense";
    case EventKind::kPacketArrive: return "PacketArrive";
    case EventKind::kDisseminate: return "Disseminate";
    case EventKind::kTxArriveAtConsensus: return "TxArriveAtConsensus";
    case EventKind::kRoundStart: return "RoundStart";
    case EventKind::kTaskComplete: return "TaskComplete";
    case EventKind::kBlockArrive: return "BlockArrive";
    case EventKind::kVoteArrive: return "VoteArrive";
    case EventKind::kCommitApplied: return "CommitApplied";
    case EventKind::kDowntimeToggle: return "DowntimeToggle";
  }
  return "unknown";
}

std::uint64_t EventQueue::schedule(double time, EventKind kind, EventPayload payload) {
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{time, seq, kind, payload});
  return seq;
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

namespace {

std::string sensor_label(std::size_t i) { return "s" + std::to_string(i); }
std::string head_label(std::size_t i) { return "h" + std::to_string(i); }
std::string validator_label(std::size_t i) { return "v" + std::to_string(i); }

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  RunResult run() {
    setup();
    RunResult result;
    while (!queue_.empty() && queue_.top().time <= cfg_.duration_s) {
      const Event e = queue_.pop();
      now_ = e.time;
      dispatch(e);
      ++result.events_dispatched;
    }
    now_ = cfg_.duration_s;
    finish();
    result.trace = std::move(trace_);
    result.chain = cs_.canonical;
    return result;
  }

 private:
  struct Proposal {
    std::size_t proposer = 0;
    ledger::Block block;
    double work = 0.0;
    std::size_t voters = 0;
    std::size_t votes_in = 0;
    std::size_t approvals = 0;
    bool finalized = false;
  };

  // ---- setup -------------------------------------------------------------

  void setup() {
    Record header;
    header["t"] = 0.0;
    header["kind"] = "header";
    header["seed"] = cfg_.seed;
    header["policy"] = consensus::to_string(cfg_.policy);
    header["fingerprint"] = cfg_.fingerprint();
    header["duration_s"] = cfg_.duration_s;
    header["config"] = cfg_.to_json();
    trace_.append(header);

    const double side = cfg_.area_side_m;
    for (std::uint32_t i = 0; i < cfg_.sensor_count; ++i) {
      wsn::SensorNode s;
      s.node_id = i;
      s.position = {rng_.uniform(0.0, side), rng_.uniform(0.0, side)};
      s.energy = NodeEnergy(cfg_.sensor_energy_j);
      s.sensing_interval_s = cfg_.sensing_interval_s;
      sensors_.push_back(std::move(s));
    }
    for (std::uint32_t i = 0; i < cfg_.head_count; ++i) {
      wsn::ClusterHead h;
      h.head_id = i;
      h.position = {rng_.uniform(0.0, side), rng_.uniform(0.0, side)};
      h.energy = NodeEnergy(cfg_.head_energy_j);
      h.aggregation_window_s = cfg_.dissemination_interval_s;
      h.dissemination_interval_s = cfg_.dissemination_interval_s;
      heads_.push_back(std::move(h));
    }
    const std::uint32_t validators = cfg_.resolved_validator_count();
    virt::MachineSpec spec = cfg_.machine;
    for (std::uint32_t i = 0; i < validators; ++i) {
      consensus::Validator v;
      v.validator_id = i;
      v.pm = virt::make_pm(i, spec);
      cs_.validators.push_back(std::move(v));
      validator_pos_.push_back({rng_.uniform(0.0, side), rng_.uniform(0.0, side)});
    }
    cs_.policy = cfg_.policy;
    cs_.round_length_s = cfg_.round_length_s;
    dead_validator_.assign(validators, false);
    sensor_debits_seen_.assign(sensors_.size(), 0);
    head_debits_seen_.assign(heads_.size(), 0);
    pm_debits_seen_.assign(validators, 0);

    for (const auto& s : sensors_) {
      Record r = base("node");
      r["node"] = sensor_label(s.node_id);
      r["class"] = "sensor";
      r["x"] = s.position.x;
      r["y"] = s.position.y;
      r["initial_j"] = s.energy.initial();
      trace_.append(r);
    }
    for (const auto& h : heads_) {
      // Nearest validator is the head's entry point into the consensus network.
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : validator_pos_) best = std::min(best, wsn::distance(h.position, p));
      head_uplink_m_.push_back(best);
      Record r = base("node");
      r["node"] = head_label(h.head_id);
      r["class"] = "head";
      r["x"] = h.position.x;
      r["y"] = h.position.y;
      r["initial_j"] = h.energy.initial();
      r["uplink_m"] = best;
      trace_.append(r);
    }
    for (std::size_t i = 0; i < cs_.validators.size(); ++i) {
      const auto& pm = cs_.validators[i].pm;
      Record r = base("node");
      r["node"] = validator_label(i);
      r["class"] = "validator";
      r["x"] = validator_pos_[i].x;
      r["y"] = validator_pos_[i].y;
      r["initial_j"] = pm.energy.initial();
      r["cores"] = virt::from_micro(pm.total_cpu);
      r["mem_gb"] = virt::from_micro(pm.total_mem);
      r["vms"] = pm.vms.size();
      trace_.append(r);
    }

    recluster();

    // Initial schedule order fixes tie-breaks at equal times: sensing, then
    // dissemination, then rounds, then downtime toggles.
    for (std::uint32_t i = 0; i < sensors_.size(); ++i)
      queue_.schedule(cfg_.sensing_interval_s, EventKind::kSense, {.node = i});
    for (std::uint32_t i = 0; i < heads_.size(); ++i) {
      const double offset =
          cfg_.dissemination_jitter ? rng_.uniform(0.0, cfg_.dissemination_interval_s) : 0.0;
      Record r = base("dissemination_offset");
      r["node"] = head_label(i);
      r["offset_s"] = offset;
      trace_.append(r);
      queue_.schedule(cfg_.dissemination_interval_s + offset, EventKind::kDisseminate, {.node = i});
    }
    queue_.schedule(0.0, EventKind::kRoundStart);
    for (const auto& w : cfg_.downtime) {
      queue_.schedule(w.start_s, EventKind::kDowntimeToggle, {.node = w.validator, .flag = false});
      queue_.schedule(w.end_s, EventKind::kDowntimeToggle, {.node = w.validator, .flag = true});
    }
  }

  Record base(const char* kind) const {
    Record r;
    r["t"] = now_;
    r["kind"] = kind;
    return r;
  }

  void recluster() {
    std::map<wsn::NodeId, wsn::NodeId> next;
    try {
      next = wsn::assign_clusters(sensors_, heads_);
    } catch (const wsn::NoHeads&) {
      next.clear();
    }
    for (auto& h : heads_) h.members.clear();
    for (const auto& [sensor, head] : next) {
      heads_[head].members.push_back(sensor);
      auto prev = assignment_.find(sensor);
      if (prev != assignment_.end() && prev->second == head) continue;
      Record r = base("assign");
      r["node"] = sensor_label(sensor);
      r["head"] = head_label(head);
      r["distance_m"] = wsn::distance(sensors_[sensor].position, heads_[head].position);
      trace_.append(r);
    }
    assignment_ = std::move(next);
    for (auto& s : sensors_) {
      auto it = assignment_.find(s.node_id);
      s.assigned_head = it == assignment_.end() ? std::nullopt : std::optional(it->second);
    }
  }

  // ---- energy bookkeeping --------------------------------------------------

  void log_debits(const std::string& node, const NodeEnergy& energy, std::size_t& seen) {
    const auto debits = energy.debits();
    for (; seen < debits.size(); ++seen) {
      Record r = base("debit");
      r["node"] = node;
      r["cause"] = to_string(debits[seen].cause);
      r["amount_j"] = debits[seen].amount_j;
      r["remaining_j"] = energy.initial() - running_sum(node, debits[seen].amount_j);
      trace_.append(r);
    }
  }

  /// Re-sums debits in trace order so the logged remaining_j matches what a
  /// replay of the trace computes.
  double running_sum(const std::string& node, double amount) {
    double& total = debit_totals_[node];
    total += amount;
    return total;
  }

  void note_dead(const std::string& node) {
    Record r = base("node_dead");
    r["node"] = node;
    trace_.append(r);
  }

  void settle(std::size_t v) {
    auto& pm = cs_.validators[v].pm;
    virt::settle_energy(pm, now_);
    log_debits(validator_label(v), pm.energy, pm_debits_seen_[v]);
    if (pm.energy.depleted() && !dead_validator_[v]) {
      dead_validator_[v] = true;
      cs_.validators[v].active = false;
      note_dead(validator_label(v));
    }
  }

  // ---- dispatch ------------------------------------------------------------

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::kSense: on_sense(e.payload.node); break;
      case EventKind::kPacketArrive: on_packet(e.payload); break;
      case EventKind::kDisseminate: on_disseminate(e.payload.node); break;
      case EventKind::kTxArriveAtConsensus: on_tx_arrive(e.payload.id); break;
      case EventKind::kRoundStart: on_round_start(); break;
      case EventKind::kTaskComplete: on_task_complete(e.payload.slot, e.payload.id); break;
      case EventKind::kBlockArrive: on_block_arrive(e.payload.node, e.payload.id); break;
      case EventKind::kVoteArrive: on_vote(e.payload.node, e.payload.id, e.payload.flag); break;
      case EventKind::kCommitApplied: on_commit_applied(e.payload.node, e.payload.id); break;
      case EventKind::kDowntimeToggle: on_downtime(e.payload.node, e.payload.flag); break;
    }
  }

  void on_sense(std::uint32_t i) {
    auto& s = sensors_[i];
    if (!s.alive || !s.assigned_head) return;
    const auto& head = heads_[*s.assigned_head];
    auto packet = wsn::sense_and_send(s, head, now_, cfg_.packet_bits, cfg_.radio);
    log_debits(sensor_label(i), s.energy, sensor_debits_seen_[i]);
    if (!packet) {
      note_dead(sensor_label(i));
      recluster();
      return;
    }
    const std::uint64_t bytes = (packet->bits + 7) / 8;
    queue_.schedule(now_ + link_delay(bytes, cfg_.bandwidth_bps, cfg_.propagation_s), EventKind::kPacketArrive,
                    {.node = packet->head, .id = packet->sensor, .bits = packet->bits, .stamp = packet->sent_at});
    queue_.schedule(now_ + cfg_.sensing_interval_s, EventKind::kSense, {.node = i});
  }

  void on_packet(const EventPayload& p) {
    auto& head = heads_[p.node];
    if (!head.alive) return;
    head.buffer.push_back({static_cast<wsn::NodeId>(p.id), p.node, p.bits, p.stamp});
  }

  void on_disseminate(std::uint32_t h) {
    auto& head = heads_[h];
    if (!head.alive) return;
    auto tx = wsn::aggregate_and_emit(head, now_, next_tx_, head_uplink_m_[h], cfg_.aggregation, cfg_.radio);
    log_debits(head_label(h), head.energy, head_debits_seen_[h]);
    if (!head.alive) {
      note_dead(head_label(h));
      recluster();
      return;
    }
    if (tx) {
      ++next_tx_;
      txs_.emplace(tx->tx_id, *tx);
      in_transit_.insert(tx->tx_id);
      Record r = base("tx_created");
      r["tx"] = tx->tx_id;
      r["head"] = head_label(h);
      r["size_bytes"] = tx->size_bytes;
      trace_.append(r);
      queue_.schedule(now_ + link_delay(tx->size_bytes, cfg_.bandwidth_bps, cfg_.propagation_s),
                      EventKind::kTxArriveAtConsensus, {.id = tx->tx_id});
    }
    queue_.schedule(now_ + cfg_.dissemination_interval_s, EventKind::kDisseminate, {.node = h});
  }

  ValidationTask make_task(TaskPurpose purpose, double work) {
    ValidationTask t;
    t.task_id = next_task_++;
    t.purpose = purpose;
    t.cpu_demand_cores = cfg_.task_cpu_cores;
    t.mem_demand_gb = cfg_.task_mem_gb;
    t.work_units = work;
    return t;
  }

  void on_tx_arrive(TxId id) {
    in_transit_.erase(id);
    const auto& tx = txs_.at(id);
    Record r = base("tx_arrived");
    r["tx"] = id;
    trace_.append(r);
    auto task = make_task(TaskPurpose::kTxValidation, virt::work_units(tx.size_bytes, cfg_.work));
    task.tx_ref = id;
    place(task, false);
  }

  /// Algorithm-1 placement for transaction validation and block proposal.
  /// Returns true when the task left the pending queue's responsibility.
  bool place(const ValidationTask& task, bool retry) {
    std::vector<std::pair<Slot, double>> evals;
    const auto sel = consensus::select_validator(
        cs_, task, [&](const Slot& s, double w) { evals.emplace_back(s, w); });
    for (const auto& [slot, weight] : evals) {
      Record a = base("attractiveness");
      a["task"] = task.task_id;
      a["pm"] = slot.validator;
      a["vm"] = slot.vm;
      a["weight"] = weight;
      trace_.append(a);
    }
    Record r = base("select");
    r["task"] = task.task_id;
    r["purpose"] = virt::to_string(task.purpose);
    r["mode"] = consensus::to_string(sel.mode);
    r["retry"] = retry;
    if (sel.slot) {
      r["pm"] = sel.slot->validator;
      r["vm"] = sel.slot->vm;
    } else {
      r["pm"] = nullptr;
      r["vm"] = nullptr;
    }
    if (sel.tbs_candidate) {
      r["tbs_pm"] = sel.tbs_candidate->validator;
      r["tbs_vm"] = sel.tbs_candidate->vm;
    } else {
      r["tbs_pm"] = nullptr;
      r["tbs_vm"] = nullptr;
    }
    r["tbs_admissible"] = sel.tbs_admissible;
    r["evaluations"] = sel.evaluations;
    trace_.append(r);

    switch (sel.mode) {
      case consensus::SelectionMode::kTbs:
      case consensus::SelectionMode::kWbsFallback:
        start(*sel.slot, task);
        return true;
      case consensus::SelectionMode::kQueued:
        if (sel.slot) {
          enqueue(cs_.vm(*sel.slot).task_queue, task);
          return true;
        }
        if (!retry) enqueue(cs_.pending_queue, task);
        return false;
    }
    return false;
  }

  /// Drop-tail: a transaction validation task that finds its queue full is
  /// dropped. Consensus work is never dropped.
  void enqueue(std::deque<ValidationTask>& q, const ValidationTask& task) {
    if (task.purpose == TaskPurpose::kTxValidation && q.size() >= cfg_.queue_capacity) {
      dropped_.insert(*task.tx_ref);
      Record r = base("tx_dropped");
      r["tx"] = *task.tx_ref;
      trace_.append(r);
      return;
    }
    q.push_back(task);
  }

  void start(const Slot& slot, const ValidationTask& task) {
    settle(slot.validator);
    auto& pm = cs_.pm(slot);
    if (virt::admit_task(pm, slot.vm, task) != virt::Admission::kAccepted)
      throw std::logic_error("started a task the VM cannot admit");
    auto& vm = pm.vms[slot.vm];
    vm.running.push_back(task);
    const double duration = virt::service_time(task, vm, cfg_.work);
    vm.busy_until = std::max(vm.busy_until, now_ + duration);
    Record r = base("task_start");
    r["task"] = task.task_id;
    r["purpose"] = virt::to_string(task.purpose);
    r["pm"] = slot.validator;
    r["vm"] = slot.vm;
    r["service_s"] = duration;
    trace_.append(r);
    queue_.schedule(now_ + duration, EventKind::kTaskComplete, {.id = task.task_id, .slot = slot});
  }

  void on_task_complete(const Slot& slot, virt::TaskId id) {
    settle(slot.validator);
    auto& vm = cs_.vm(slot);
    auto it = std::find_if(vm.running.begin(), vm.running.end(),
                           [&](const ValidationTask& t) { return t.task_id == id; });
    if (it == vm.running.end()) throw std::logic_error("completion for a task that is not running");
    const ValidationTask task = *it;
    vm.running.erase(it);
    virt::release_task(cs_.pm(slot), slot.vm, task);

    Record r = base("task_done");
    r["task"] = id;
    r["purpose"] = virt::to_string(task.purpose);
    r["pm"] = slot.validator;
    r["vm"] = slot.vm;
    trace_.append(r);

    switch (task.purpose) {
      case TaskPurpose::kTxValidation: tx_validated(*task.tx_ref); break;
      case TaskPurpose::kBlockProposal: proposal_sealed(task_proposal_.at(id)); break;
      case TaskPurpose::kBlockVerification: verification_done(id); break;
    }
    task_proposal_.erase(id);

    drain_local_queues(slot.validator);
    retry_pending();
  }

  void tx_validated(TxId id) {
    const auto& tx = txs_.at(id);
    for (auto& v : cs_.validators) v.mempool.push_back(tx);
    Record r = base("tx_validated");
    r["tx"] = id;
    trace_.append(r);
  }

  void drain_local_queues(std::size_t v) {
    auto& pm = cs_.validators[v].pm;
    for (std::size_t j = 0; j < pm.vms.size(); ++j) {
      auto& q = pm.vms[j].task_queue;
      while (!q.empty() && virt::can_admit(pm.vms[j], pm, q.front())) {
        const ValidationTask task = q.front();
        q.pop_front();
        start({v, j}, task);
      }
    }
  }

  void retry_pending() {
    while (!cs_.pending_queue.empty()) {
      const ValidationTask task = cs_.pending_queue.front();
      if (!place(task, true)) break;
      cs_.pending_queue.pop_front();
    }
  }

  void on_round_start() {
    queue_.schedule(now_ + cfg_.round_length_s, EventKind::kRoundStart);
    // One block in flight at a time: the round passes while the previous
    // proposal is still being sealed or voted on.
    if (!proposals_.empty()) return;
    const auto proposer = consensus::next_proposer(cs_);
    if (!proposer) return;
    auto block = consensus::propose_block(cs_.validators[*proposer], now_, cfg_.max_txs_per_block);
    if (!block) return;

    double work = 0.0;
    for (const auto& tx : block->transactions) work += virt::work_units(tx.size_bytes, cfg_.work);
    const std::uint64_t pid = next_proposal_++;
    Record r = base("block_proposed");
    r["proposal"] = pid;
    r["proposer"] = validator_label(*proposer);
    r["index"] = block->index;
    r["tx_count"] = block->transactions.size();
    r["bytes"] = block->payload_bytes();
    r["block_hash"] = to_hex(block->block_hash);
    trace_.append(r);

    proposals_[pid] = Proposal{*proposer, std::move(*block), work, 0, 0, 0, false};
    const auto task = make_task(TaskPurpose::kBlockProposal, work);
    task_proposal_[task.task_id] = pid;
    place(task, false);
  }

  std::uint64_t block_wire_bytes(const ledger::Block& b) const { return cfg_.block_header_bytes + b.payload_bytes(); }

  void proposal_sealed(std::uint64_t pid) {
    auto& p = proposals_.at(pid);
    p.voters = 1;  // the proposer approves its own block
    p.votes_in = 1;
    p.approvals = 1;
    const double delay = link_delay(block_wire_bytes(p.block), cfg_.bandwidth_bps, cfg_.propagation_s);
    for (std::uint32_t v = 0; v < cs_.validators.size(); ++v) {
      if (v == p.proposer || !cs_.validators[v].active) continue;
      ++p.voters;
      queue_.schedule(now_ + delay, EventKind::kBlockArrive, {.node = v, .id = pid});
    }
    Record r = base("block_sealed");
    r["proposal"] = pid;
    r["voters"] = p.voters;
    trace_.append(r);
    if (p.votes_in == p.voters) finalize(pid);
  }

  void on_block_arrive(std::uint32_t v, std::uint64_t pid) {
    const auto& p = proposals_.at(pid);
    if (!cs_.validators[v].active) {
      // Went down after the broadcast: counts as a missing approval.
      queue_.schedule(now_, EventKind::kVoteArrive, {.node = v, .id = pid, .flag = false});
      return;
    }
    auto task = make_task(TaskPurpose::kBlockVerification, cfg_.verify_cost_factor * p.work);
    task_proposal_[task.task_id] = pid;
    task_verifier_[task.task_id] = v;
    auto& pm = cs_.validators[v].pm;
    std::size_t best = 0;
    for (std::size_t j = 1; j < pm.vms.size(); ++j) {
      if (pm.vms[j].load() < pm.vms[best].load()) best = j;
    }
    Record r = base("verify_assign");
    r["task"] = task.task_id;
    r["proposal"] = pid;
    r["pm"] = v;
    r["vm"] = best;
    trace_.append(r);
    if (pm.vms[best].task_queue.empty() && virt::can_admit(pm.vms[best], pm, task)) {
      start({v, best}, task);
    } else {
      pm.vms[best].task_queue.push_back(task);
    }
  }

  void verification_done(virt::TaskId task) {
    const std::uint64_t pid = task_proposal_.at(task);
    const std::size_t v = task_verifier_.at(task);
    task_verifier_.erase(task);
    const auto vote = consensus::verify_block(cs_.validators[v], proposals_.at(pid).block);
    const bool approve = vote == consensus::Vote::kApprove;
    queue_.schedule(now_ + link_delay(cfg_.vote_bytes, cfg_.bandwidth_bps, cfg_.propagation_s),
                    EventKind::kVoteArrive, {.node = static_cast<std::uint32_t>(v), .id = pid, .flag = approve});
  }

  void on_vote(std::uint32_t v, std::uint64_t pid, bool approve) {
    auto& p = proposals_.at(pid);
    ++p.votes_in;
    if (approve) ++p.approvals;
    Record r = base("vote");
    r["proposal"] = pid;
    r["voter"] = validator_label(v);
    r["approve"] = approve;
    trace_.append(r);
    if (p.votes_in == p.voters) finalize(pid);
  }

  void finalize(std::uint64_t pid) {
    auto& p = proposals_.at(pid);
    p.finalized = true;
    const auto outcome = consensus::commit_block(cs_, p.block, p.approvals, p.voters, cfg_.commit_threshold);
    Record r = base(outcome == consensus::CommitOutcome::kCommitted ? "block_committed" : "block_rejected");
    r["proposal"] = pid;
    r["index"] = p.block.index;
    r["proposer"] = validator_label(p.proposer);
    r["approvals"] = p.approvals;
    r["voters"] = p.voters;
    r["tx_count"] = p.block.transactions.size();
    r["bytes"] = p.block.payload_bytes();
    r["block_hash"] = to_hex(p.block.block_hash);
    trace_.append(r);

    if (outcome == consensus::CommitOutcome::kCommitted) {
      for (const auto& tx : p.block.transactions) {
        Record c = base("tx_committed");
        c["tx"] = tx.tx_id;
        c["created_at"] = tx.created_at;
        c["size_bytes"] = tx.size_bytes;
        c["response_s"] = now_ - tx.created_at;
        trace_.append(c);
      }
      consensus::apply_commit(cs_, p.proposer, p.block.index);
      const double delay = link_delay(block_wire_bytes(p.block), cfg_.bandwidth_bps, cfg_.propagation_s);
      for (std::uint32_t v = 0; v < cs_.validators.size(); ++v) {
        if (v == p.proposer) continue;
        queue_.schedule(now_ + delay, EventKind::kCommitApplied, {.node = v, .id = p.block.index});
      }
    } else {
      consensus::return_to_mempool(cs_, p.proposer, p.block);
    }
    proposals_.erase(pid);
  }

  void on_commit_applied(std::uint32_t v, std::uint64_t index) { consensus::apply_commit(cs_, v, index); }

  void on_downtime(std::uint32_t v, bool go_active) {
    if (dead_validator_[v]) return;
    settle(v);
    cs_.validators[v].active = go_active;
    Record r = base("downtime");
    r["node"] = validator_label(v);
    r["active"] = go_active;
    trace_.append(r);
    if (go_active) retry_pending();
  }

  // ---- wrap-up -------------------------------------------------------------

  std::set<TxId> pending_transactions() const {
    std::set<TxId> pending(in_transit_.begin(), in_transit_.end());
    auto add_task = [&](const ValidationTask& t) {
      if (t.tx_ref) pending.insert(*t.tx_ref);
    };
    for (const auto& t : cs_.pending_queue) add_task(t);
    for (const auto& v : cs_.validators) {
      for (const auto& tx : v.mempool) pending.insert(tx.tx_id);
      for (const auto& vm : v.pm.vms) {
        for (const auto& t : vm.task_queue) add_task(t);
        for (const auto& t : vm.running) add_task(t);
      }
    }
    for (const auto& [_, p] : proposals_)
      for (const auto& tx : p.block.transactions) pending.insert(tx.tx_id);
    for (auto id : cs_.committed) pending.erase(id);
    return pending;
  }

  void finish() {
    for (std::size_t v = 0; v < cs_.validators.size(); ++v) settle(v);

    auto final_record = [&](const std::string& node, const char* cls, const NodeEnergy& e) {
      Record r = base("node_final");
      r["node"] = node;
      r["class"] = cls;
      r["initial_j"] = e.initial();
      r["remaining_j"] = e.initial() - debit_totals_[node];
      r["debits"] = e.debits().size();
      trace_.append(r);
    };
    for (std::size_t i = 0; i < sensors_.size(); ++i) final_record(sensor_label(i), "sensor", sensors_[i].energy);
    for (std::size_t i = 0; i < heads_.size(); ++i) final_record(head_label(i), "head", heads_[i].energy);
    for (std::size_t i = 0; i < cs_.validators.size(); ++i)
      final_record(validator_label(i), "validator", cs_.validators[i].pm.energy);

    const auto pending = pending_transactions();
    Record r = base("summary");
    r["created"] = txs_.size();
    r["committed"] = cs_.committed.size();
    r["pending"] = pending.size();
    r["dropped"] = dropped_.size();
    r["chain_height"] = cs_.canonical.tip().index;
    r["tip_hash"] = to_hex(cs_.canonical.tip().block_hash);
    trace_.append(r);
  }

  const ScenarioConfig cfg_;
  Rng rng_;
  EventQueue queue_;
  MetricsTrace trace_;
  double now_ = 0.0;

  std::vector<wsn::SensorNode> sensors_;
  std::vector<wsn::ClusterHead> heads_;
  std::vector<wsn::Position> validator_pos_;
  std::vector<double> head_uplink_m_;
  std::map<wsn::NodeId, wsn::NodeId> assignment_;
  consensus::ConsensusState cs_;
  std::vector<bool> dead_validator_;

  std::vector<std::size_t> sensor_debits_seen_;
  std::vector<std::size_t> head_debits_seen_;
  std::vector<std::size_t> pm_debits_seen_;
  std::map<std::string, double> debit_totals_;

  TxId next_tx_ = 0;
  virt::TaskId next_task_ = 0;
  std::uint64_t next_proposal_ = 0;
  std::map<TxId, ledger::Transaction> txs_;
  std::set<TxId> in_transit_;
  std::set<TxId> dropped_;
  std::map<std::uint64_t, Proposal> proposals_;
  std::map<virt::TaskId, std::uint64_t> task_proposal_;
  std::map<virt::TaskId, std::size_t> task_verifier_;
};

}  // namespace

RunResult simulate(const ScenarioConfig& config) {
  validate_config(config);
  return Simulation(config).run();
}

}  // namespace poasim::engine
