#include "poasim/consensus.hpp"

#include <algorithm>

namespace poasim::consensus {

std::string_view to_string(SelectionPolicy policy) { return policy == SelectionPolicy::kTbs ? "tbs" : "wbs"; }

std::optional<SelectionPolicy> parse_policy(std::string_view text) {
  if (text == "tbs") return SelectionPolicy::kTbs;
  if (text == "wbs") return SelectionPolicy::kWbs;
  return std::nullopt;
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kTbs: return "tbs";
    case SelectionMode::kWbsFallback: return "wbs-fallback";
    case SelectionMode::kQueued: return "queued";
  }
  return "unknown";
}

std::size_t ConsensusState::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(validators.begin(), validators.end(), [](const Validator& v) { return v.active; }));
}

namespace {

std::size_t flattened_size(const ConsensusState& state) {
  std::size_t n = 0;
  for (const auto& v : state.validators) n += v.pm.vms.size();
  return n;
}

Slot unflatten(const ConsensusState& state, std::size_t pos) {
  for (std::size_t i = 0; i < state.validators.size(); ++i) {
    const auto n = state.validators[i].pm.vms.size();
    if (pos < n) return {i, pos};
    pos -= n;
  }
  return {};
}

}  // namespace

std::optional<Slot> tbs_next(ConsensusState& state) {
  const std::size_t total = flattened_size(state);
  if (total == 0) return std::nullopt;
  for (std::size_t step = 0; step < total; ++step) {
    const std::size_t pos = (state.rr_cursor + step) % total;
    const Slot slot = unflatten(state, pos);
    if (state.validators[slot.validator].active) {
      state.rr_cursor = (pos + 1) % total;
      return slot;
    }
  }
  return std::nullopt;
}

std::optional<Slot> wbs_select(const ConsensusState& state, const virt::ValidationTask& task,
                               const EvalSink& on_eval) {
  std::optional<Slot> best;
  double best_weight = 0.0;
  for (std::size_t i = 0; i < state.validators.size(); ++i) {
    const auto& validator = state.validators[i];
    if (!validator.active) continue;
    const auto& pm = validator.pm;
    if (pm.remaining_cpu() <= 0) continue;  // skip rule
    for (std::size_t j = 0; j < pm.vms.size(); ++j) {
      if (!virt::can_admit(pm.vms[j], pm, task)) continue;
      const double weight = *virt::attractiveness(pm, pm.vms[j]);
      if (on_eval) on_eval(Slot{i, j}, weight);
      if (!best || weight < best_weight) {
        best = Slot{i, j};
        best_weight = weight;
      }
    }
  }
  return best;
}

Selection select_validator(ConsensusState& state, const virt::ValidationTask& task, const EvalSink& on_eval) {
  Selection sel;
  sel.tbs_candidate = tbs_next(state);
  if (!sel.tbs_candidate) return sel;  // nobody active: park on the pending queue

  sel.tbs_admissible = virt::can_admit(state.vm(*sel.tbs_candidate), state.pm(*sel.tbs_candidate), task);
  if (sel.tbs_admissible) {
    sel.mode = SelectionMode::kTbs;
    sel.slot = sel.tbs_candidate;
    return sel;
  }
  if (state.policy == SelectionPolicy::kTbs) {
    sel.mode = SelectionMode::kQueued;
    sel.slot = sel.tbs_candidate;
    return sel;
  }
  const EvalSink counting = [&](const Slot& s, double w) {
    ++sel.evaluations;
    if (on_eval) on_eval(s, w);
  };
  if (auto choice = wbs_select(state, task, counting)) {
    sel.mode = SelectionMode::kWbsFallback;
    sel.slot = choice;
  }
  return sel;
}

std::optional<std::size_t> next_proposer(ConsensusState& state) {
  const std::size_t n = state.validators.size();
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t idx = (state.proposer_cursor + step) % n;
    if (state.validators[idx].active) {
      state.proposer_cursor = (idx + 1) % n;
      return idx;
    }
  }
  return std::nullopt;
}

std::optional<ledger::Block> propose_block(Validator& validator, double now, std::size_t max_txs) {
  if (validator.mempool.empty() || max_txs == 0) return std::nullopt;
  const std::size_t take = std::min(max_txs, validator.mempool.size());
  std::vector<ledger::Transaction> txs(validator.mempool.begin(), validator.mempool.begin() + take);
  validator.mempool.erase(validator.mempool.begin(), validator.mempool.begin() + take);
  return ledger::make_block(validator.local_chain.tip(), now, validator.validator_id, std::move(txs));
}

Vote verify_block(const Validator& validator, const ledger::Block& block) {
  return ledger::check_link(validator.local_chain.tip(), block) == ledger::Violation::kNone ? Vote::kApprove
                                                                                            : Vote::kReject;
}

bool has_majority(std::size_t approvals, std::size_t voters, double threshold) {
  if (voters == 0) return false;
  return static_cast<double>(approvals) / static_cast<double>(voters) > threshold;
}

CommitOutcome commit_block(ConsensusState& state, const ledger::Block& block, std::size_t approvals,
                           std::size_t voters, double threshold) {
  if (!has_majority(approvals, voters, threshold)) return CommitOutcome::kRejected;
  if (state.canonical.append(block) != ledger::Violation::kNone) return CommitOutcome::kRejected;
  for (const auto& tx : block.transactions) state.committed.insert(tx.tx_id);
  return CommitOutcome::kCommitted;
}

void apply_commit(ConsensusState& state, std::size_t validator, std::uint64_t up_to_index) {
  auto& v = state.validators[validator];
  const auto& canon = state.canonical.blocks();
  std::set<ledger::TxId> landed;
  for (std::uint64_t idx = v.local_chain.tip().index + 1; idx <= up_to_index && idx < canon.size(); ++idx) {
    const auto& block = canon[idx];
    if (v.local_chain.append(block) != ledger::Violation::kNone) break;
    for (const auto& tx : block.transactions) landed.insert(tx.tx_id);
  }
  if (landed.empty()) return;
  std::erase_if(v.mempool, [&](const ledger::Transaction& tx) { return landed.contains(tx.tx_id); });
}

void return_to_mempool(ConsensusState& state, std::size_t validator, const ledger::Block& block) {
  auto& pool = state.validators[validator].mempool;
  std::vector<ledger::Transaction> back;
  for (const auto& tx : block.transactions) {
    if (state.committed.contains(tx.tx_id)) continue;
    const bool queued =
        std::any_of(pool.begin(), pool.end(), [&](const ledger::Transaction& m) { return m.tx_id == tx.tx_id; });
    if (!queued) back.push_back(tx);
  }
  pool.insert(pool.begin(), back.begin(), back.end());
}

}  // namespace poasim::consensus
