#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "poasim/ledger.hpp"
#include "poasim/virt.hpp"

namespace poasim::consensus {

using ledger::ValidatorId;

enum class SelectionPolicy { kTbs, kWbs };
std::string_view to_string(SelectionPolicy policy);
std::optional<SelectionPolicy> parse_policy(std::string_view text);

struct Validator {
  ValidatorId validator_id = 0;
  virt::PhysicalMachine pm;
  ledger::Chain local_chain;
  std::deque<ledger::Transaction> mempool;
  bool active = true;
};

/// A VM address inside the fleet: validators[validator].pm.vms[vm].
struct Slot {
  std::size_t validator = 0;
  std::size_t vm = 0;

  friend bool operator==(const Slot&, const Slot&) = default;
  friend auto operator<=>(const Slot&, const Slot&) = default;
};

struct ConsensusState {
  std::vector<Validator> validators;
  SelectionPolicy policy = SelectionPolicy::kWbs;
  std::size_t rr_cursor = 0;        // flattened (pm asc, vm asc) rotation
  std::size_t proposer_cursor = 0;  // round proposer rotation
  double round_length_s = 5.0;
  std::deque<virt::ValidationTask> pending_queue;
  ledger::Chain canonical;  // the chain every local chain is a prefix of
  std::set<ledger::TxId> committed;

  std::size_t active_count() const;
  virt::PhysicalMachine& pm(const Slot& s) { return validators[s.validator].pm; }
  const virt::PhysicalMachine& pm(const Slot& s) const { return validators[s.validator].pm; }
  virt::VirtualMachine& vm(const Slot& s) { return pm(s).vms[s.vm]; }
  const virt::VirtualMachine& vm(const Slot& s) const { return pm(s).vms[s.vm]; }
};

/// Round-robin over every VM of every active validator. Empty when no
/// validator is active.
std::optional<Slot> tbs_next(ConsensusState& state);

/// Called once per attractiveness evaluation.
using EvalSink = std::function<void(const Slot&, double weight)>;

/// Argmin of attractiveness over admissible VMs on active PMs with CPU left.
/// Ties go to the lowest (pm, vm). Empty means no capacity anywhere.
std::optional<Slot> wbs_select(const ConsensusState& state, const virt::ValidationTask& task,
                               const EvalSink& on_eval = {});

enum class SelectionMode { kTbs, kWbsFallback, kQueued };
std::string_view to_string(SelectionMode mode);

struct Selection {
  SelectionMode mode = SelectionMode::kQueued;
  /// Where the task runs (kTbs, kWbsFallback) or waits (kQueued under pure
  /// TBS). Empty for a task parked on the pending queue.
  std::optional<Slot> slot;
  std::optional<Slot> tbs_candidate;
  bool tbs_admissible = false;
  std::size_t evaluations = 0;
};

/// Turn-based candidate first; attractiveness fallback only when that VM
/// cannot take the task and the policy allows it. Does not mutate resources;
/// the caller admits or enqueues according to the returned mode.
Selection select_validator(ConsensusState& state, const virt::ValidationTask& task, const EvalSink& on_eval = {});

/// Next active validator in proposer rotation, advancing the cursor.
std::optional<std::size_t> next_proposer(ConsensusState& state);

/// Drains up to max_txs mempool entries (FIFO) into a block on the
/// validator's local tip. Empty mempool yields nothing.
std::optional<ledger::Block> propose_block(Validator& validator, double now, std::size_t max_txs);

enum class Vote { kApprove, kReject };

Vote verify_block(const Validator& validator, const ledger::Block& block);

/// Strict fraction test: approvals / voters > threshold.
bool has_majority(std::size_t approvals, std::size_t voters, double threshold = 0.51);

enum class CommitOutcome { kCommitted, kRejected };

/// Appends to the canonical chain when the vote passes and the block still
/// extends the canonical tip.
CommitOutcome commit_block(ConsensusState& state, const ledger::Block& block, std::size_t approvals,
                           std::size_t voters, double threshold = 0.51);

/// Brings the validator's local chain up to canonical height `up_to_index`
/// and drops the newly committed transactions from its mempool.
void apply_commit(ConsensusState& state, std::size_t validator, std::uint64_t up_to_index);

/// Puts the transactions of a rejected block back at the front of the
/// proposer's mempool, skipping any that are committed or already queued.
void return_to_mempool(ConsensusState& state, std::size_t validator, const ledger::Block& block);

}  // namespace poasim::consensus
