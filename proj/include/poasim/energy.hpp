#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace poasim {

enum class DebitCause { kSenseTx, kHeadRx, kHeadTx, kBusy, kIdle };

std::string_view to_string(DebitCause cause);

struct EnergyDebit {
  double time = 0.0;
  double amount_j = 0.0;
  DebitCause cause = DebitCause::kIdle;
};

/// Per-node energy budget. remaining() is always initial() minus the running
/// sum of debits, and never negative: a debit larger than what is left is
/// clipped and the node is depleted.
class NodeEnergy {
 public:
  explicit NodeEnergy(double initial_j = 0.0) : initial_j_(initial_j) {}

  double initial() const { return initial_j_; }
  double remaining() const { return initial_j_ - debited_j_; }
  double consumed() const { return debited_j_; }
  bool depleted() const { return depleted_; }
  bool can_afford(double amount_j) const { return !depleted_ && amount_j <= remaining(); }

  /// Returns the amount actually debited. Zero-amount debits are not recorded.
  double debit(double time, double amount_j, DebitCause cause);

  std::span<const EnergyDebit> debits() const { return debits_; }

 private:
  double initial_j_;
  double debited_j_ = 0.0;
  bool depleted_ = false;
  std::vector<EnergyDebit> debits_;
};

}  // namespace poasim
