#include "poasim/energy.hpp"

#include <algorithm>
#include <stdexcept>

namespace poasim {

std::string_view to_string(DebitCause cause) {
  switch (cause) {
    case DebitCause::kSenseTx: return "sense_tx";
    case DebitCause::kHeadRx: return "head_rx";
    case DebitCause::kHeadTx: return "head_tx";
    case DebitCause::kBusy: return "busy";
    case DebitCause::kIdle: return "idle";
  }
  return "unknown";
}

double NodeEnergy::debit(double time, double amount_j, DebitCause cause) {
  if (amount_j < 0.0) throw std::invalid_argument("energy debit must be nonnegative");
  const double left = remaining();
  double take = amount_j;
  if (take >= left) {
    take = std::max(left, 0.0);
    if (amount_j > 0.0) depleted_ = true;
  }
  if (take > 0.0) {
    debited_j_ += take;
    debits_.push_back({time, take, cause});
  }
  return take;
}

}  // namespace poasim
