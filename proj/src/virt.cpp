#include "poasim/virt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poasim::virt {

Micro to_micro(double amount) { return static_cast<Micro>(std::llround(amount * 1e6)); }
double from_micro(Micro amount) { return static_cast<double>(amount) / 1e6; }

std::string_view to_string(TaskPurpose purpose) {
  switch (purpose) {
    case TaskPurpose::kTxValidation: return "tx";
    case TaskPurpose::kBlockProposal: return "proposal";
    case TaskPurpose::kBlockVerification: return "verification";
  }
  return "unknown";
}

double work_units(std::uint64_t size_bytes, const WorkModel& model) {
  return model.alpha_units + model.beta_units_per_byte * static_cast<double>(size_bytes);
}

std::size_t PhysicalMachine::running_tasks() const {
  std::size_t n = 0;
  for (const auto& vm : vms) n += vm.running.size();
  return n;
}

PhysicalMachine make_pm(PmId id, const MachineSpec& spec) {
  if (spec.vms_per_pm == 0) throw std::invalid_argument("a PM needs at least one VM");
  if (spec.vm_cores <= 0.0) throw std::invalid_argument("VM core share must be positive");
  PhysicalMachine pm;
  pm.pm_id = id;
  pm.total_cpu = to_micro(spec.pm_cores);
  pm.total_mem = to_micro(spec.pm_mem_gb);
  pm.t_upper = spec.t_upper;
  pm.cpu_weight = spec.cpu_weight;
  pm.power = spec.power;
  pm.energy = NodeEnergy(spec.initial_energy_j);
  for (std::uint32_t i = 0; i < spec.vms_per_pm; ++i) {
    VirtualMachine vm;
    vm.vm_id = i;
    vm.host_pm = id;
    vm.s_vm = to_micro(spec.vm_cores);
    vm.mem = to_micro(spec.vm_mem_gb);
    pm.vms.push_back(std::move(vm));
  }
  return pm;
}

double utilization(const PhysicalMachine& pm) {
  const double cpu = pm.total_cpu > 0 ? from_micro(pm.cpu_alloc) / from_micro(pm.total_cpu) : 0.0;
  const double mem = pm.total_mem > 0 ? from_micro(pm.mem_alloc) / from_micro(pm.total_mem) : 0.0;
  const double u = pm.cpu_weight * cpu + (1.0 - pm.cpu_weight) * mem;
  return std::clamp(u, 0.0, 1.0);
}

double ib_score(double u, double t_upper) { return std::exp(u - t_upper); }

std::optional<double> load_fraction(const VirtualMachine& vm, const PhysicalMachine& pm) {
  const Micro remaining = pm.remaining_cpu();
  if (remaining <= 0) return std::nullopt;
  return from_micro(vm.s_vm) / from_micro(remaining);
}

std::optional<double> attractiveness(const PhysicalMachine& pm, const VirtualMachine& vm) {
  const auto lf = load_fraction(vm, pm);
  if (!lf) return std::nullopt;
  return ib_score(utilization(pm), pm.t_upper) * *lf;
}

bool can_admit(const VirtualMachine& vm, const PhysicalMachine& pm, const ValidationTask& task) {
  return vm.uncommitted_cpu() >= to_micro(task.cpu_demand_cores) && pm.remaining_mem() >= to_micro(task.mem_demand_gb);
}

Admission admit_task(PhysicalMachine& pm, std::size_t vm_index, const ValidationTask& task) {
  auto& vm = pm.vms.at(vm_index);
  if (!can_admit(vm, pm, task)) return Admission::kRejected;
  const Micro cpu = to_micro(task.cpu_demand_cores);
  const Micro mem = to_micro(task.mem_demand_gb);
  vm.committed_cpu += cpu;
  pm.cpu_alloc += cpu;
  pm.mem_alloc += mem;
  return Admission::kAccepted;
}

void release_task(PhysicalMachine& pm, std::size_t vm_index, const ValidationTask& task) {
  auto& vm = pm.vms.at(vm_index);
  const Micro cpu = to_micro(task.cpu_demand_cores);
  const Micro mem = to_micro(task.mem_demand_gb);
  if (vm.committed_cpu < cpu || pm.mem_alloc < mem) throw std::logic_error("releasing more than was committed");
  vm.committed_cpu -= cpu;
  pm.cpu_alloc -= cpu;
  pm.mem_alloc -= mem;
}

double service_time(const ValidationTask& task, const VirtualMachine& vm, const WorkModel& model) {
  return task.work_units / (vm.cores() * model.per_core_rate);
}

double compute_energy(PhysicalMachine& pm, double busy_s, double idle_s, double now) {
  if (busy_s < 0.0 || idle_s < 0.0) throw std::invalid_argument("durations must be nonnegative");
  double taken = pm.energy.debit(now, pm.power.busy_w * busy_s, DebitCause::kBusy);
  taken += pm.energy.debit(now, pm.power.idle_w * idle_s, DebitCause::kIdle);
  return taken;
}

double settle_energy(PhysicalMachine& pm, double now) {
  const double elapsed = now - pm.energy_settled_at;
  if (elapsed <= 0.0) return 0.0;
  pm.energy_settled_at = now;
  // Power is linear in the share of cores committed to running tasks.
  const double share = std::clamp(from_micro(pm.cpu_alloc) / from_micro(pm.total_cpu), 0.0, 1.0);
  const double busy_s = elapsed * share;
  return compute_energy(pm, busy_s, elapsed - busy_s, now);
}

}  // namespace poasim::virt
