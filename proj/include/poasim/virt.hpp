#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "poasim/energy.hpp"
#include "poasim/ledger.hpp"

namespace poasim::virt {

using PmId = std::uint32_t;
using VmId = std::uint32_t;
using TaskId = std::uint64_t;

/// Resource amounts (cores, GB) are kept in integer millionths so that
/// admitting and releasing a task restores the books bit for bit.
using Micro = std::int64_t;
Micro to_micro(double amount);
double from_micro(Micro amount);

enum class TaskPurpose { kTxValidation, kBlockProposal, kBlockVerification };
std::string_view to_string(TaskPurpose purpose);

struct ValidationTask {
  TaskId task_id = 0;
  TaskPurpose purpose = TaskPurpose::kTxValidation;
  std::optional<ledger::TxId> tx_ref;
  double cpu_demand_cores = 1.0;
  double mem_demand_gb = 0.5;
  double work_units = 0.0;
};

/// Abstract compute cost: a transaction of n bytes costs alpha + beta * n
/// units; a core retires per_core_rate units per second.
struct WorkModel {
  double alpha_units = 1000.0;
  double beta_units_per_byte = 10.0;
  double per_core_rate = 1e6;
};

double work_units(std::uint64_t size_bytes, const WorkModel& model = {});

struct VirtualMachine {
  VmId vm_id = 0;
  PmId host_pm = 0;
  Micro s_vm = 0;  // cores assigned to the VM
  Micro mem = 0;
  Micro committed_cpu = 0;
  double busy_until = 0.0;
  std::deque<ValidationTask> task_queue;  // waiting for this VM
  std::vector<ValidationTask> running;

  double cores() const { return from_micro(s_vm); }
  Micro uncommitted_cpu() const { return s_vm - committed_cpu; }
  /// Work attached to the VM: running plus queued tasks.
  std::size_t load() const { return running.size() + task_queue.size(); }
};

struct PowerModel {
  double busy_w = 0.8;
  double idle_w = 0.1;
};

struct MachineSpec {
  double pm_cores = 4.0;
  double pm_mem_gb = 8.0;
  std::uint32_t vms_per_pm = 4;
  double vm_cores = 1.0;
  double vm_mem_gb = 1.7;
  double t_upper = 0.8;
  double cpu_weight = 0.5;  // weight of CPU vs RAM in utilization
  PowerModel power;
  double initial_energy_j = 10.0;
};

struct PhysicalMachine {
  PmId pm_id = 0;
  Micro total_cpu = 0;
  Micro total_mem = 0;
  double t_upper = 0.8;
  double cpu_weight = 0.5;
  std::vector<VirtualMachine> vms;
  Micro cpu_alloc = 0;
  Micro mem_alloc = 0;
  PowerModel power;
  NodeEnergy energy;
  double energy_settled_at = 0.0;

  /// S_PM: cores not yet committed to any task.
  Micro remaining_cpu() const { return total_cpu - cpu_alloc; }
  Micro remaining_mem() const { return total_mem - mem_alloc; }
  std::size_t running_tasks() const;
};

PhysicalMachine make_pm(PmId id, const MachineSpec& spec);

/// Weighted CPU/RAM allocation ratio, clamped to [0, 1].
double utilization(const PhysicalMachine& pm);

/// exp(u - t_upper).
double ib_score(double u, double t_upper);

/// s_vm / S_PM; empty when the PM has no CPU left, in which case the PM must
/// be skipped.
std::optional<double> load_fraction(const VirtualMachine& vm, const PhysicalMachine& pm);

/// ib_score(utilization(pm), t_upper) * load_fraction(vm, pm). Lower is
/// better.
std::optional<double> attractiveness(const PhysicalMachine& pm, const VirtualMachine& vm);

bool can_admit(const VirtualMachine& vm, const PhysicalMachine& pm, const ValidationTask& task);

enum class Admission { kAccepted, kRejected };

/// On acceptance the task's CPU and memory stay committed until release_task.
Admission admit_task(PhysicalMachine& pm, std::size_t vm_index, const ValidationTask& task);
void release_task(PhysicalMachine& pm, std::size_t vm_index, const ValidationTask& task);

double service_time(const ValidationTask& task, const VirtualMachine& vm, const WorkModel& model = {});

/// Debits busy_w * busy_s + idle_w * idle_s from the PM's budget and returns
/// the amount actually debited.
double compute_energy(PhysicalMachine& pm, double busy_s, double idle_s, double now);

/// Charges the interval since the last settlement: the committed share of
/// the PM's cores draws busy power, the rest idle power.
double settle_energy(PhysicalMachine& pm, double now);

}  // namespace poasim::virt
