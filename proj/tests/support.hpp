#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "poasim/consensus.hpp"
#include "poasim/ledger.hpp"

namespace testsupport {

inline poasim::ledger::Transaction random_tx(std::mt19937_64& g, poasim::ledger::TxId id) {
  poasim::ledger::Transaction tx;
  tx.tx_id = id;
  tx.origin_head = static_cast<std::uint32_t>(g() % 8);
  tx.size_bytes = 64 + g() % 4096;
  tx.created_at = static_cast<double>(g() % 100000) / 10.0;
  for (auto& b : tx.payload_digest) b = static_cast<std::uint8_t>(g());
  return tx;
}

/// A chain of `blocks` blocks with 0..max_txs random transactions each.
inline poasim::ledger::Chain random_chain(std::mt19937_64& g, std::size_t blocks, std::size_t max_txs) {
  poasim::ledger::Chain chain;
  poasim::ledger::TxId next = 0;
  double t = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::vector<poasim::ledger::Transaction> txs;
    const auto n = g() % (max_txs + 1);
    for (std::size_t k = 0; k < n; ++k) txs.push_back(random_tx(g, next++));
    t += static_cast<double>(g() % 1000) / 100.0;
    auto b = poasim::ledger::make_block(chain.tip(), t, static_cast<std::uint32_t>(g() % 4), std::move(txs));
    if (chain.append(std::move(b)) != poasim::ledger::Violation::kNone) throw std::logic_error("append failed");
  }
  return chain;
}

/// Fleet of `pms` validators, each with `vms` one-core VMs on a 4-core, 8 GB PM.
inline poasim::consensus::ConsensusState make_fleet(std::size_t pms, std::size_t vms,
                                                    poasim::consensus::SelectionPolicy policy) {
  poasim::consensus::ConsensusState s;
  s.policy = policy;
  poasim::virt::MachineSpec spec;
  spec.vms_per_pm = static_cast<std::uint32_t>(vms);
  for (std::size_t i = 0; i < pms; ++i) {
    poasim::consensus::Validator v;
    v.validator_id = static_cast<std::uint32_t>(i);
    v.pm = poasim::virt::make_pm(static_cast<std::uint32_t>(i), spec);
    s.validators.push_back(std::move(v));
  }
  return s;
}

inline poasim::virt::ValidationTask task(double cpu, double mem = 0.5, poasim::virt::TaskId id = 0) {
  poasim::virt::ValidationTask t;
  t.task_id = id;
  t.cpu_demand_cores = cpu;
  t.mem_demand_gb = mem;
  t.work_units = 1000.0;
  return t;
}

/// Exhaustive argmin of exp(u - t_upper) * s_vm / S_PM written out from the
/// raw resource fields, independent of the library's selection code.
inline std::optional<poasim::consensus::Slot> brute_force_wbs(const poasim::consensus::ConsensusState& s,
                                                              const poasim::virt::ValidationTask& t) {
  using Candidate = std::tuple<double, std::size_t, std::size_t>;
  std::vector<Candidate> all;
  const auto need_cpu = static_cast<std::int64_t>(std::llround(t.cpu_demand_cores * 1e6));
  const auto need_mem = static_cast<std::int64_t>(std::llround(t.mem_demand_gb * 1e6));
  for (std::size_t i = 0; i < s.validators.size(); ++i) {
    const auto& v = s.validators[i];
    const auto& pm = v.pm;
    const std::int64_t free_cpu = pm.total_cpu - pm.cpu_alloc;
    if (!v.active || free_cpu <= 0) continue;
    double u = pm.cpu_weight * (static_cast<double>(pm.cpu_alloc) / 1e6) / (static_cast<double>(pm.total_cpu) / 1e6) +
               (1.0 - pm.cpu_weight) * (static_cast<double>(pm.mem_alloc) / 1e6) /
                   (static_cast<double>(pm.total_mem) / 1e6);
    u = std::min(1.0, std::max(0.0, u));
    for (std::size_t j = 0; j < pm.vms.size(); ++j) {
      const auto& vm = pm.vms[j];
      if (vm.s_vm - vm.committed_cpu < need_cpu || pm.total_mem - pm.mem_alloc < need_mem) continue;
      const double w =
          std::exp(u - pm.t_upper) * ((static_cast<double>(vm.s_vm) / 1e6) / (static_cast<double>(free_cpu) / 1e6));
      all.emplace_back(w, i, j);
    }
  }
  if (all.empty()) return std::nullopt;
  const auto& [w, i, j] = *std::min_element(all.begin(), all.end());
  return poasim::consensus::Slot{i, j};
}

/// Random fleet: up to 8 PMs of up to 4 VMs, random core shares, random load
/// placed through admit_task, random availability.
inline poasim::consensus::ConsensusState random_fleet(std::mt19937_64& g) {
  using namespace poasim;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  consensus::ConsensusState s;
  s.policy = consensus::SelectionPolicy::kWbs;
  const std::size_t pms = 1 + g() % 8;
  for (std::size_t i = 0; i < pms; ++i) {
    virt::MachineSpec spec;
    spec.vms_per_pm = static_cast<std::uint32_t>(1 + g() % 4);
    spec.pm_cores = 4.0;
    spec.vm_cores = (g() % 2) ? 1.0 : 0.5 + 0.5 * unit(g);
    spec.t_upper = unit(g);
    spec.cpu_weight = (g() % 4 == 0) ? 0.5 : unit(g);
    consensus::Validator v;
    v.validator_id = static_cast<std::uint32_t>(i);
    v.pm = virt::make_pm(static_cast<std::uint32_t>(i), spec);
    v.active = g() % 8 != 0;
    const auto tasks = g() % 6;
    for (std::size_t k = 0; k < tasks; ++k) {
      auto t = task(0.05 + 0.95 * unit(g), 0.1 + 2.0 * unit(g));
      (void)virt::admit_task(v.pm, g() % v.pm.vms.size(), t);
    }
    s.validators.push_back(std::move(v));
  }
  // Occasionally clone a PM so that exact weight ties show up.
  if (pms >= 2 && g() % 3 == 0) {
    auto copy = s.validators[0];
    copy.validator_id = static_cast<std::uint32_t>(pms - 1);
    copy.pm.pm_id = copy.validator_id;
    for (auto& vm : copy.pm.vms) vm.host_pm = copy.validator_id;
    s.validators[pms - 1] = std::move(copy);
  }
  return s;
}

}  // namespace testsupport
