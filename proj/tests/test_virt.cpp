#include <cmath>
#include <random>

#include "doctest.h"
#include "poasim/virt.hpp"
#include "support.hpp"

using namespace poasim;
using namespace poasim::virt;

namespace {

PhysicalMachine table2_pm() { return make_pm(0, MachineSpec{}); }

bool rel_close(double got, long double want, long double tol = 1e-12L) {
  return std::fabs(static_cast<long double>(got) - want) <= tol * std::fabs(want);
}

}  // namespace

TEST_CASE("utilization") {
  auto pm = table2_pm();
  CHECK(utilization(pm) == 0.0);
  pm.cpu_alloc = pm.total_cpu;
  pm.mem_alloc = pm.total_mem;
  CHECK(utilization(pm) == 1.0);
  pm.cpu_alloc = to_micro(2.0);  // 0.5 of 4 cores
  pm.mem_alloc = to_micro(5.6);  // 0.7 of 8 GB
  CHECK(utilization(pm) == doctest::Approx(0.6).epsilon(1e-12));
  pm.cpu_weight = 1.0;
  CHECK(utilization(pm) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ib_score anchors") {
  CHECK(ib_score(0.8, 0.8) == 1.0);
  CHECK(ib_score(0.37, 0.37) == 1.0);
  // mpmath at 30 digits
  CHECK(rel_close(ib_score(0.5, 0.8), 0.740818220681717866066873779318L));
  CHECK(rel_close(ib_score(1.0, 0.8), 1.22140275816016983392107199464L));
}

TEST_CASE("load fraction") {
  auto pm = table2_pm();
  CHECK(*load_fraction(pm.vms[0], pm) == 0.25);
  pm.cpu_alloc = to_micro(2.0);
  pm.vms[0].s_vm = to_micro(2.0);
  CHECK(*load_fraction(pm.vms[0], pm) == 1.0);
  pm.cpu_alloc = pm.total_cpu;
  CHECK_FALSE(load_fraction(pm.vms[0], pm).has_value());
  CHECK_FALSE(attractiveness(pm, pm.vms[0]).has_value());
}

TEST_CASE("attractiveness") {
  auto pm = table2_pm();
  pm.t_upper = 0.0;
  pm.mem_alloc = 0;
  CHECK(*attractiveness(pm, pm.vms[0]) == doctest::Approx(0.25 * std::exp(-0.0)));

  pm = table2_pm();
  pm.mem_alloc = pm.total_mem;  // u = 0.5 with all four cores still free
  CHECK(utilization(pm) == 0.5);
  CHECK(rel_close(*attractiveness(pm, pm.vms[0]), 0.185204555170429466516718444829L));
}

TEST_CASE("property: attractiveness increases with u and with s_vm") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    auto pm = table2_pm();
    pm.cpu_alloc = to_micro(3.0 * unit(g));
    pm.mem_alloc = to_micro(7.0 * unit(g));
    const double before = *attractiveness(pm, pm.vms[0]);
    auto more_mem = pm;
    more_mem.mem_alloc += to_micro(0.5);
    CHECK(*attractiveness(more_mem, more_mem.vms[0]) > before);
    auto bigger = pm;
    bigger.vms[0].s_vm += to_micro(0.25);
    CHECK(*attractiveness(bigger, bigger.vms[0]) > before);
  }
}

TEST_CASE("admission bookkeeping") {
  auto pm = table2_pm();
  const auto half = testsupport::task(0.5);
  CHECK(admit_task(pm, 0, half) == Admission::kAccepted);
  CHECK(admit_task(pm, 0, half) == Admission::kAccepted);
  CHECK(admit_task(pm, 0, half) == Admission::kRejected);
  CHECK(pm.remaining_cpu() == to_micro(3.0));
  CHECK(pm.mem_alloc == to_micro(1.0));

  CHECK(admit_task(pm, 1, testsupport::task(1.0)) == Admission::kAccepted);
  CHECK(admit_task(pm, 1, testsupport::task(0.1)) == Admission::kRejected);

  // memory is a PM-wide budget
  auto small = table2_pm();
  CHECK(admit_task(small, 0, testsupport::task(0.1, 7.5)) == Admission::kAccepted);
  CHECK(admit_task(small, 1, testsupport::task(0.1, 0.6)) == Admission::kRejected);

  CHECK_THROWS_AS(release_task(small, 2, testsupport::task(0.1, 0.1)), std::logic_error);
}

TEST_CASE("property: admit then release restores the books exactly") {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> cpu(0.01, 1.0);
  std::uniform_real_distribution<double> mem(0.01, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto pm = table2_pm();
    std::vector<std::pair<std::size_t, ValidationTask>> admitted;
    for (int k = 0; k < 12; ++k) {
      const auto t = testsupport::task(cpu(g), mem(g));
      const std::size_t vm = g() % pm.vms.size();
      if (admit_task(pm, vm, t) == Admission::kAccepted) admitted.emplace_back(vm, t);
      Micro committed = 0;
      for (const auto& v : pm.vms) committed += v.committed_cpu;
      CHECK(committed == pm.cpu_alloc);
      CHECK(pm.cpu_alloc <= pm.total_cpu);
      CHECK(pm.mem_alloc <= pm.total_mem);
    }
    std::shuffle(admitted.begin(), admitted.end(), g);
    for (const auto& [vm, t] : admitted) release_task(pm, vm, t);
    CHECK(pm.cpu_alloc == 0);
    CHECK(pm.mem_alloc == 0);
    for (const auto& v : pm.vms) CHECK(v.committed_cpu == 0);
  }
}

TEST_CASE("service time") {
  auto pm = table2_pm();
  auto t = testsupport::task(1.0);
  t.work_units = 1e6;
  CHECK(service_time(t, pm.vms[0]) == 1.0);
  t.work_units = work_units(160);
  CHECK(service_time(t, pm.vms[0]) == doctest::Approx(2.6e-3).epsilon(1e-12));

  WorkModel no_alpha{0.0, 10.0, 1e6};
  CHECK(work_units(400, no_alpha) == 2 * work_units(200, no_alpha));
}

TEST_CASE("compute energy") {
  auto pm = table2_pm();
  CHECK(compute_energy(pm, 0.0, 0.0, 0.0) == 0.0);
  CHECK(pm.energy.debits().empty());
  CHECK(compute_energy(pm, 1.0, 0.0, 1.0) == doctest::Approx(0.8));
  auto other = table2_pm();
  CHECK(compute_energy(other, 2.0, 3.0, 5.0) == doctest::Approx(1.9).epsilon(1e-12));
  CHECK_THROWS_AS(compute_energy(other, -1.0, 0.0, 5.0), std::invalid_argument);
}

TEST_CASE("settle_energy charges the committed core share as busy") {
  auto pm = table2_pm();
  CHECK(settle_energy(pm, 10.0) == doctest::Approx(1.0));  // idle at 0.1 W
  REQUIRE(admit_task(pm, 0, testsupport::task(1.0)) == Admission::kAccepted);
  // one of four cores busy for 2 s: 0.5 s at 0.8 W + 1.5 s at 0.1 W
  CHECK(settle_energy(pm, 12.0) == doctest::Approx(0.55));
  CHECK(settle_energy(pm, 12.0) == 0.0);
}
