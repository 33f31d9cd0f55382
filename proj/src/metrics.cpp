#include "poasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace poasim::metrics {

namespace {

const Record* find_header(std::span<const Record> records) {
  for (const auto& r : records)
    if (r["kind"] == "header") return &r;
  return nullptr;
}

double header_duration(std::span<const Record> records) {
  const auto* h = find_header(records);
  return h != nullptr ? (*h)["duration_s"].get<double>() : 0.0;
}

std::map<std::string, std::string> node_classes(std::span<const Record> records) {
  std::map<std::string, std::string> classes;
  for (const auto& r : records)
    if (r["kind"] == "node") classes[r["node"].get<std::string>()] = r["class"].get<std::string>();
  return classes;
}

}  // namespace

std::optional<Stats> summarize(std::vector<double> samples) {
  if (samples.empty()) return std::nullopt;
  std::sort(samples.begin(), samples.end());
  Stats s;
  s.count = samples.size();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s.count);
  const std::size_t mid = s.count / 2;
  s.median = s.count % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(s.count)));
  s.p95 = samples[std::max<std::size_t>(rank, 1) - 1];
  s.max = samples.back();
  return s;
}

std::optional<Stats> response_time_stats(std::span<const Record> records) {
  std::map<std::uint64_t, double> created;
  std::vector<double> delays;
  for (const auto& r : records) {
    const auto& kind = r["kind"];
    if (kind == "tx_created") {
      created[r["tx"].get<std::uint64_t>()] = r["t"].get<double>();
    } else if (kind == "tx_committed") {
      const auto id = r["tx"].get<std::uint64_t>();
      auto it = created.find(id);
      const double start = it != created.end() ? it->second : r["created_at"].get<double>();
      delays.push_back(r["t"].get<double>() - start);
    }
  }
  return summarize(std::move(delays));
}

double throughput(std::span<const Record> records) {
  const double duration = header_duration(records);
  if (!(duration > 0.0)) return 0.0;
  double bytes = 0.0;
  for (const auto& r : records)
    if (r["kind"] == "tx_committed") bytes += r["size_bytes"].get<double>();
  return bytes / duration;
}

EnergyByClass energy_report(std::span<const Record> records) {
  const auto classes = node_classes(records);
  EnergyByClass e;
  for (const auto& r : records) {
    if (r["kind"] != "debit") continue;
    const double amount = r["amount_j"].get<double>();
    auto it = classes.find(r["node"].get<std::string>());
    if (it == classes.end()) continue;
    if (it->second == "sensor") e.sensors += amount;
    else if (it->second == "head") e.heads += amount;
    else if (it->second == "validator") e.validators += amount;
  }
  return e;
}

MetricsReport build_report(std::span<const Record> records) {
  MetricsReport rep;
  if (const auto* h = find_header(records)) {
    rep.policy = (*h)["policy"].get<std::string>();
    rep.fingerprint = (*h)["fingerprint"].get<std::string>();
    rep.seed = (*h)["seed"].get<std::uint64_t>();
    rep.duration_s = (*h)["duration_s"].get<double>();
  }
  rep.response_time = response_time_stats(records);
  rep.throughput_bps = throughput(records);
  rep.energy_j = energy_report(records);
  for (const auto& r : records) {
    if (r["kind"] != "summary") continue;
    rep.counts.created = r["created"].get<std::uint64_t>();
    rep.counts.committed = r["committed"].get<std::uint64_t>();
    rep.counts.pending = r["pending"].get<std::uint64_t>();
    rep.counts.dropped = r["dropped"].get<std::uint64_t>();
  }
  return rep;
}

MetricsReport build_report(const MetricsTrace& trace) {
  const auto records = trace.records();
  return build_report(records);
}

Record to_json(const MetricsReport& report) {
  Record j;
  j["policy"] = report.policy;
  j["fingerprint"] = report.fingerprint;
  j["seed"] = report.seed;
  j["duration_s"] = report.duration_s;
  if (report.response_time) {
    const auto& s = *report.response_time;
    j["response_time_s"] = {{"mean", s.mean}, {"median", s.median}, {"p95", s.p95}, {"max", s.max}, {"count", s.count}};
  } else {
    j["response_time_s"] = nullptr;
  }
  j["throughput_bps"] = report.throughput_bps;
  j["energy_j"] = {{"sensors", report.energy_j.sensors},
                   {"heads", report.energy_j.heads},
                   {"validators", report.energy_j.validators},
                   {"total", report.energy_j.total()}};
  j["counts"] = {{"created", report.counts.created},
                 {"committed", report.counts.committed},
                 {"pending", report.counts.pending},
                 {"dropped", report.counts.dropped}};
  return j;
}

std::vector<Delta> compare(const MetricsReport& a, const MetricsReport& b) {
  if (a.fingerprint != b.fingerprint)
    throw ConfigMismatch("reports come from different scenarios (" + a.fingerprint + " vs " + b.fingerprint + ")");
  std::vector<Delta> out;
  auto add = [&](std::string name, bool lower_better, double x, double y) {
    Delta d;
    d.metric = std::move(name);
    d.lower_is_better = lower_better;
    d.a = x;
    d.b = y;
    d.delta_pct = x != 0.0 ? (x - y) / x * 100.0 : 0.0;
    d.improvement_pct = lower_better ? d.delta_pct : -d.delta_pct;
    out.push_back(std::move(d));
  };
  const auto rt = [](const MetricsReport& r) { return r.response_time ? r.response_time->mean : 0.0; };
  const auto p95 = [](const MetricsReport& r) { return r.response_time ? r.response_time->p95 : 0.0; };
  add("response_time_mean_s", true, rt(a), rt(b));
  add("response_time_p95_s", true, p95(a), p95(b));
  add("throughput_bps", false, a.throughput_bps, b.throughput_bps);
  add("energy_validators_j", true, a.energy_j.validators, b.energy_j.validators);
  add("energy_wsn_j", true, a.energy_j.sensors + a.energy_j.heads, b.energy_j.sensors + b.energy_j.heads);
  add("energy_total_j", true, a.energy_j.total(), b.energy_j.total());
  return out;
}

void write_comparison_csv(std::span<const Delta> deltas, std::ostream& out) {
  // delta_pct = (a - b) / a * 100; improvement_pct > 0 means b beats a.
  out << "metric,lower_is_better,a,b,delta_pct,improvement_pct\n";
  out << std::setprecision(10);
  for (const auto& d : deltas)
    out << d.metric << ',' << (d.lower_is_better ? 1 : 0) << ',' << d.a << ',' << d.b << ',' << d.delta_pct << ','
        << d.improvement_pct << '\n';
}

std::vector<std::string> validate_trace(std::span<const Record> records, double energy_tol_j) {
  std::vector<std::string> problems;
  auto fail = [&](std::size_t line, const std::string& what) {
    problems.push_back("line " + std::to_string(line + 1) + ": " + what);
  };

  if (records.empty() || records.front()["kind"] != "header") {
    problems.emplace_back("trace does not start with a header record");
    return problems;
  }
  const auto& header = records.front();
  const double duration = header["duration_s"].get<double>();
  const std::string policy = header["policy"].get<std::string>();

  struct NodeBook {
    double initial = 0.0;
    double debited = 0.0;
    std::size_t debits = 0;
    bool finalized = false;
  };
  std::map<std::string, NodeBook> nodes;
  std::map<std::uint64_t, double> created, arrived, committed;
  std::set<std::uint64_t> dropped;
  std::map<std::uint64_t, std::size_t> evals_per_task;
  std::uint64_t expected_index = 1;
  bool saw_summary = false;
  double last_t = 0.0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double t = r["t"].get<double>();
    const std::string kind = r["kind"].get<std::string>();
    if (t < 0.0 || t > duration) fail(i, "timestamp " + std::to_string(t) + " outside [0, duration]");
    if (t < last_t) fail(i, "timestamp goes backwards");
    last_t = t;

    if (kind == "node") {
      nodes[r["node"].get<std::string>()].initial = r["initial_j"].get<double>();
    } else if (kind == "debit") {
      const auto name = r["node"].get<std::string>();
      auto it = nodes.find(name);
      if (it == nodes.end()) {
        fail(i, "debit for unknown node " + name);
        continue;
      }
      const double amount = r["amount_j"].get<double>();
      if (amount < 0.0) fail(i, "negative debit");
      it->second.debited += amount;
      ++it->second.debits;
      const double expect = it->second.initial - it->second.debited;
      if (std::abs(expect - r["remaining_j"].get<double>()) > energy_tol_j)
        fail(i, "energy not conserved for " + name);
      if (r["remaining_j"].get<double>() < -energy_tol_j) fail(i, "negative remaining energy for " + name);
    } else if (kind == "node_final") {
      const auto name = r["node"].get<std::string>();
      auto it = nodes.find(name);
      if (it == nodes.end()) {
        fail(i, "final record for unknown node " + name);
        continue;
      }
      it->second.finalized = true;
      const double expect = it->second.initial - it->second.debited;
      if (std::abs(expect - r["remaining_j"].get<double>()) > energy_tol_j)
        fail(i, "final energy does not match debits for " + name);
      if (r["debits"].get<std::size_t>() != it->second.debits) fail(i, "debit count mismatch for " + name);
    } else if (kind == "tx_created") {
      const auto id = r["tx"].get<std::uint64_t>();
      if (!created.emplace(id, t).second) fail(i, "transaction " + std::to_string(id) + " created twice");
    } else if (kind == "tx_arrived") {
      const auto id = r["tx"].get<std::uint64_t>();
      auto c = created.find(id);
      if (c == created.end() || t < c->second) fail(i, "transaction arrived before it was created");
      arrived[id] = t;
    } else if (kind == "tx_committed") {
      const auto id = r["tx"].get<std::uint64_t>();
      auto a = arrived.find(id);
      if (a == arrived.end() || t < a->second) fail(i, "transaction committed before it arrived");
      if (!committed.emplace(id, t).second) fail(i, "transaction " + std::to_string(id) + " committed twice");
      if (dropped.contains(id)) fail(i, "dropped transaction was committed");
    } else if (kind == "tx_dropped") {
      dropped.insert(r["tx"].get<std::uint64_t>());
    } else if (kind == "attractiveness") {
      if (policy == "tbs") fail(i, "attractiveness evaluated under pure TBS");
      ++evals_per_task[r["task"].get<std::uint64_t>()];
    } else if (kind == "select") {
      const auto task = r["task"].get<std::uint64_t>();
      const std::string mode = r["mode"].get<std::string>();
      const bool tbs_ok = r["tbs_admissible"].get<bool>();
      const auto evals = r["evaluations"].get<std::size_t>();
      if (evals != evals_per_task[task]) fail(i, "evaluation count does not match attractiveness records");
      evals_per_task.erase(task);
      if (mode == "wbs-fallback") {
        if (policy == "tbs") fail(i, "fallback selection under pure TBS");
        if (tbs_ok) fail(i, "fallback taken although the TBS candidate could admit the task");
      } else if (mode == "tbs") {
        if (!tbs_ok) fail(i, "TBS placement on a VM that could not admit the task");
        if (r["pm"] != r["tbs_pm"] || r["vm"] != r["tbs_vm"]) fail(i, "TBS placement differs from TBS candidate");
        if (evals != 0) fail(i, "attractiveness evaluated although TBS succeeded");
      }
    } else if (kind == "block_committed") {
      const auto index = r["index"].get<std::uint64_t>();
      if (index != expected_index) fail(i, "committed block index " + std::to_string(index) + " breaks the chain");
      expected_index = index + 1;
    } else if (kind == "summary") {
      saw_summary = true;
      const auto c = r["created"].get<std::uint64_t>();
      const auto k = r["committed"].get<std::uint64_t>();
      const auto p = r["pending"].get<std::uint64_t>();
      const auto d = r["dropped"].get<std::uint64_t>();
      if (c != k + p + d) fail(i, "created != committed + pending + dropped");
      if (c != created.size()) fail(i, "created count disagrees with tx_created records");
      if (k != committed.size()) fail(i, "committed count disagrees with tx_committed records");
      if (d != dropped.size()) fail(i, "dropped count disagrees with tx_dropped records");
      if (r["chain_height"].get<std::uint64_t>() + 1 != expected_index) fail(i, "chain height disagrees with commits");
    }
  }
  if (!saw_summary) problems.emplace_back("trace has no summary record");
  for (const auto& [name, book] : nodes)
    if (!book.finalized) problems.push_back("node " + name + " has no final energy record");
  return problems;
}

}  // namespace poasim::metrics
