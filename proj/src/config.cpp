#include "poasim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace poasim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join_diagnostics(const std::vector<std::string>& diags) {
  std::ostringstream out;
  out << "invalid scenario config";
  for (const auto& d : diags) out << "\n  " << d;
  return out.str();
}

/// Walks one JSON object, pulling known keys and remembering which were used
/// so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json* obj, std::string path, std::vector<std::string>& diags)
      : obj_(obj), path_(std::move(path)), diags_(diags) {
    if (obj_ != nullptr && !obj_->is_object()) {
      diags_.push_back(where("") + ": expected an object");
      obj_ = nullptr;
    }
  }

  Section sub(const std::string& key) {
    const json* child = find(key);
    return Section(child, where(key), diags_);
  }

  const json* find(const std::string& key) {
    if (obj_ == nullptr) return nullptr;
    auto it = obj_->find(key);
    if (it == obj_->end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void number(const std::string& key, double& out, const std::function<bool(double)>& ok, const char* rule) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number()) {
      diags_.push_back(where(key) + ": expected a number");
      return;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x) || !ok(x)) {
      diags_.push_back(where(key) + ": must be " + rule);
      return;
    }
    out = x;
  }

  template <class U>
  void integer(const std::string& key, U& out, std::uint64_t min_value) {
    const json* v = find(key);
    if (v == nullptr) return;
    const bool negative = v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0;
    if (!v->is_number_integer() || negative) {
      diags_.push_back(where(key) + ": expected a nonnegative integer");
      return;
    }
    const auto x = v->get<std::uint64_t>();
    if (x < min_value) {
      diags_.push_back(where(key) + ": must be at least " + std::to_string(min_value));
      return;
    }
    out = static_cast<U>(x);
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) {
      diags_.push_back(where(key) + ": expected true or false");
      return;
    }
    out = v->get<bool>();
  }

  void finish() {
    if (obj_ == nullptr) return;
    for (const auto& [key, _] : obj_->items()) {
      if (!seen_.contains(key)) diags_.push_back(where(key) + ": unknown key");
    }
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  std::vector<std::string>& diags() { return diags_; }

 private:
  const json* obj_;
  std::string path_;
  std::vector<std::string>& diags_;
  std::set<std::string> seen_;
};

const auto positive = [](double x) { return x > 0.0; };
const auto nonnegative = [](double x) { return x >= 0.0; };
const auto unit_interval = [](double x) { return x >= 0.0 && x <= 1.0; };

void check_constraints(const ScenarioConfig& c, std::vector<std::string>& diags) {
  if (c.validator_count && c.validator_ratio) diags.push_back("validators: give either count or ratio, not both");
  if (c.resolved_validator_count() == 0) diags.push_back("validators.count: must be at least 1");
  if (c.machine.vm_cores * c.machine.vms_per_pm > c.machine.pm_cores + 1e-9)
    diags.push_back("validators: vm_cores * vms_per_pm exceeds pm_cores");
  if (c.task_cpu_cores > c.machine.vm_cores + 1e-12)
    diags.push_back("validators.task_cpu_cores: exceeds a VM's core share, no VM could ever run a task");
  if (c.task_mem_gb > c.machine.pm_mem_gb) diags.push_back("validators.task_mem_gb: exceeds PM memory");
  for (std::size_t i = 0; i < c.downtime.size(); ++i) {
    const auto& w = c.downtime[i];
    const std::string at = "consensus.downtime[" + std::to_string(i) + "]";
    if (w.validator >= c.resolved_validator_count()) diags.push_back(at + ".validator: no such validator");
    if (!(w.start_s >= 0.0) || !(w.end_s > w.start_s)) diags.push_back(at + ": need 0 <= start_s < end_s");
  }
}

}  // namespace

ConfigInvalid::ConfigInvalid(std::vector<std::string> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::uint32_t ScenarioConfig::resolved_validator_count() const {
  if (validator_ratio) {
    const double devices = static_cast<double>(sensor_count) + static_cast<double>(head_count);
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::llround(*validator_ratio * devices)));
  }
  return validator_count.value_or(4);
}

ordered_json ScenarioConfig::to_json() const {
  ordered_json j;
  j["duration_s"] = duration_s;
  j["seed"] = seed;
  j["network"] = {
      {"sensor_count", sensor_count},
      {"head_count", head_count},
      {"area_side_m", area_side_m},
      {"sensing_interval_s", sensing_interval_s},
      {"dissemination_interval_s", dissemination_interval_s},
      {"packet_bits", packet_bits},
      {"energy", {{"sensor_j", sensor_energy_j}, {"head_j", head_energy_j}}},
      {"radio", {{"e_elec_j_per_bit", radio.e_elec_j_per_bit}, {"e_amp_j_per_bit_m2", radio.e_amp_j_per_bit_m2}}},
      {"aggregation",
       {{"header_bytes", aggregation.header_bytes}, {"bytes_per_packet", aggregation.digest_bytes_per_packet}}},
  };
  ordered_json v;
  if (validator_ratio) {
    v["ratio"] = *validator_ratio;
  } else {
    v["count"] = resolved_validator_count();
  }
  v["vms_per_pm"] = machine.vms_per_pm;
  v["pm_cores"] = machine.pm_cores;
  v["pm_mem_gb"] = machine.pm_mem_gb;
  v["vm_cores"] = machine.vm_cores;
  v["vm_mem_gb"] = machine.vm_mem_gb;
  v["t_upper"] = machine.t_upper;
  v["cpu_weight"] = machine.cpu_weight;
  v["busy_power_w"] = machine.power.busy_w;
  v["idle_power_w"] = machine.power.idle_w;
  v["energy_j"] = machine.initial_energy_j;
  v["task_cpu_cores"] = task_cpu_cores;
  v["task_mem_gb"] = task_mem_gb;
  v["work"] = {{"alpha_units", work.alpha_units},
               {"beta_units_per_byte", work.beta_units_per_byte},
               {"per_core_rate", work.per_core_rate}};
  j["validators"] = v;
  ordered_json downtime_list = ordered_json::array();
  for (const auto& w : downtime)
    downtime_list.push_back({{"validator", w.validator}, {"start_s", w.start_s}, {"end_s", w.end_s}});
  j["consensus"] = {
      {"selection_policy", std::string(consensus::to_string(policy))},
      {"round_length_s", round_length_s},
      {"max_txs_per_block", max_txs_per_block},
      {"verify_cost_factor", verify_cost_factor},
      {"commit_threshold", commit_threshold},
      {"queue_capacity", queue_capacity},
      {"block_header_bytes", block_header_bytes},
      {"vote_bytes", vote_bytes},
      {"downtime", downtime_list},
  };
  j["link"] = {{"bandwidth_bps", bandwidth_bps},
               {"propagation_s", propagation_s},
               {"dissemination_jitter", dissemination_jitter}};
  return j;
}

std::string ScenarioConfig::fingerprint() const {
  auto j = to_json();
  j["consensus"].erase("selection_policy");
  return to_hex(sha256(j.dump())).substr(0, 16);
}

ScenarioConfig parse_config(const json& doc) {
  std::vector<std::string> diags;
  ScenarioConfig c;
  Section root(&doc, "", diags);
  root.number("duration_s", c.duration_s, nonnegative, "nonnegative");
  root.integer("seed", c.seed, 0);

  {
    auto n = root.sub("network");
    n.integer("sensor_count", c.sensor_count, 0);
    n.integer("head_count", c.head_count, 1);
    n.number("area_side_m", c.area_side_m, positive, "positive");
    n.number("sensing_interval_s", c.sensing_interval_s, positive, "positive");
    n.number("dissemination_interval_s", c.dissemination_interval_s, positive, "positive");
    n.integer("packet_bits", c.packet_bits, 1);
    auto e = n.sub("energy");
    e.number("sensor_j", c.sensor_energy_j, nonnegative, "nonnegative");
    e.number("head_j", c.head_energy_j, nonnegative, "nonnegative");
    e.finish();
    auto r = n.sub("radio");
    r.number("e_elec_j_per_bit", c.radio.e_elec_j_per_bit, nonnegative, "nonnegative");
    r.number("e_amp_j_per_bit_m2", c.radio.e_amp_j_per_bit_m2, nonnegative, "nonnegative");
    r.finish();
    auto a = n.sub("aggregation");
    a.integer("header_bytes", c.aggregation.header_bytes, 0);
    a.integer("bytes_per_packet", c.aggregation.digest_bytes_per_packet, 0);
    a.finish();
    n.finish();
  }
  {
    auto v = root.sub("validators");
    if (v.find("count") != nullptr) {
      std::uint32_t count = 0;
      v.integer("count", count, 1);
      if (count > 0) c.validator_count = count;
    }
    if (v.find("ratio") != nullptr) {
      double ratio = 0.0;
      v.number("ratio", ratio, [](double x) { return x > 0.0 && x <= 1.0; }, "in (0, 1]");
      if (ratio > 0.0) c.validator_ratio = ratio;
    }
    v.integer("vms_per_pm", c.machine.vms_per_pm, 1);
    v.number("pm_cores", c.machine.pm_cores, positive, "positive");
    v.number("pm_mem_gb", c.machine.pm_mem_gb, positive, "positive");
    v.number("vm_cores", c.machine.vm_cores, positive, "positive");
    v.number("vm_mem_gb", c.machine.vm_mem_gb, positive, "positive");
    v.number("t_upper", c.machine.t_upper, unit_interval, "in [0, 1]");
    v.number("cpu_weight", c.machine.cpu_weight, unit_interval, "in [0, 1]");
    v.number("busy_power_w", c.machine.power.busy_w, nonnegative, "nonnegative");
    v.number("idle_power_w", c.machine.power.idle_w, nonnegative, "nonnegative");
    v.number("energy_j", c.machine.initial_energy_j, nonnegative, "nonnegative");
    v.number("task_cpu_cores", c.task_cpu_cores, positive, "positive");
    v.number("task_mem_gb", c.task_mem_gb, positive, "positive");
    auto w = v.sub("work");
    w.number("alpha_units", c.work.alpha_units, nonnegative, "nonnegative");
    w.number("beta_units_per_byte", c.work.beta_units_per_byte, nonnegative, "nonnegative");
    w.number("per_core_rate", c.work.per_core_rate, positive, "positive");
    w.finish();
    v.finish();
  }
  {
    auto s = root.sub("consensus");
    if (const json* p = s.find("selection_policy")) {
      const auto parsed = p->is_string() ? consensus::parse_policy(p->get<std::string>()) : std::nullopt;
      if (parsed) {
        c.policy = *parsed;
      } else {
        diags.push_back(s.where("selection_policy") + ": must be \"tbs\" or \"wbs\"");
      }
    }
    s.number("round_length_s", c.round_length_s, positive, "positive");
    s.integer("max_txs_per_block", c.max_txs_per_block, 1);
    s.number("verify_cost_factor", c.verify_cost_factor, nonnegative, "nonnegative");
    s.number("commit_threshold", c.commit_threshold, [](double x) { return x >= 0.0 && x < 1.0; }, "in [0, 1)");
    s.integer("queue_capacity", c.queue_capacity, 1);
    s.integer("block_header_bytes", c.block_header_bytes, 0);
    s.integer("vote_bytes", c.vote_bytes, 0);
    if (const json* d = s.find("downtime")) {
      if (!d->is_array()) {
        diags.push_back(s.where("downtime") + ": expected a list");
      } else {
        for (std::size_t i = 0; i < d->size(); ++i) {
          Section entry(&(*d)[i], s.where("downtime") + "[" + std::to_string(i) + "]", diags);
          DowntimeWindow w;
          entry.integer("validator", w.validator, 0);
          entry.number("start_s", w.start_s, nonnegative, "nonnegative");
          entry.number("end_s", w.end_s, nonnegative, "nonnegative");
          entry.finish();
          c.downtime.push_back(w);
        }
      }
    }
    s.finish();
  }
  {
    auto l = root.sub("link");
    l.number("bandwidth_bps", c.bandwidth_bps, positive, "positive");
    l.number("propagation_s", c.propagation_s, nonnegative, "nonnegative");
    l.boolean("dissemination_jitter", c.dissemination_jitter);
    l.finish();
  }
  root.finish();

  if (diags.empty()) check_constraints(c, diags);
  if (!diags.empty()) throw ConfigInvalid(std::move(diags));
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid({path.string() + ": " + e.what()});
  }
  return parse_config(doc);
}

void validate_config(const ScenarioConfig& cfg) {
  std::vector<std::string> diags;
  if (!(cfg.duration_s >= 0.0)) diags.push_back("duration_s: must be nonnegative");
  if (cfg.head_count == 0) diags.push_back("network.head_count: must be at least 1");
  if (!(cfg.area_side_m > 0.0)) diags.push_back("network.area_side_m: must be positive");
  if (!(cfg.sensing_interval_s > 0.0)) diags.push_back("network.sensing_interval_s: must be positive");
  if (!(cfg.dissemination_interval_s > 0.0)) diags.push_back("network.dissemination_interval_s: must be positive");
  if (!(cfg.bandwidth_bps > 0.0)) diags.push_back("link.bandwidth_bps: must be positive");
  if (!(cfg.round_length_s > 0.0)) diags.push_back("consensus.round_length_s: must be positive");
  if (!(cfg.work.per_core_rate > 0.0)) diags.push_back("validators.work.per_core_rate: must be positive");
  if (cfg.queue_capacity == 0) diags.push_back("consensus.queue_capacity: must be at least 1");
  if (cfg.max_txs_per_block == 0) diags.push_back("consensus.max_txs_per_block: must be at least 1");
  check_constraints(cfg, diags);
  if (!diags.empty()) throw ConfigInvalid(std::move(diags));
}

}  // namespace poasim
