#include "spincim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spincim/digest.hpp"
#include "spincim/errors.hpp"

namespace spincim {

using nlohmann::ordered_json;
using json = nlohmann::json;

std::string_view to_string(MitigationDisturbance d) {
  switch (d) {
    case MitigationDisturbance::None: return "none";
    case MitigationDisturbance::MeanShift: return "mean-shift";
    case MitigationDisturbance::Collapse: return "collapse";
  }
  return "?";
}

namespace {

// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type");
    }
  }

  template <class Fn>
  void get_with(const char* key, Fn parse) {
    std::string text;
    get(key, text);
    if (j_.contains(key)) parse(text);
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  Section sub(const char* key) { return Section(j_.at(key), where(key)); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TableVariant parse_variant(std::string_view s) {
  if (s == "standard") return TableVariant::Standard;
  if (s == "enhanced") return TableVariant::Enhanced;
  throw ConfigError("unknown table variant '" + std::string(s) + "' (expected standard | enhanced)");
}

CostMode parse_mode(std::string_view s) {
  if (s == "per-word") return CostMode::PerWord;
  if (s == "per-bit-writes") return CostMode::PerBitWrites;
  throw ConfigError("unknown cost mode '" + std::string(s) + "' (expected per-word | per-bit-writes)");
}

MitigationDisturbance parse_disturbance(std::string_view s) {
  for (auto d : {MitigationDisturbance::None, MitigationDisturbance::MeanShift, MitigationDisturbance::Collapse}) {
    if (to_string(d) == s) return d;
  }
  throw ConfigError("unknown disturbance '" + std::string(s) + "' (expected none | mean-shift | collapse)");
}

ordered_json table_json(const std::map<CostClass, OpCost>& rows) {
  ordered_json j = ordered_json::object();
  for (const auto& [c, cost] : rows) j[std::string(to_string(c))] = {{"delay_ns", cost.delay_ns}, {"energy_fJ", cost.energy_fj}};
  return j;
}

void read_table(Section& parent, const char* key, std::map<CostClass, OpCost>& rows) {
  if (!parent.has(key)) return;
  const json& j = parent.raw(key);
  if (!j.is_object()) throw ConfigError(parent.where(key) + ": expected an object");
  rows.clear();
  for (const auto& [name, value] : j.items()) {
    const auto c = parse_cost_class(name);
    if (!c) throw ConfigError("unknown config key '" + parent.where(key) + "." + name + "' (not a cost class)");
    Section row(value, parent.where(key) + "." + name);
    OpCost cost;
    row.get("delay_ns", cost.delay_ns);
    row.get("energy_fJ", cost.energy_fj);
    rows[*c] = cost;
  }
}

}  // namespace

ArraySetup ExperimentConfig::array_setup() const {
  return ArraySetup{geometry, device.levels, sense, costs, variant};
}

void ExperimentConfig::validate() const {
  device.levels.validate();
  geometry.validate();
  sense.validate(device.levels);
  costs.validate();
  if (attack.credential_width < 1 || attack.credential_width > 64) {
    throw ConfigError("attack.credential_width must be in [1, 64]");
  }
  if (sca.per_class < 1) throw ConfigError("sca.per_class must be >= 1");
  if (sca.hw_width < 1 || sca.hw_width > 64) throw ConfigError("sca.hw_width must be in [1, 64]");
  for (double s : sca.sigma_energy_fj) {
    if (s < 0.0) throw ConfigError("sca.sigma_energy_fJ entries must be >= 0");
  }
  if (sca.sigma_duration_ns < 0.0 || sca.hw_sigma_energy_fj < 0.0) throw ConfigError("sca noise must be >= 0");
  if (mitigation.sensor_sigma < 0.0) throw ConfigError("mitigation.sensor_sigma must be >= 0");
  mitigation.shift.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  const auto& l = device.levels;
  j["device"] = {
      {"i_ap", l.i_ap},       {"i_p", l.i_p},     {"i_apap", l.i_apap},
      {"i_app", l.i_app},     {"i_pp", l.i_pp},   {"sigma", l.sigma},
      {"ambient_temp", l.ambient_temp},
      {"collapse", {{"a", device.collapse.a}, {"b", device.collapse.b}}},
  };
  j["array"] = {
      {"banks", geometry.banks},
      {"rows_per_bank", geometry.rows_per_bank},
      {"cols_per_row", geometry.cols_per_row},
      {"i_ref_read", sense.i_ref_read},
      {"i_ref_or", sense.i_ref_or},
      {"i_ref_and", sense.i_ref_and},
      {"variant", to_string(variant)},
  };
  j["cost"] = {
      {"mode", to_string(costs.mode)},
      {"standard", table_json(costs.standard)},
      {"enhanced", table_json(costs.enhanced)},
  };
  j["attack"] = {
      {"credential_width", attack.credential_width},
      {"variant", attack::to_string(attack.variant)},
      {"policy", attack::to_string(attack.policy)},
      {"forced", attack.forced},
      {"temperature", attack.temperature},
      {"pair", pair_name(attack.pair)},
  };
  j["sca"] = {
      {"sigma_energy_fJ", sca.sigma_energy_fj},
      {"sigma_duration_ns", sca.sigma_duration_ns},
      {"per_class", sca.per_class},
      {"hw_width", sca.hw_width},
      {"hw_sigma_energy_fJ", sca.hw_sigma_energy_fj},
  };
  j["mitigation"] = {
      {"alpha", mitigation.shift.alpha},
      {"beta", mitigation.shift.beta},
      {"gamma", mitigation.shift.gamma},
      {"disturbance", to_string(mitigation.disturbance)},
      {"temperature", mitigation.temperature},
      {"sensor_sigma", mitigation.sensor_sigma},
  };
  j["seed"] = seed;
  j["trials"] = trials;
  j["threads"] = threads;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  {
    Section top(root, "");
    if (top.has("device")) {
      auto s = top.sub("device");
      auto& l = c.device.levels;
      s.get("i_ap", l.i_ap);
      s.get("i_p", l.i_p);
      s.get("i_apap", l.i_apap);
      s.get("i_app", l.i_app);
      s.get("i_pp", l.i_pp);
      s.get("sigma", l.sigma);
      s.get("ambient_temp", l.ambient_temp);
      if (s.has("collapse")) {
        auto cs = s.sub("collapse");
        cs.get("a", c.device.collapse.a);
        cs.get("b", c.device.collapse.b);
      }
    }
    if (top.has("array")) {
      auto s = top.sub("array");
      s.get("banks", c.geometry.banks);
      s.get("rows_per_bank", c.geometry.rows_per_bank);
      s.get("cols_per_row", c.geometry.cols_per_row);
      s.get("i_ref_read", c.sense.i_ref_read);
      s.get("i_ref_or", c.sense.i_ref_or);
      s.get("i_ref_and", c.sense.i_ref_and);
      s.get_with("variant", [&](const std::string& v) { c.variant = parse_variant(v); });
    }
    if (top.has("cost")) {
      auto s = top.sub("cost");
      s.get_with("mode", [&](const std::string& v) { c.costs.mode = parse_mode(v); });
      read_table(s, "standard", c.costs.standard);
      read_table(s, "enhanced", c.costs.enhanced);
    }
    if (top.has("attack")) {
      auto s = top.sub("attack");
      s.get("credential_width", c.attack.credential_width);
      s.get_with("variant", [&](const std::string& v) { c.attack.variant = attack::parse_attack_variant(v); });
      s.get_with("policy", [&](const std::string& v) { c.attack.policy = attack::parse_credential_policy(v); });
      s.get("forced", c.attack.forced);
      s.get("temperature", c.attack.temperature);
      s.get_with("pair", [&](const std::string& v) { c.attack.pair = parse_pair(v); });
    }
    if (top.has("sca")) {
      auto s = top.sub("sca");
      s.get("sigma_energy_fJ", c.sca.sigma_energy_fj);
      s.get("sigma_duration_ns", c.sca.sigma_duration_ns);
      s.get("per_class", c.sca.per_class);
      s.get("hw_width", c.sca.hw_width);
      s.get("hw_sigma_energy_fJ", c.sca.hw_sigma_energy_fj);
    }
    if (top.has("mitigation")) {
      auto s = top.sub("mitigation");
      s.get("alpha", c.mitigation.shift.alpha);
      s.get("beta", c.mitigation.shift.beta);
      s.get("gamma", c.mitigation.shift.gamma);
      s.get_with("disturbance", [&](const std::string& v) { c.mitigation.disturbance = parse_disturbance(v); });
      s.get("temperature", c.mitigation.temperature);
      s.get("sensor_sigma", c.mitigation.sensor_sigma);
    }
    top.get("seed", c.seed);
    top.get("trials", c.trials);
    top.get("threads", c.threads);
    top.get("output_dir", c.output_dir);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string ExperimentConfig::hash() const {
  auto j = ordered_json::parse(to_json());
  j.erase("threads");
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

}  // namespace spincim
