#include "prospero/config.hpp"

#include "prospero/csv.hpp"
#include "prospero/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>

namespace prospero {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::InvalidConfig, message); }

json scalar_to_json(const YAML::Node& node) {
  const std::string& tag = node.Tag();
  const std::string text = node.Scalar();
  // Quoted scalars stay strings.
  if (tag == "!") return text;
  if (text == "~" || text == "null" || text == "Null" || text == "NULL") return nullptr;
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used, 10);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used, 10);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  if (text == ".inf" || text == "+.inf") return std::numeric_limits<double>::infinity();
  if (text == "-.inf") return -std::numeric_limits<double>::infinity();
  return text;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

std::string type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "list";
  if (j.is_object()) return "mapping";
  return "null";
}

/// Value `v` checked against default `d` at `path`; integers widen to floats.
json checked_value(const json& d, const json& v, const std::string& path) {
  if (d.is_number_float() && v.is_number()) return v.get<double>();
  if (d.is_number_integer() && v.is_number_integer()) {
    if (!d.is_number_unsigned()) return v;
    if (!v.is_number_unsigned() && v.get<long long>() < 0) config_error(path + " must be non-negative");
    return v.get<std::uint64_t>();
  }
  if (d.is_boolean() && v.is_boolean()) return v;
  if (d.is_string() && v.is_string()) return v;
  if (d.is_array() && v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) config_error(path + " must be a list of numbers");
    }
    return v;
  }
  config_error(path + ": expected " + type_name(d) + ", got " + type_name(v));
}

void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) config_error((prefix.empty() ? std::string("top level") : prefix) + " must be a mapping");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) config_error("unknown key '" + path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge(slot, it.value(), path);
    } else {
      slot = checked_value(slot, it.value(), path);
    }
  }
}

template <typename T>
T get(const json& j, const char* key) {
  return j.at(key).get<T>();
}

}  // namespace

json default_config() {
  return json{
      {"version", kConfigVersion},
      {"seed", 0u},
      {"rounds_N", 10u},
      {"oracle_budget_K", 128u},
      {"jobs", 1u},
      {"landscape",
       {{"kind", "nk"}, {"length_L", 50u}, {"k_interactions", 2u}, {"seed", 0u}, {"csv", ""}}},
      {"wild_type", ""},
      {"initial_dataset", {{"size_M", 500u}, {"max_mutations", 3u}, {"csv", ""}}},
      {"prior", {{"kind", "uniform"}, {"pseudocount", 1.0}, {"corpus", ""}, {"command", ""}, {"tcp", ""}}},
      {"masking", {{"scans_S", 16u}, {"n_min", 0u}, {"n_max", 0u}, {"ucb_k", 1.0}}},
      {"smc", {{"particle_count_B", 256u}, {"n_keep", 10u}, {"ucb_k", 0.1}}},
      {"surrogate",
       {{"kind", "mlp"},
        {"members_M", 3u},
        {"learning_rate", 1e-4},
        {"l2_penalty", 1e-4},
        {"batch_size", 256u},
        {"max_updates", 3000u},
        {"validation_fraction", 0.1},
        {"patience", 10u},
        {"hidden_width", 64u},
        {"optimizer", "adam"},
        {"snr_db", 60.0}}},
      {"ablation", {{"use_smc_resampling", true}, {"use_targeted_masking", true}, {"use_raa_constraint", true}}},
      {"sweep", {{"snr_db", json::array({-20, -10, 0, 10, 20, 60})}, {"seeds", json::array({1, 2, 3, 4, 5})}}},
  };
}

json resolve_config_text(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("YAML: ") + e.what());
  }
  json user = yaml_to_json(root);
  if (user.is_null()) user = json::object();
  if (!user.is_object()) config_error("top level must be a mapping");
  if (!user.contains("version")) config_error("missing 'version' (expected " + std::to_string(kConfigVersion) + ")");
  if (!user["version"].is_number_integer() || user["version"].get<int>() != kConfigVersion) {
    config_error("unsupported config version " + user["version"].dump());
  }
  json cfg = default_config();
  merge(cfg, user, "");
  return cfg;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return resolve_config_text(text);
  } catch (const Error& e) {
    config_error(path + ": " + e.what());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* slot = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!slot->is_object() || !slot->contains(part)) config_error("unknown key '" + key + "'");
    slot = &(*slot)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (slot->is_object()) config_error("'" + key + "' is a section, not a value");
  if (key == "version") config_error("version cannot be overridden");
  json value;
  try {
    value = yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    config_error("override '" + assignment + "': " + e.what());
  }
  if (value.is_null() && slot->is_string()) value = "";
  *slot = checked_value(*slot, value, key);
}

TrainingConfig training_config(const json& config) {
  const auto& s = config.at("surrogate");
  TrainingConfig t;
  t.learning_rate = get<double>(s, "learning_rate");
  t.l2_penalty = get<double>(s, "l2_penalty");
  t.batch_size = get<std::size_t>(s, "batch_size");
  t.max_updates = get<std::size_t>(s, "max_updates");
  t.validation_fraction = get<double>(s, "validation_fraction");
  t.patience = get<std::size_t>(s, "patience");
  t.hidden_width = get<std::size_t>(s, "hidden_width");
  t.members = get<std::size_t>(s, "members_M");
  const auto opt = get<std::string>(s, "optimizer");
  if (opt == "adam") {
    t.optimizer = Optimizer::Adam;
  } else if (opt == "gd") {
    t.optimizer = Optimizer::GradientDescent;
  } else {
    config_error("surrogate.optimizer must be 'adam' or 'gd'");
  }
  t.seed = get<std::uint64_t>(config, "seed");
  t.validate();
  return t;
}

CampaignConfig campaign_config(const json& config, std::size_t length) {
  CampaignConfig c;
  c.rounds = get<std::size_t>(config, "rounds_N");
  c.oracle_budget = get<std::size_t>(config, "oracle_budget_K");
  c.seed = get<std::uint64_t>(config, "seed");
  c.jobs = get<std::size_t>(config, "jobs");

  const auto& m = config.at("masking");
  const auto& s = config.at("smc");
  c.masking.batch = get<std::size_t>(s, "particle_count_B");
  c.masking.scans = get<std::size_t>(m, "scans_S");
  const auto [lo, hi] = MaskingConfig::default_range(length);
  c.masking.n_min = get<std::size_t>(m, "n_min");
  c.masking.n_max = get<std::size_t>(m, "n_max");
  if (c.masking.n_min == 0) c.masking.n_min = std::min(lo, length);
  if (c.masking.n_max == 0) c.masking.n_max = std::min(hi, length);
  c.masking.ucb_k = get<double>(m, "ucb_k");

  c.smc.particles = c.masking.batch;
  c.smc.oracle_budget = c.oracle_budget;
  c.smc.n_keep = get<std::size_t>(s, "n_keep");
  c.smc.ucb_k = get<double>(s, "ucb_k");
  c.smc.jobs = c.jobs;

  const auto& a = config.at("ablation");
  c.ablation.use_smc_resampling = get<bool>(a, "use_smc_resampling");
  c.ablation.use_targeted_masking = get<bool>(a, "use_targeted_masking");
  c.ablation.use_raa_constraint = get<bool>(a, "use_raa_constraint");

  if (get<std::string>(config.at("surrogate"), "kind") == "mlp") c.surrogate = training_config(config);
  try {
    c.validate(length);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

}  // namespace prospero
