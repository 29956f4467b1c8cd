#include "udld/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace udld {

using nlohmann::json;

namespace {

// Pulls a field if present, prefixing any type error with its path.
template <class T>
void read_field(const json& block, const std::string& block_name,
                const char* key, T& out) {
  if (!block.contains(key)) return;
  try {
    out = block.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(block_name + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& block, const std::string& block_name,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : block.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown config field: " + block_name + "." + key);
    }
  }
}

json scene_to_json(const SceneConfig& s) {
  json obstacles = json::array();
  for (const Rect& r : s.obstacles) {
    obstacles.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  }
  return json{{"room", {{"width", s.room_width}, {"height", s.room_height}}},
              {"ap_position", {s.ap_position.x, s.ap_position.y}},
              {"obstacles", obstacles},
              {"device_count", s.device_count},
              {"speed_class", speed_class_name(s.speed_class)},
              {"body_radius", s.body_radius},
              {"queue_capacity", s.queue_capacity}};
}

SceneConfig scene_from_json(const json& block) {
  SceneConfig s;
  if (block.is_null()) return s;
  reject_unknown(block, "scene",
                 {"room", "ap_position", "obstacles", "device_count",
                  "speed_class", "body_radius", "queue_capacity"});
  if (block.contains("room")) {
    const json& room = block.at("room");
    reject_unknown(room, "scene.room", {"width", "height"});
    read_field(room, "scene.room", "width", s.room_width);
    read_field(room, "scene.room", "height", s.room_height);
  }
  if (block.contains("ap_position")) {
    const json& ap = block.at("ap_position");
    if (!ap.is_array() || ap.size() != 2) {
      throw ConfigError("scene.ap_position: expected [x, y]");
    }
    s.ap_position = {ap[0].get<double>(), ap[1].get<double>()};
  }
  if (block.contains("obstacles")) {
    s.obstacles.clear();
    for (const json& o : block.at("obstacles")) {
      Rect r;
      reject_unknown(o, "scene.obstacles[]", {"x", "y", "w", "h"});
      read_field(o, "scene.obstacles[]", "x", r.x);
      read_field(o, "scene.obstacles[]", "y", r.y);
      read_field(o, "scene.obstacles[]", "w", r.w);
      read_field(o, "scene.obstacles[]", "h", r.h);
      s.obstacles.push_back(r);
    }
  }
  read_field(block, "scene", "device_count", s.device_count);
  if (block.contains("speed_class")) {
    s.speed_class = parse_speed_class(block.at("speed_class").get<std::string>());
  }
  read_field(block, "scene", "body_radius", s.body_radius);
  read_field(block, "scene", "queue_capacity", s.queue_capacity);
  return s;
}

json radio_to_json(const RadioConfig& r) {
  json j{{"carrier_frequency_hz", r.params.carrier_frequency_hz},
         {"transmit_power_dbm", r.params.transmit_power_dbm},
         {"beamwidth_deg", r.params.beamwidth_deg},
         {"relative_humidity", r.params.relative_humidity},
         {"temperature_k", r.params.temperature_k},
         {"noise_density_dbm_per_hz", r.params.noise_density_dbm_per_hz},
         {"total_bandwidth_hz", r.total_bandwidth_hz},
         {"target_spectral_efficiency", r.target_se_bps_per_hz},
         {"d0_m", r.d0_m}};
  if (r.gamma0_dbm) j["gamma0_dbm"] = *r.gamma0_dbm;
  return j;
}

RadioConfig radio_from_json(const json& block) {
  RadioConfig r;
  if (block.is_null()) return r;
  reject_unknown(block, "radio",
                 {"carrier_frequency_hz", "transmit_power_dbm", "beamwidth_deg",
                  "relative_humidity", "temperature_k",
                  "noise_density_dbm_per_hz", "total_bandwidth_hz",
                  "target_spectral_efficiency", "d0_m", "gamma0_dbm",
                  "absorption_table"});
  read_field(block, "radio", "carrier_frequency_hz",
             r.params.carrier_frequency_hz);
  read_field(block, "radio", "transmit_power_dbm", r.params.transmit_power_dbm);
  read_field(block, "radio", "beamwidth_deg", r.params.beamwidth_deg);
  read_field(block, "radio", "relative_humidity", r.params.relative_humidity);
  read_field(block, "radio", "temperature_k", r.params.temperature_k);
  read_field(block, "radio", "noise_density_dbm_per_hz",
             r.params.noise_density_dbm_per_hz);
  read_field(block, "radio", "total_bandwidth_hz", r.total_bandwidth_hz);
  read_field(block, "radio", "target_spectral_efficiency",
             r.target_se_bps_per_hz);
  read_field(block, "radio", "d0_m", r.d0_m);
  if (block.contains("gamma0_dbm") && !block.at("gamma0_dbm").is_null()) {
    r.gamma0_dbm = block.at("gamma0_dbm").get<double>();
  }
  if (block.contains("absorption_table") &&
      !block.at("absorption_table").is_null()) {
    r.params.absorption =
        AbsorptionTable::load(block.at("absorption_table").get<std::string>());
  }
  return r;
}

json learning_to_json(const LearningConfig& l) {
  return json{{"alpha", l.alpha},
              {"beta", l.beta},
              {"epsilon", l.epsilon},
              {"epsilon_decay_factor", l.epsilon_decay_factor},
              {"decay_period_episodes", l.decay_period_episodes},
              {"reward_normalizer_bps", l.reward_normalizer_bps},
              {"neighbor_cap", l.neighbor_cap},
              {"greedy_prob_is_epsilon", l.greedy_prob_is_epsilon},
              {"global_policy_weight", l.global_policy_weight}};
}

LearningConfig learning_from_json(const json& block) {
  LearningConfig l;
  if (block.is_null()) return l;
  reject_unknown(block, "learning",
                 {"alpha", "beta", "epsilon", "epsilon_decay_factor",
                  "decay_period_episodes", "reward_normalizer_bps",
                  "neighbor_cap", "greedy_prob_is_epsilon",
                  "global_policy_weight"});
  read_field(block, "learning", "alpha", l.alpha);
  read_field(block, "learning", "beta", l.beta);
  read_field(block, "learning", "epsilon", l.epsilon);
  read_field(block, "learning", "epsilon_decay_factor", l.epsilon_decay_factor);
  read_field(block, "learning", "decay_period_episodes",
             l.decay_period_episodes);
  read_field(block, "learning", "reward_normalizer_bps",
             l.reward_normalizer_bps);
  read_field(block, "learning", "neighbor_cap", l.neighbor_cap);
  read_field(block, "learning", "greedy_prob_is_epsilon",
             l.greedy_prob_is_epsilon);
  return l;
}

}  // namespace

json default_config_json() { return config_to_json(SimConfig{}); }

json config_to_json(const SimConfig& cfg) {
  return json{{"scene", scene_to_json(cfg.scene)},
              {"radio", radio_to_json(cfg.radio)},
              {"learning", learning_to_json(cfg.learning)},
              {"simulation",
               {{"episodes", cfg.episodes},
                {"model", model_name(cfg.model)},
                {"seed", cfg.seed},
                {"dt_s", cfg.dt_s},
                {"two_hop_bottleneck", cfg.two_hop_bottleneck}}}};
}

SimConfig config_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  reject_unknown(doc, "config", {"scene", "radio", "learning", "simulation"});
  SimConfig cfg;
  cfg.scene = scene_from_json(doc.value("scene", json()));
  cfg.radio = radio_from_json(doc.value("radio", json()));
  cfg.learning = learning_from_json(doc.value("learning", json()));
  const json sim = doc.value("simulation", json());
  if (!sim.is_null()) {
    reject_unknown(sim, "simulation",
                   {"episodes", "model", "seed", "dt_s", "two_hop_bottleneck"});
    read_field(sim, "simulation", "episodes", cfg.episodes);
    if (sim.contains("model")) {
      cfg.model = parse_model(sim.at("model").get<std::string>());
    }
    read_field(sim, "simulation", "seed", cfg.seed);
    read_field(sim, "simulation", "dt_s", cfg.dt_s);
    read_field(sim, "simulation", "two_hop_bottleneck", cfg.two_hop_bottleneck);
  }
  try {
    cfg.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return config_from_json(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like path.to.field=value: " +
                      assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // bare strings like model names
  }

  json* node = &doc;
  std::istringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) {
    if (key.empty()) {
      throw ConfigError("empty path segment in override: " + assignment);
    }
    parts.push_back(key);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

}  // namespace udld
