#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "udld/agents.hpp"
#include "udld/config.hpp"
#include "udld/link_budget.hpp"
#include "udld/simulation.hpp"

namespace py = pybind11;
using namespace udld;

namespace {

py::dict metrics_to_dict(const EpisodeMetrics& m) {
  py::dict d;
  d["episode"] = m.episode;
  d["coverage"] = m.coverage;
  d["total_reward"] = m.total_reward;
  d["mean_reward_per_agent"] = m.mean_reward_per_agent;
  d["layer1_count"] = m.layer1_count;
  d["layer2_count"] = m.layer2_count;
  d["link_count"] = m.link_count;
  d["epsilon"] = m.epsilon;
  return d;
}

FeatureVector as_features(const std::vector<double>& values) {
  return FeatureVector{values};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "2-layered D2D THz indoor coverage simulator core";

  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("uniform_int",
           [](Rng& r, std::uint64_t n) { return r.uniform_int(n); });

  py::class_<AbsorptionTable>(m, "AbsorptionTable")
      .def_static("defaults", &AbsorptionTable::defaults)
      .def_static("load", &AbsorptionTable::load, py::arg("path"))
      .def("coefficient", &AbsorptionTable::coefficient, py::arg("frequency_hz"))
      .def("scaled", &AbsorptionTable::scaled, py::arg("factor"))
      .def("save", &AbsorptionTable::save, py::arg("path"))
      .def_property_readonly("min_frequency_hz",
                             &AbsorptionTable::min_frequency_hz)
      .def_property_readonly("max_frequency_hz",
                             &AbsorptionTable::max_frequency_hz)
      .def_property_readonly("reference_humidity",
                             &AbsorptionTable::reference_humidity);

  py::class_<LinkBudgetParams>(m, "LinkBudgetParams")
      .def(py::init<>())
      .def_readwrite("carrier_frequency_hz",
                     &LinkBudgetParams::carrier_frequency_hz)
      .def_readwrite("transmit_power_dbm", &LinkBudgetParams::transmit_power_dbm)
      .def_readwrite("beamwidth_deg", &LinkBudgetParams::beamwidth_deg)
      .def_readwrite("relative_humidity", &LinkBudgetParams::relative_humidity)
      .def_readwrite("temperature_k", &LinkBudgetParams::temperature_k)
      .def_readwrite("noise_density_dbm_per_hz",
                     &LinkBudgetParams::noise_density_dbm_per_hz)
      .def_readwrite("absorption", &LinkBudgetParams::absorption);

  m.def("antenna_gain_dbi", &antenna_gain_dbi, py::arg("beamwidth_deg"));
  m.def("spreading_loss_db", &spreading_loss_db, py::arg("frequency_hz"),
        py::arg("distance_m"));
  m.def(
      "absorption_loss_db",
      [](const LinkBudgetParams& p, double d) { return absorption_loss_db(p, d); },
      py::arg("params"), py::arg("distance_m"));
  m.def("received_power_dbm", &received_power_dbm, py::arg("params"),
        py::arg("distance_m"));
  m.def("capacity_bps", &capacity_bps, py::arg("params"), py::arg("bandwidth_hz"),
        py::arg("distance_m"));
  m.def("min_beamwidth_deg", &min_beamwidth_deg, py::arg("params"),
        py::arg("bandwidth_hz"), py::arg("distance_m"),
        py::arg("target_se_bps_per_hz"));
  m.def("max_range_m", &max_range_m, py::arg("params"), py::arg("bandwidth_hz"),
        py::arg("target_se_bps_per_hz"));
  m.def("calibrate_absorption", &calibrate_absorption, py::arg("params"),
        py::arg("bandwidth_hz"), py::arg("target_se_bps_per_hz"),
        py::arg("target_range_m"));

  py::class_<PolicyWeights>(m, "PolicyWeights")
      .def_static("zeros", &PolicyWeights::zeros, py::arg("feature_count"))
      .def_property_readonly("feature_count", &PolicyWeights::feature_count)
      .def("get", [](const PolicyWeights& w, int f,
                     int a) { return w.at(f, a); })
      .def("set",
           [](PolicyWeights& w, int f, int a, double v) { w.at(f, a) = v; })
      .def("to_json",
           [](const PolicyWeights& w) { return w.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return PolicyWeights::from_json(nlohmann::json::parse(s));
      });

  py::class_<LearningConfig>(m, "LearningConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &LearningConfig::alpha)
      .def_readwrite("beta", &LearningConfig::beta)
      .def_readwrite("epsilon", &LearningConfig::epsilon)
      .def_readwrite("epsilon_decay_factor", &LearningConfig::epsilon_decay_factor)
      .def_readwrite("decay_period_episodes",
                     &LearningConfig::decay_period_episodes)
      .def_readwrite("reward_normalizer_bps",
                     &LearningConfig::reward_normalizer_bps)
      .def_readwrite("neighbor_cap", &LearningConfig::neighbor_cap)
      .def_readwrite("greedy_prob_is_epsilon",
                     &LearningConfig::greedy_prob_is_epsilon);

  m.def(
      "features_model1",
      [](double distance_m, int remaining_queue, double d0_m, int queue_max) {
        return features_model1(distance_m, remaining_queue,
                               {d0_m, queue_max, 10})
            .values;
      },
      py::arg("distance_m"), py::arg("remaining_queue"), py::arg("d0_m") = 3.0,
      py::arg("queue_max") = kQueueMax);
  m.def(
      "features_model2",
      [](int neighbor_count, int remaining_queue, int neighbor_cap,
         int queue_max) {
        return features_model2(neighbor_count, remaining_queue,
                               {3.0, queue_max, neighbor_cap})
            .values;
      },
      py::arg("neighbor_count"), py::arg("remaining_queue"),
      py::arg("neighbor_cap") = 10, py::arg("queue_max") = kQueueMax);
  m.def(
      "q_value",
      [](const PolicyWeights& w, const std::vector<double>& features,
         int action) { return q_value(w, as_features(features), action); },
      py::arg("weights"), py::arg("features"), py::arg("action"));
  m.def(
      "select_action",
      [](const PolicyWeights& w, const std::vector<double>& features,
         double greedy_probability, Rng& rng) {
        return select_action(w, as_features(features), greedy_probability, rng);
      },
      py::arg("weights"), py::arg("features"), py::arg("greedy_probability"),
      py::arg("rng"));
  m.def(
      "reward",
      [](int action, bool already_covered, double link_rate_bps,
         double system_rate_bps, double reward_normalizer_bps) {
        return reward({action, already_covered, link_rate_bps, system_rate_bps},
                      reward_normalizer_bps);
      },
      py::arg("action"), py::arg("already_covered"), py::arg("link_rate_bps"),
      py::arg("system_rate_bps"), py::arg("reward_normalizer_bps") = 10e9);
  m.def(
      "td_update",
      [](PolicyWeights& w, const std::vector<double>& features, int action,
         double reward_value, const std::vector<double>& next_features,
         const LearningConfig& cfg) {
        td_update(w, as_features(features), action, reward_value,
                  as_features(next_features), cfg);
      },
      py::arg("weights"), py::arg("features"), py::arg("action"),
      py::arg("reward_value"), py::arg("next_features"), py::arg("config"));
  m.def(
      "decay_epsilon",
      [](double epsilon0, int episode_index, int period, double factor) {
        LearningConfig cfg;
        cfg.decay_period_episodes = period;
        cfg.epsilon_decay_factor = factor;
        return decay_epsilon(epsilon0, episode_index, cfg);
      },
      py::arg("epsilon0"), py::arg("episode_index"), py::arg("period") = 50,
      py::arg("factor") = 0.9);

  m.def("default_config_json",
        []() { return default_config_json().dump(2); });
  m.def(
      "run_simulation",
      [](const std::string& config_json) {
        Simulation sim(config_from_json(nlohmann::json::parse(config_json)));
        py::list rows;
        for (const EpisodeMetrics& m : sim.run_collect()) {
          rows.append(metrics_to_dict(m));
        }
        return rows;
      },
      py::arg("config_json"),
      "Run a full simulation from a JSON config string; returns one dict "
      "per episode.");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
