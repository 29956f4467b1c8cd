#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udld/agents.hpp"
#include "udld/environment.hpp"
#include "udld/link_budget.hpp"
#include "udld/metrics.hpp"
#include "udld/rng.hpp"

namespace udld {

enum class Model : std::uint8_t { kModel1, kModel2, kCentral, kNoD2d };
const char* model_name(Model m);
Model parse_model(const std::string& name);

struct SceneConfig {
  double room_width = 10.0;
  double room_height = 10.0;
  Vec2 ap_position{5.0, 5.0};
  std::vector<Rect> obstacles{{2.0, 2.0, 1.5, 1.0}, {6.5, 7.0, 1.5, 1.0}};
  int device_count = 40;
  SpeedClass speed_class = SpeedClass::kFast;
  double body_radius = 0.2;
  int queue_capacity = kQueueMax;

  Room room() const;
  void validate() const;
};

struct RadioConfig {
  LinkBudgetParams params;
  double total_bandwidth_hz = 10e9;  // 570-580 GHz band
  double target_se_bps_per_hz = 10.0;
  double d0_m = 3.0;
  std::optional<double> gamma0_dbm;  // derived from d0 when absent

  void validate() const;
  // Signal threshold for layer 1: explicit value, or the received power at
  // d0 so that membership matches "line of sight within d0".
  double effective_gamma0_dbm() const;
};

struct SimConfig {
  SceneConfig scene;
  RadioConfig radio;
  LearningConfig learning;
  int episodes = 500;
  Model model = Model::kModel1;
  std::uint64_t seed = 1;
  double dt_s = 1.0;
  // When set, the relay rate is capped by the AP->agent leg capacity.
  bool two_hop_bottleneck = false;

  void validate() const;
};

// One agent decision, kept for reward audits.
struct DecisionRecord {
  int agent_id = 0;
  int device_id = 0;
  int action = 0;
  bool covered_at_decision = false;
  double link_rate_bps = 0.0;
  double system_rate_bps = 0.0;
  double reward = 0.0;
};

struct LinkAssignment {
  int agent_id = 0;
  int device_id = 0;
  double rate_bps = 0.0;
};

struct EpisodeState {
  std::vector<LinkAssignment> links;        // M_R
  std::vector<std::uint8_t> covered;        // c_j per device id
  std::vector<double> agent_rewards;        // R_i per device id
  double per_agent_bandwidth_hz = 0.0;      // B_i
  double system_rate_bps = 0.0;             // R_0
  std::vector<DecisionRecord> decisions;

  int covered_count() const;
  double total_reward() const;
};

// B / |layer1|, exact. layer1_count must be >= 1.
double partition_bandwidth(double total_hz, int layer1_count);

// Layer-2 devices an agent may relay to: within d0 and with relay-link
// line of sight, ascending id.
std::vector<int> candidate_devices(int agent_id, const TopologySnapshot& snap,
                                   double d0_m);

struct EpisodeContext {
  const TopologySnapshot* snapshot = nullptr;
  const LinkBudgetParams* params = nullptr;
  const LearningConfig* learning = nullptr;
  double per_agent_bandwidth_hz = 0.0;
  double d0_m = 3.0;
  Model model = Model::kModel1;
  double epsilon = 0.5;  // scheduled value for this episode
  bool two_hop_bottleneck = false;
};

// One pass of the learning procedure over all agents: shuffled agent order,
// per-candidate action selection, coverage bookkeeping at decision time,
// end-of-episode public rate, TD updates in decision order, then the merged
// policy broadcast into every device's weights (blend strength comes from
// the learning config). `device_policies` is indexed by device id.
EpisodeState run_learning_episode(const EpisodeContext& ctx,
                                  std::span<Device> devices,
                                  std::vector<PolicyWeights>& device_policies,
                                  Rng& rng);

// Best-case assignment: maximum number of covered layer-2 devices subject to
// queue capacity, range and relay LoS; ties broken toward higher total rate.
EpisodeState baseline_central(const EpisodeContext& ctx,
                              std::span<const Device> devices);

// Worst case: only direct line-of-sight users are covered.
EpisodeState baseline_no_d2d(const TopologySnapshot& snap);

EpisodeMetrics make_episode_metrics(int episode, const TopologySnapshot& snap,
                                    const EpisodeState& state, double epsilon);

class Simulation {
 public:
  explicit Simulation(SimConfig config);

  using MetricsSink = std::function<void(const EpisodeMetrics&)>;
  // Runs every episode: classify, partition, act, report, move. Fully
  // deterministic for a given config+seed.
  void run(const MetricsSink& sink);
  std::vector<EpisodeMetrics> run_collect();

  // Episode hook for tests and figure dumps: like run() but also exposing
  // the per-episode state.
  using StateSink =
      std::function<void(const EpisodeMetrics&, const EpisodeState&,
                         const TopologySnapshot&)>;
  void run_with_states(const StateSink& sink);

  const SimConfig& config() const { return cfg_; }
  const Room& room() const { return room_; }
  const std::vector<PolicyWeights>& device_policies() const {
    return policies_;
  }

 private:
  SimConfig cfg_;
  Room room_;
  double gamma0_dbm_ = 0.0;
  std::vector<Device> devices_;
  std::vector<PolicyWeights> policies_;  // one per device id
  Rng env_rng_;
  Rng agent_rng_;
};

std::vector<Device> make_devices(const SceneConfig& scene, const Room& room,
                                 Rng& rng);

}  // namespace udld
