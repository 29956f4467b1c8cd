#pragma once

#include <span>
#include <utility>
#include <vector>

#include "udld/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace udld {

inline constexpr int kActionCount = 2;  // 0 = no link, 1 = relay
inline constexpr int kQueueMax = 5;

// [1, f1, ..., fm]; element 0 is the bias term.
struct FeatureVector {
  std::vector<double> values;

  int feature_count() const { return static_cast<int>(values.size()); }
};

// Weight matrix of the linear Q approximation, one column per action.
class PolicyWeights {
 public:
  PolicyWeights() = default;
  static PolicyWeights zeros(int feature_count);

  int feature_count() const { return feature_count_; }
  double at(int feature, int action) const;
  double& at(int feature, int action);

  nlohmann::json to_json() const;
  static PolicyWeights from_json(const nlohmann::json& j);

  bool operator==(const PolicyWeights&) const = default;

 private:
  int feature_count_ = 0;
  std::vector<double> theta_;  // row-major (feature_count x kActionCount)
};

struct LearningConfig {
  double alpha = 0.01;
  double beta = 0.7;
  double epsilon = 0.5;
  double epsilon_decay_factor = 0.9;
  int decay_period_episodes = 50;
  double reward_normalizer_bps = 10e9;  // R*
  int neighbor_cap = 10;
  // True keeps the pseudocode branch roles (greedy with probability epsilon);
  // false gives the conventional reading (greedy with probability 1-epsilon).
  bool greedy_prob_is_epsilon = false;
  // How hard the broadcast policy overwrites a device's own weights:
  // theta <- (1-w)*theta + w*theta_merged. 1 is a full replace.
  double global_policy_weight = 0.5;

  void validate() const;
};

struct RewardInputs {
  int action = 0;               // a_i
  bool already_covered = false; // c_j at decision time
  double link_rate_bps = 0.0;   // R_ij
  double system_rate_bps = 0.0; // R_0
};

struct FeatureNormalizers {
  double d0_m = 3.0;
  int queue_max = kQueueMax;
  int neighbor_cap = 10;
};

// Model 1 state: distance to the layer-2 device and the free queue slots,
// both scaled to about [0, 1].
FeatureVector features_model1(double distance_m, int remaining_queue,
                              const FeatureNormalizers& norm);

// Model 2 state: nearby-agent count (capped) and the free queue slots.
FeatureVector features_model2(int neighbor_count, int remaining_queue,
                              const FeatureNormalizers& norm);

double q_value(const PolicyWeights& weights, const FeatureVector& features,
               int action);

// Greedy argmax with probability `greedy_probability`, otherwise a uniform
// random action. Q ties resolve to action 0.
int select_action(const PolicyWeights& weights, const FeatureVector& features,
                  double greedy_probability, Rng& rng);

// The four-case coverage reward, normalized by R*.
double reward(const RewardInputs& in, double reward_normalizer_bps);

// One TD step on the taken action's column:
// theta_a += alpha * (r + beta * max_a' Q(next) - Q(current)) * phi.
void td_update(PolicyWeights& weights, const FeatureVector& features,
               int action, double reward_value,
               const FeatureVector& next_features,
               const LearningConfig& config);

struct AgentPolicy {
  PolicyWeights weights;
  double cumulative_reward = 0.0;  // R_i for the episode
};

// Policy of the agent with the highest cumulative reward; ties take the
// earliest entry. Callers list agents in ascending id order.
const PolicyWeights& merge_policies(std::span<const AgentPolicy> agents);

// theta <- (1-w)*theta + w*target, elementwise.
void blend_policy(PolicyWeights& theta, const PolicyWeights& target, double w);

// epsilon0 * decay^(episode / period), integer division.
double decay_epsilon(double epsilon0, int episode_index,
                     const LearningConfig& config);

}  // namespace udld
