#include "udld/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "udld/errors.hpp"

namespace udld {

PolicyWeights PolicyWeights::zeros(int feature_count) {
  if (feature_count < 1) {
    throw std::invalid_argument("feature_count must be >= 1");
  }
  PolicyWeights w;
  w.feature_count_ = feature_count;
  w.theta_.assign(static_cast<std::size_t>(feature_count) * kActionCount, 0.0);
  return w;
}

double PolicyWeights::at(int feature, int action) const {
  if (feature < 0 || feature >= feature_count_ || action < 0 ||
      action >= kActionCount) {
    throw std::logic_error("policy weight index out of range");
  }
  return theta_[static_cast<std::size_t>(feature) * kActionCount + action];
}

double& PolicyWeights::at(int feature, int action) {
  if (feature < 0 || feature >= feature_count_ || action < 0 ||
      action >= kActionCount) {
    throw std::logic_error("policy weight index out of range");
  }
  return theta_[static_cast<std::size_t>(feature) * kActionCount + action];
}

nlohmann::json PolicyWeights::to_json() const {
  return nlohmann::json{{"feature_count", feature_count_},
                        {"action_count", kActionCount},
                        {"theta", theta_}};
}

PolicyWeights PolicyWeights::from_json(const nlohmann::json& j) {
  const int features = j.at("feature_count").get<int>();
  const int actions = j.at("action_count").get<int>();
  if (actions != kActionCount) {
    throw ConfigError("policy checkpoint has wrong action count");
  }
  PolicyWeights w = zeros(features);
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != w.theta_.size()) {
    throw ConfigError("policy checkpoint theta size mismatch");
  }
  w.theta_ = theta;
  for (double v : w.theta_) {
    if (!std::isfinite(v)) {
      throw ConfigError("policy checkpoint contains non-finite weights");
    }
  }
  return w;
}

void LearningConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("learning.alpha must be in (0, 1]");
  }
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::domain_error("learning.beta must be in [0, 1)");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::domain_error("learning.epsilon must be in [0, 1]");
  }
  if (!(epsilon_decay_factor > 0.0 && epsilon_decay_factor <= 1.0)) {
    throw std::domain_error("learning.epsilon_decay_factor must be in (0, 1]");
  }
  if (decay_period_episodes < 1) {
    throw std::domain_error("learning.decay_period_episodes must be >= 1");
  }
  if (!(reward_normalizer_bps > 0.0)) {
    throw std::domain_error("learning.reward_normalizer_bps must be > 0");
  }
  if (neighbor_cap < 1) {
    throw std::domain_error("learning.neighbor_cap must be >= 1");
  }
  if (!(global_policy_weight >= 0.0 && global_policy_weight <= 1.0)) {
    throw std::domain_error("learning.global_policy_weight must be in [0, 1]");
  }
}

FeatureVector features_model1(double distance_m, int remaining_queue,
                              const FeatureNormalizers& norm) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("distance must be > 0");
  }
  if (remaining_queue < 0 || remaining_queue > norm.queue_max) {
    throw std::domain_error("remaining_queue out of range");
  }
  return FeatureVector{{1.0, distance_m / norm.d0_m,
                        static_cast<double>(remaining_queue) / norm.queue_max}};
}

FeatureVector features_model2(int neighbor_count, int remaining_queue,
                              const FeatureNormalizers& norm) {
  if (neighbor_count < 0) {
    throw std::domain_error("neighbor_count must be >= 0");
  }
  if (remaining_queue < 0 || remaining_queue > norm.queue_max) {
    throw std::domain_error("remaining_queue out of range");
  }
  const double capped = std::min(neighbor_count, norm.neighbor_cap);
  return FeatureVector{{1.0, capped / norm.neighbor_cap,
                        static_cast<double>(remaining_queue) / norm.queue_max}};
}

double q_value(const PolicyWeights& weights, const FeatureVector& features,
               int action) {
  if (weights.feature_count() != features.feature_count()) {
    throw std::logic_error("feature/weight shape mismatch");
  }
  if (action < 0 || action >= kActionCount) {
    throw std::logic_error("action out of range");
  }
  double q = 0.0;
  for (int k = 0; k < features.feature_count(); ++k) {
    q += features.values[k] * weights.at(k, action);
  }
  return q;
}

int select_action(const PolicyWeights& weights, const FeatureVector& features,
                  double greedy_probability, Rng& rng) {
  if (!(greedy_probability >= 0.0 && greedy_probability <= 1.0)) {
    throw std::domain_error("greedy probability must be in [0, 1]");
  }
  if (rng.bernoulli(greedy_probability)) {
    const double q0 = q_value(weights, features, 0);
    const double q1 = q_value(weights, features, 1);
    return q1 > q0 ? 1 : 0;  // tie -> action 0
  }
  return static_cast<int>(rng.uniform_int(kActionCount));
}

double reward(const RewardInputs& in, double reward_normalizer_bps) {
  if (!(reward_normalizer_bps > 0.0)) {
    throw std::domain_error("reward normalizer must be > 0");
  }
  const double private_plus_public =
      (in.link_rate_bps + in.system_rate_bps) / reward_normalizer_bps;
  const double public_only = in.system_rate_bps / reward_normalizer_bps;
  if (in.action == 1) {
    return in.already_covered ? -private_plus_public : private_plus_public;
  }
  return in.already_covered ? -public_only : public_only;
}

void td_update(PolicyWeights& weights, const FeatureVector& features,
               int action, double reward_value,
               const FeatureVector& next_features,
               const LearningConfig& config) {
  const double q_next =
      std::max(q_value(weights, next_features, 0), q_value(weights, next_features, 1));
  const double td_error =
      reward_value + config.beta * q_next - q_value(weights, features, action);
  if (!std::isfinite(td_error)) {
    throw std::runtime_error("non-finite TD error; weights diverged");
  }
  for (int k = 0; k < features.feature_count(); ++k) {
    weights.at(k, action) += config.alpha * td_error * features.values[k];
  }
}

const PolicyWeights& merge_policies(std::span<const AgentPolicy> agents) {
  if (agents.empty()) {
    throw std::logic_error("merge_policies needs at least one agent");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < agents.size(); ++i) {
    if (agents[i].cumulative_reward > agents[best].cumulative_reward) {
      best = i;
    }
  }
  return agents[best].weights;
}

void blend_policy(PolicyWeights& theta, const PolicyWeights& target,
                  double w) {
  if (theta.feature_count() != target.feature_count()) {
    throw std::logic_error("policy blend shape mismatch");
  }
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::domain_error("blend weight must be in [0, 1]");
  }
  for (int k = 0; k < theta.feature_count(); ++k) {
    for (int a = 0; a < kActionCount; ++a) {
      theta.at(k, a) = (1.0 - w) * theta.at(k, a) + w * target.at(k, a);
    }
  }
}

double decay_epsilon(double epsilon0, int episode_index,
                     const LearningConfig& config) {
  if (episode_index < 0) {
    throw std::domain_error("episode index must be >= 0");
  }
  const int steps = episode_index / config.decay_period_episodes;
  return epsilon0 * std::pow(config.epsilon_decay_factor, steps);
}

}  // namespace udld
