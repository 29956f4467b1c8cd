#include "udld/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace udld {

const char* model_name(Model m) {
  switch (m) {
    case Model::kModel1:
      return "model1";
    case Model::kModel2:
      return "model2";
    case Model::kCentral:
      return "central";
    case Model::kNoD2d:
      return "no_d2d";
  }
  return "?";
}

Model parse_model(const std::string& name) {
  if (name == "model1") return Model::kModel1;
  if (name == "model2") return Model::kModel2;
  if (name == "central") return Model::kCentral;
  if (name == "no_d2d") return Model::kNoD2d;
  throw ConfigError("unknown model: " + name +
                    " (expected model1|model2|central|no_d2d)");
}

Room SceneConfig::room() const {
  Room r;
  r.width = room_width;
  r.height = room_height;
  r.ap_position = ap_position;
  r.static_obstacles = obstacles;
  return r;
}

void SceneConfig::validate() const {
  room().validate();
  if (device_count < 1) {
    throw ConfigError("scene.device_count must be >= 1");
  }
  if (body_radius < 0.0) {
    throw ConfigError("scene.body_radius must be >= 0");
  }
  if (queue_capacity < 1 || queue_capacity > kQueueMax) {
    throw ConfigError("scene.queue_capacity must be in [1, 5]");
  }
}

void RadioConfig::validate() const {
  params.validate();
  if (!(total_bandwidth_hz > 0.0)) {
    throw ConfigError("radio.total_bandwidth_hz must be > 0");
  }
  if (!(target_se_bps_per_hz > 0.0)) {
    throw ConfigError("radio.target_spectral_efficiency must be > 0");
  }
  if (!(d0_m > 0.0)) {
    throw ConfigError("radio.d0_m must be > 0");
  }
}

double RadioConfig::effective_gamma0_dbm() const {
  if (gamma0_dbm) {
    return *gamma0_dbm;
  }
  return received_power_dbm(params, d0_m);
}

void SimConfig::validate() const {
  scene.validate();
  radio.validate();
  learning.validate();
  if (episodes < 1) {
    throw ConfigError("simulation.episodes must be >= 1");
  }
  if (!(dt_s > 0.0)) {
    throw ConfigError("simulation.dt_s must be > 0");
  }
}

int EpisodeState::covered_count() const {
  int c = 0;
  for (auto v : covered) c += v != 0;
  return c;
}

double EpisodeState::total_reward() const {
  return std::accumulate(agent_rewards.begin(), agent_rewards.end(), 0.0);
}

double partition_bandwidth(double total_hz, int layer1_count) {
  if (!(total_hz > 0.0)) {
    throw std::domain_error("total bandwidth must be > 0");
  }
  if (layer1_count < 1) {
    throw std::domain_error("bandwidth partition needs >= 1 layer-1 device");
  }
  return total_hz / layer1_count;
}

std::vector<int> candidate_devices(int agent_id, const TopologySnapshot& snap,
                                   double d0_m) {
  std::vector<int> out;
  for (int j : snap.layer2_ids()) {
    if (snap.pair_distance(agent_id, j) <= d0_m && snap.pair_los(agent_id, j)) {
      out.push_back(j);
    }
  }
  return out;
}

namespace {

// Relay rate over the agent's slice; optionally capped by the AP->agent leg.
double relay_rate_bps(const EpisodeContext& ctx, int agent_id, int device_id) {
  const double d = std::max(ctx.snapshot->pair_distance(agent_id, device_id),
                            1e-9);
  double rate = capacity_bps(*ctx.params, ctx.per_agent_bandwidth_hz, d);
  if (ctx.two_hop_bottleneck) {
    const double backhaul =
        capacity_bps(*ctx.params, ctx.per_agent_bandwidth_hz,
                     std::max(ctx.snapshot->ap_distance(agent_id), 1e-9));
    rate = std::min(rate, backhaul);
  }
  return rate;
}

struct PendingDecision {
  int agent_index = 0;  // into the layer1 id list
  int agent_id = 0;
  int device_id = 0;
  int action = 0;
  bool covered_at_decision = false;
  double link_rate_bps = 0.0;
  FeatureVector features;
  FeatureVector next_features;
};

}  // namespace

EpisodeState run_learning_episode(const EpisodeContext& ctx,
                                  std::span<Device> devices,
                                  std::vector<PolicyWeights>& device_policies,
                                  Rng& rng) {
  const TopologySnapshot& snap = *ctx.snapshot;
  const LearningConfig& cfg = *ctx.learning;
  const int n = snap.device_count();

  EpisodeState state;
  state.covered.assign(n, 0);
  state.agent_rewards.assign(n, 0.0);
  state.per_agent_bandwidth_hz = ctx.per_agent_bandwidth_hz;

  const std::vector<int>& agents = snap.layer1_ids();
  if (agents.empty()) {
    return state;
  }

  // Agents work on episode-local copies of their own weights.
  std::vector<PolicyWeights> local;
  local.reserve(agents.size());
  for (int id : agents) {
    local.push_back(device_policies.at(id));
  }
  auto agent_index = [&](int id) {
    return static_cast<int>(std::lower_bound(agents.begin(), agents.end(), id) -
                            agents.begin());
  };

  const double greedy_p =
      cfg.greedy_prob_is_epsilon ? ctx.epsilon : 1.0 - ctx.epsilon;
  const FeatureNormalizers norm{ctx.d0_m, devices[agents[0]].queue_capacity,
                                cfg.neighbor_cap};

  std::vector<int> order = agents;
  rng.shuffle(order);

  std::vector<PendingDecision> pending;
  for (int i : order) {
    Device& agent = devices[i];
    const int ai = agent_index(i);
    const int neighbor_count = ctx.model == Model::kModel2
                                   ? neighbors_within(i, snap, ctx.d0_m)
                                   : 0;
    for (int j : candidate_devices(i, snap, ctx.d0_m)) {
      const int remaining = agent.remaining_queue();
      FeatureVector feat =
          ctx.model == Model::kModel2
              ? features_model2(neighbor_count, remaining, norm)
              : features_model1(snap.pair_distance(i, j), remaining, norm);
      const int action = select_action(local[ai], feat, greedy_p, rng);

      PendingDecision d;
      d.agent_index = ai;
      d.agent_id = i;
      d.device_id = j;
      d.action = action;
      d.covered_at_decision = state.covered[j] != 0;

      const bool established = action == 1 && remaining > 0;
      if (established) {
        d.link_rate_bps = relay_rate_bps(ctx, i, j);
        state.links.push_back({i, j, d.link_rate_bps});
        agent.queue_in_use += 1;
        state.covered[j] = 1;
      }
      // A relay decision with a full queue carries no throughput.
      const int next_remaining = agent.remaining_queue();
      d.next_features =
          ctx.model == Model::kModel2
              ? features_model2(neighbor_count, next_remaining, norm)
              : features_model1(snap.pair_distance(i, j), next_remaining, norm);
      d.features = std::move(feat);
      pending.push_back(std::move(d));
    }
  }

  // Public reward: mean per-link throughput of this episode's link set.
  double r0 = 0.0;
  if (!state.links.empty()) {
    for (const LinkAssignment& l : state.links) r0 += l.rate_bps;
    r0 /= static_cast<double>(state.links.size());
  }
  state.system_rate_bps = r0;

  // Rewards and TD updates replay the decisions in the order they were made.
  for (PendingDecision& d : pending) {
    const RewardInputs in{d.action, d.covered_at_decision, d.link_rate_bps, r0};
    const double r = reward(in, cfg.reward_normalizer_bps);
    td_update(local[d.agent_index], d.features, d.action, r, d.next_features,
              cfg);
    state.agent_rewards[d.agent_id] += r;
    state.decisions.push_back({d.agent_id, d.device_id, d.action,
                               d.covered_at_decision, d.link_rate_bps, r0, r});
  }

  std::vector<AgentPolicy> merged;
  merged.reserve(agents.size());
  for (std::size_t k = 0; k < agents.size(); ++k) {
    merged.push_back({std::move(local[k]), state.agent_rewards[agents[k]]});
  }
  const PolicyWeights best = merge_policies(merged);

  // Broadcast: agents keep their freshly trained weights pulled toward the
  // winner; idle devices drift the same way so a device promoted to agent
  // next episode starts near the shared policy.
  for (std::size_t k = 0; k < agents.size(); ++k) {
    device_policies.at(agents[k]) = std::move(merged[k].weights);
  }
  for (PolicyWeights& theta : device_policies) {
    blend_policy(theta, best, cfg.global_policy_weight);
  }
  return state;
}

namespace {

// Min-cost max-flow on the tiny agent/device bipartite graph. Costs are
// shifted non-negative so the successive-shortest-path flow is maximum in
// covered devices first and maximum in total rate second.
class MatchingSolver {
 public:
  explicit MatchingSolver(int nodes) : head_(nodes, -1) {}

  void add_edge(int from, int to, int capacity, double cost) {
    edges_.push_back({to, head_[from], capacity, cost});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], 0, -cost});
    head_[to] = static_cast<int>(edges_.size()) - 1;
  }

  // Returns total flow; per-edge flow readable via edge_flow.
  int solve(int source, int sink) {
    const int n = static_cast<int>(head_.size());
    int total = 0;
    while (true) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> prev_edge(n, -1);
      dist[source] = 0.0;
      // Bellman-Ford; graph is tiny and has no negative cycles.
      for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (int u = 0; u < n; ++u) {
          if (!std::isfinite(dist[u])) continue;
          for (int e = head_[u]; e != -1; e = edges_[e].next) {
            if (edges_[e].capacity <= 0) continue;
            const int v = edges_[e].to;
            const double nd = dist[u] + edges_[e].cost;
            if (nd < dist[v] - 1e-12) {
              dist[v] = nd;
              prev_edge[v] = e;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (prev_edge[sink] == -1) break;
      int push = std::numeric_limits<int>::max();
      for (int v = sink; v != source;) {
        const int e = prev_edge[v];
        push = std::min(push, edges_[e].capacity);
        v = edges_[e ^ 1].to;
      }
      for (int v = sink; v != source;) {
        const int e = prev_edge[v];
        edges_[e].capacity -= push;
        edges_[e ^ 1].capacity += push;
        v = edges_[e ^ 1].to;
      }
      total += push;
    }
    return total;
  }

  int edge_flow(int edge_index) const { return edges_[edge_index ^ 1].capacity; }

 private:
  struct Edge {
    int to;
    int next;
    int capacity;
    double cost;
  };
  std::vector<Edge> edges_;
  std::vector<int> head_;
};

}  // namespace

EpisodeState baseline_central(const EpisodeContext& ctx,
                              std::span<const Device> devices) {
  const TopologySnapshot& snap = *ctx.snapshot;
  const int n = snap.device_count();

  EpisodeState state;
  state.covered.assign(n, 0);
  state.agent_rewards.assign(n, 0.0);
  state.per_agent_bandwidth_hz = ctx.per_agent_bandwidth_hz;

  const std::vector<int>& agents = snap.layer1_ids();
  const std::vector<int>& layer2 = snap.layer2_ids();
  if (agents.empty() || layer2.empty()) {
    return state;
  }

  struct Candidate {
    int agent_slot;
    int device_slot;
    double rate;
  };
  std::vector<Candidate> feasible;
  double max_rate = 0.0;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    for (std::size_t d = 0; d < layer2.size(); ++d) {
      const int i = agents[a];
      const int j = layer2[d];
      if (snap.pair_distance(i, j) <= ctx.d0_m && snap.pair_los(i, j)) {
        const double rate = relay_rate_bps(ctx, i, j);
        feasible.push_back({static_cast<int>(a), static_cast<int>(d), rate});
        max_rate = std::max(max_rate, rate);
      }
    }
  }
  if (feasible.empty()) {
    return state;
  }

  const int source = 0;
  const int agent_base = 1;
  const int device_base = agent_base + static_cast<int>(agents.size());
  const int sink = device_base + static_cast<int>(layer2.size());
  MatchingSolver solver(sink + 1);
  for (std::size_t a = 0; a < agents.size(); ++a) {
    solver.add_edge(source, agent_base + static_cast<int>(a),
                    devices[agents[a]].queue_capacity, 0.0);
  }
  for (std::size_t d = 0; d < layer2.size(); ++d) {
    solver.add_edge(device_base + static_cast<int>(d), sink, 1, 0.0);
  }
  // Each add_edge stores a forward/backward pair; the k-th feasible link's
  // forward edge sits after the source and sink edge pairs.
  const int first_link_edge =
      2 * static_cast<int>(agents.size() + layer2.size());
  for (const Candidate& c : feasible) {
    solver.add_edge(agent_base + c.agent_slot, device_base + c.device_slot, 1,
                    max_rate - c.rate);
  }
  solver.solve(source, sink);
  std::vector<int> link_edges;
  link_edges.reserve(feasible.size());
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    link_edges.push_back(first_link_edge + 2 * static_cast<int>(k));
  }

  for (std::size_t k = 0; k < feasible.size(); ++k) {
    if (solver.edge_flow(link_edges[k]) > 0) {
      const Candidate& c = feasible[k];
      const int i = agents[c.agent_slot];
      const int j = layer2[c.device_slot];
      state.links.push_back({i, j, c.rate});
      state.covered[j] = 1;
    }
  }
  std::sort(state.links.begin(), state.links.end(),
            [](const LinkAssignment& a, const LinkAssignment& b) {
              return std::tie(a.agent_id, a.device_id) <
                     std::tie(b.agent_id, b.device_id);
            });
  if (!state.links.empty()) {
    double sum = 0.0;
    for (const LinkAssignment& l : state.links) sum += l.rate_bps;
    state.system_rate_bps = sum / static_cast<double>(state.links.size());
  }
  return state;
}

EpisodeState baseline_no_d2d(const TopologySnapshot& snap) {
  EpisodeState state;
  state.covered.assign(snap.device_count(), 0);
  state.agent_rewards.assign(snap.device_count(), 0.0);
  return state;
}

EpisodeMetrics make_episode_metrics(int episode, const TopologySnapshot& snap,
                                    const EpisodeState& state, double epsilon) {
  EpisodeMetrics m;
  m.episode = episode;
  m.layer1_count = static_cast<int>(snap.layer1_ids().size());
  m.layer2_count = static_cast<int>(snap.layer2_ids().size());
  const int n = snap.device_count();
  m.coverage =
      n > 0 ? (m.layer1_count + state.covered_count()) / static_cast<double>(n)
            : 0.0;
  m.total_reward = state.total_reward();
  m.mean_reward_per_agent =
      m.layer1_count > 0 ? m.total_reward / m.layer1_count : 0.0;
  m.link_count = static_cast<int>(state.links.size());
  m.epsilon = epsilon;
  return m;
}

std::vector<Device> make_devices(const SceneConfig& scene, const Room& room,
                                 Rng& rng) {
  std::vector<Device> devices(scene.device_count);
  const double v = speed_mps(scene.speed_class);
  for (int i = 0; i < scene.device_count; ++i) {
    Device& d = devices[i];
    d.id = i;
    d.position = {rng.uniform(0.0, room.width), rng.uniform(0.0, room.height)};
    d.waypoint = {rng.uniform(0.0, room.width), rng.uniform(0.0, room.height)};
    d.body_radius = scene.body_radius;
    d.speed_mps = v;
    d.queue_capacity = scene.queue_capacity;
  }
  return devices;
}

Simulation::Simulation(SimConfig config)
    : cfg_(std::move(config)),
      room_(cfg_.scene.room()),
      env_rng_(mix_seed(cfg_.seed, 0)),
      agent_rng_(mix_seed(cfg_.seed, 1)) {
  cfg_.validate();
  gamma0_dbm_ = cfg_.radio.effective_gamma0_dbm();
  devices_ = make_devices(cfg_.scene, room_, env_rng_);
  policies_.assign(devices_.size(), PolicyWeights::zeros(3));
}

void Simulation::run(const MetricsSink& sink) {
  run_with_states([&](const EpisodeMetrics& m, const EpisodeState&,
                      const TopologySnapshot&) { sink(m); });
}

std::vector<EpisodeMetrics> Simulation::run_collect() {
  std::vector<EpisodeMetrics> out;
  out.reserve(cfg_.episodes);
  run([&](const EpisodeMetrics& m) { out.push_back(m); });
  return out;
}

void Simulation::run_with_states(const StateSink& sink) {
  for (int ep = 0; ep < cfg_.episodes; ++ep) {
    const double eps =
        decay_epsilon(cfg_.learning.epsilon, ep, cfg_.learning);
    const TopologySnapshot snap =
        classify_layers(room_, devices_, cfg_.radio.params, gamma0_dbm_);
    for (Device& d : devices_) {
      d.role = snap.is_layer1(d.id) ? Role::kAgent : Role::kLayer2;
      d.queue_in_use = 0;
    }

    EpisodeContext ctx;
    ctx.snapshot = &snap;
    ctx.params = &cfg_.radio.params;
    ctx.learning = &cfg_.learning;
    ctx.d0_m = cfg_.radio.d0_m;
    ctx.model = cfg_.model;
    ctx.epsilon = eps;
    ctx.two_hop_bottleneck = cfg_.two_hop_bottleneck;
    const int layer1 = static_cast<int>(snap.layer1_ids().size());
    ctx.per_agent_bandwidth_hz =
        layer1 > 0 ? partition_bandwidth(cfg_.radio.total_bandwidth_hz, layer1)
                   : 0.0;

    EpisodeState state;
    switch (cfg_.model) {
      case Model::kModel1:
      case Model::kModel2:
        state = run_learning_episode(ctx, devices_, policies_, agent_rng_);
        break;
      case Model::kCentral:
        state = baseline_central(ctx, devices_);
        break;
      case Model::kNoD2d:
        state = baseline_no_d2d(snap);
        break;
    }

    sink(make_episode_metrics(ep, snap, state, eps), state, snap);

    for (Device& d : devices_) {
      random_waypoint_step(d, room_, cfg_.dt_s, env_rng_);
    }
  }
}

}  // namespace udld
