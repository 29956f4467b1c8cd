#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "udld/link_budget.hpp"
#include "udld/rng.hpp"

namespace udld {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);

// Axis-aligned rectangle given by its lower-left corner and extents.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Shortest distance from point p to segment ab.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
// Open-disk occlusion: true when the segment passes strictly inside the disk.
bool segment_intersects_disk(Vec2 a, Vec2 b, Vec2 center, double radius);
bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r);

struct Room {
  double width = 10.0;
  double height = 10.0;
  Vec2 ap_position{5.0, 5.0};
  std::vector<Rect> static_obstacles;

  bool contains(Vec2 p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  void validate() const;
};

enum class Role : std::uint8_t { kAgent, kLayer2 };

enum class SpeedClass : std::uint8_t { kStatic, kSlow, kFast };
double speed_mps(SpeedClass c);
const char* speed_class_name(SpeedClass c);
SpeedClass parse_speed_class(const std::string& name);

struct Device {
  int id = 0;
  Vec2 position;
  double body_radius = 0.2;
  double speed_mps = 1.5;
  Vec2 waypoint;
  Role role = Role::kLayer2;
  int queue_capacity = 5;
  int queue_in_use = 0;

  int remaining_queue() const { return queue_capacity - queue_in_use; }
};

// Per-episode view of the topology: layer split, pairwise distances and
// line-of-sight for every device pair and for each device against the AP.
class TopologySnapshot {
 public:
  TopologySnapshot() = default;
  explicit TopologySnapshot(int device_count);

  int device_count() const { return n_; }
  std::vector<int>& layer1_ids() { return layer1_ids_; }
  std::vector<int>& layer2_ids() { return layer2_ids_; }
  const std::vector<int>& layer1_ids() const { return layer1_ids_; }
  const std::vector<int>& layer2_ids() const { return layer2_ids_; }

  bool is_layer1(int id) const;

  double pair_distance(int i, int j) const { return dist_[index(i, j)]; }
  bool pair_los(int i, int j) const { return los_[index(i, j)] != 0; }
  double ap_distance(int i) const { return ap_dist_.at(i); }
  bool ap_los(int i) const { return ap_los_.at(i) != 0; }

  void set_pair(int i, int j, double d, bool los);
  void set_ap(int i, double d, bool los);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int n_ = 0;
  std::vector<int> layer1_ids_;
  std::vector<int> layer2_ids_;
  std::vector<double> dist_;
  std::vector<std::uint8_t> los_;
  std::vector<double> ap_dist_;
  std::vector<std::uint8_t> ap_los_;
};

// True when the open segment a-b crosses no static obstacle and no device
// body other than the excluded ids (the endpoints' own devices).
bool line_of_sight(Vec2 a, Vec2 b, const Room& room,
                   std::span<const Device> devices,
                   std::span<const int> exclude_ids);

// Layer split per the signal rule: layer 1 needs AP line-of-sight and a
// received power of at least gamma0_dbm. Fills both distance/LoS matrices.
TopologySnapshot classify_layers(const Room& room,
                                 std::span<const Device> devices,
                                 const LinkBudgetParams& params,
                                 double gamma0_dbm);

// One random-waypoint move over dt seconds. Landing on the waypoint draws a
// fresh uniform target; zero-speed devices never move.
void random_waypoint_step(Device& device, const Room& room, double dt_s,
                          Rng& rng);

// Number of *other* layer-1 devices within `radius_m` of `device_id`
// (straight-line distance; the AP supplies this, so no LoS requirement).
int neighbors_within(int device_id, const TopologySnapshot& snapshot,
                     double radius_m);

}  // namespace udld
