#include "udld/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace udld {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) {
    return distance(p, a);
  }
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool segment_intersects_disk(Vec2 a, Vec2 b, Vec2 center, double radius) {
  if (radius <= 0.0) return false;
  return point_segment_distance(center, a, b) < radius;
}

namespace {

// Liang-Barsky clip of segment a-b against the rectangle's slab ranges.
bool clip_axis(double p, double q, double& t0, double& t1) {
  if (p == 0.0) {
    return q >= 0.0;
  }
  const double r = q / p;
  if (p < 0.0) {
    if (r > t1) return false;
    t0 = std::max(t0, r);
  } else {
    if (r < t0) return false;
    t1 = std::min(t1, r);
  }
  return true;
}

}  // namespace

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return clip_axis(-dx, a.x - r.x, t0, t1) &&
         clip_axis(dx, r.x + r.w - a.x, t0, t1) &&
         clip_axis(-dy, a.y - r.y, t0, t1) &&
         clip_axis(dy, r.y + r.h - a.y, t0, t1) && t0 <= t1;
}

void Room::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::domain_error("room dimensions must be positive");
  }
  if (!contains(ap_position)) {
    throw std::domain_error("AP must be inside the room");
  }
  for (const Rect& r : static_obstacles) {
    if (!(r.w > 0.0) || !(r.h > 0.0)) {
      throw std::domain_error("obstacle rectangles must be non-degenerate");
    }
    if (r.x < 0.0 || r.y < 0.0 || r.x + r.w > width || r.y + r.h > height) {
      throw std::domain_error("obstacles must lie inside the room");
    }
  }
}

double speed_mps(SpeedClass c) {
  switch (c) {
    case SpeedClass::kStatic:
      return 0.0;
    case SpeedClass::kSlow:
      return 0.5;
    case SpeedClass::kFast:
      return 1.5;
  }
  return 0.0;
}

const char* speed_class_name(SpeedClass c) {
  switch (c) {
    case SpeedClass::kStatic:
      return "static";
    case SpeedClass::kSlow:
      return "slow";
    case SpeedClass::kFast:
      return "fast";
  }
  return "?";
}

SpeedClass parse_speed_class(const std::string& name) {
  if (name == "static") return SpeedClass::kStatic;
  if (name == "slow") return SpeedClass::kSlow;
  if (name == "fast") return SpeedClass::kFast;
  throw ConfigError("unknown speed class: " + name +
                    " (expected static|slow|fast)");
}

TopologySnapshot::TopologySnapshot(int device_count)
    : n_(device_count),
      dist_(static_cast<std::size_t>(device_count) * device_count, 0.0),
      los_(static_cast<std::size_t>(device_count) * device_count, 0),
      ap_dist_(device_count, 0.0),
      ap_los_(device_count, 0) {}

bool TopologySnapshot::is_layer1(int id) const {
  return std::binary_search(layer1_ids_.begin(), layer1_ids_.end(), id);
}

void TopologySnapshot::set_pair(int i, int j, double d, bool los) {
  dist_[index(i, j)] = d;
  dist_[index(j, i)] = d;
  los_[index(i, j)] = los ? 1 : 0;
  los_[index(j, i)] = los ? 1 : 0;
}

void TopologySnapshot::set_ap(int i, double d, bool los) {
  ap_dist_.at(i) = d;
  ap_los_.at(i) = los ? 1 : 0;
}

bool line_of_sight(Vec2 a, Vec2 b, const Room& room,
                   std::span<const Device> devices,
                   std::span<const int> exclude_ids) {
  for (const Rect& r : room.static_obstacles) {
    if (segment_intersects_rect(a, b, r)) {
      return false;
    }
  }
  for (const Device& d : devices) {
    bool excluded = false;
    for (int id : exclude_ids) {
      if (d.id == id) {
        excluded = true;
        break;
      }
    }
    if (excluded) continue;
    if (segment_intersects_disk(a, b, d.position, d.body_radius)) {
      return false;
    }
  }
  return true;
}

TopologySnapshot classify_layers(const Room& room,
                                 std::span<const Device> devices,
                                 const LinkBudgetParams& params,
                                 double gamma0_dbm) {
  const int n = static_cast<int>(devices.size());
  if (n == 0) {
    throw std::domain_error("classify_layers needs at least one device");
  }
  TopologySnapshot snap(n);
  for (int i = 0; i < n; ++i) {
    const Device& dev = devices[i];
    if (dev.id != i) {
      throw std::logic_error("device ids must equal their list index");
    }
    const double d = std::max(distance(room.ap_position, dev.position), 1e-9);
    const int exclude[1] = {dev.id};
    const bool los =
        line_of_sight(room.ap_position, dev.position, room, devices, exclude);
    snap.set_ap(i, d, los);
    const bool strong = received_power_dbm(params, d) >= gamma0_dbm;
    if (los && strong) {
      snap.layer1_ids().push_back(dev.id);
    } else {
      snap.layer2_ids().push_back(dev.id);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(devices[i].position, devices[j].position);
      const int exclude[2] = {devices[i].id, devices[j].id};
      const bool los = line_of_sight(devices[i].position, devices[j].position,
                                     room, devices, exclude);
      snap.set_pair(i, j, d, los);
    }
  }
  std::sort(snap.layer1_ids().begin(), snap.layer1_ids().end());
  std::sort(snap.layer2_ids().begin(), snap.layer2_ids().end());
  return snap;
}

void random_waypoint_step(Device& device, const Room& room, double dt_s,
                          Rng& rng) {
  if (dt_s <= 0.0) {
    throw std::domain_error("dt must be > 0");
  }
  if (device.speed_mps <= 0.0) {
    return;
  }
  const double step = device.speed_mps * dt_s;
  const Vec2 to_target = device.waypoint - device.position;
  const double gap = norm(to_target);
  if (gap <= step) {
    device.position = device.waypoint;
    device.waypoint = {rng.uniform(0.0, room.width),
                       rng.uniform(0.0, room.height)};
  } else {
    device.position = device.position + (step / gap) * to_target;
  }
}

int neighbors_within(int device_id, const TopologySnapshot& snapshot,
                     double radius_m) {
  if (!(radius_m > 0.0)) {
    throw std::domain_error("radius must be > 0");
  }
  if (device_id < 0 || device_id >= snapshot.device_count()) {
    throw std::out_of_range("unknown device id " + std::to_string(device_id));
  }
  int count = 0;
  for (int other : snapshot.layer1_ids()) {
    if (other == device_id) continue;
    if (snapshot.pair_distance(device_id, other) <= radius_m) {
      ++count;
    }
  }
  return count;
}

}  // namespace udld
