#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "udld/environment.hpp"
#include "udld/link_budget.hpp"
#include "udld/rng.hpp"

using namespace udld;

namespace {

Room empty_room() {
  Room r;
  r.width = 10.0;
  r.height = 10.0;
  r.ap_position = {5.0, 5.0};
  return r;
}

Device make_device(int id, double x, double y, double radius = 0.2) {
  Device d;
  d.id = id;
  d.position = {x, y};
  d.waypoint = {x, y};
  d.body_radius = radius;
  return d;
}

std::vector<Device> random_scene(Rng& rng, const Room& room, int n) {
  std::vector<Device> devices;
  for (int i = 0; i < n; ++i) {
    devices.push_back(make_device(i, rng.uniform(0.0, room.width),
                                  rng.uniform(0.0, room.height)));
  }
  return devices;
}

}  // namespace

TEST_CASE("line of sight in an empty scene") {
  const Room room = empty_room();
  std::vector<Device> none;
  CHECK(line_of_sight({5, 5}, {8, 5}, room, none, {}));
}

TEST_CASE("a body on the segment blocks, a body beside it does not") {
  const Room room = empty_room();
  std::vector<Device> devices{make_device(0, 5.0, 6.5)};
  CHECK_FALSE(line_of_sight({5, 5}, {5, 8}, room, devices, {}));
  devices[0].position = {6.0, 6.5};  // 1.0 m off the segment
  CHECK(line_of_sight({5, 5}, {5, 8}, room, devices, {}));
}

TEST_CASE("excluded ids do not block") {
  const Room room = empty_room();
  std::vector<Device> devices{make_device(7, 5.0, 6.5)};
  const int exclude[1] = {7};
  CHECK(line_of_sight({5, 5}, {5, 8}, room, devices, exclude));
}

TEST_CASE("static rectangles block") {
  Room room = empty_room();
  room.static_obstacles.push_back({4.5, 6.0, 1.0, 0.5});
  std::vector<Device> none;
  CHECK_FALSE(line_of_sight({5, 5}, {5, 8}, room, none, {}));
  CHECK(line_of_sight({5, 5}, {8, 5}, room, none, {}));
}

TEST_CASE("line of sight is symmetric on random scenes") {
  Rng rng(11);
  Room room = empty_room();
  room.static_obstacles.push_back({2.0, 2.0, 1.5, 1.0});
  for (int trial = 0; trial < 50; ++trial) {
    const auto devices = random_scene(rng, room, 12);
    for (int k = 0; k < 20; ++k) {
      const Vec2 a{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
      const Vec2 b{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
      CHECK(line_of_sight(a, b, room, devices, {}) ==
            line_of_sight(b, a, room, devices, {}));
    }
  }
}

TEST_CASE("removing a blocker never destroys line of sight") {
  Rng rng(12);
  const Room room = empty_room();
  for (int trial = 0; trial < 100; ++trial) {
    const auto devices = random_scene(rng, room, 10);
    const Vec2 a{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    const Vec2 b{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    const bool before = line_of_sight(a, b, room, devices, {});
    const int drop[1] = {static_cast<int>(rng.uniform_int(10))};
    const bool after = line_of_sight(a, b, room, devices, drop);
    if (before) CHECK(after);
  }
}

TEST_CASE("classification: everyone close and unblocked is layer 1") {
  const Room room = empty_room();
  std::vector<Device> devices;
  // Ring well inside d0 with generous spacing so no body intersects
  // another device's AP segment.
  const int n = 6;
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * M_PI * i / n;
    devices.push_back(
        make_device(i, 5.0 + std::cos(angle), 5.0 + std::sin(angle)));
  }
  const LinkBudgetParams params;
  const double gamma0 = received_power_dbm(params, 3.0);
  const auto snap = classify_layers(room, devices, params, gamma0);
  CHECK(snap.layer2_ids().empty());
  CHECK(snap.layer1_ids().size() == static_cast<std::size_t>(n));
}

TEST_CASE("classification: a wall forces layer 2 regardless of distance") {
  Room room = empty_room();
  room.static_obstacles.push_back({5.4, 4.9, 0.4, 0.2});
  std::vector<Device> devices{make_device(0, 6.0, 5.0)};
  const LinkBudgetParams params;
  const double gamma0 = received_power_dbm(params, 3.0);
  const auto snap = classify_layers(room, devices, params, gamma0);
  CHECK(snap.layer1_ids().empty());
  REQUIRE(snap.layer2_ids().size() == 1);
  CHECK(snap.layer2_ids()[0] == 0);
}

TEST_CASE("classification agrees with a brute-force recheck") {
  Rng rng(40);
  Room room = empty_room();
  room.static_obstacles.push_back({2.0, 2.0, 1.5, 1.0});
  room.static_obstacles.push_back({6.5, 7.0, 1.5, 1.0});
  const LinkBudgetParams params;
  const double gamma0 = received_power_dbm(params, 3.0);

  for (int trial = 0; trial < 10; ++trial) {
    const auto devices = random_scene(rng, room, 40);
    const auto snap = classify_layers(room, devices, params, gamma0);

    // Partition invariant.
    CHECK(snap.layer1_ids().size() + snap.layer2_ids().size() == 40);
    std::vector<int> all = snap.layer1_ids();
    all.insert(all.end(), snap.layer2_ids().begin(), snap.layer2_ids().end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 40; ++i) CHECK(all[i] == i);

    // Independent O(n^2) recheck of membership and the matrices.
    for (const Device& dev : devices) {
      const double d = distance(room.ap_position, dev.position);
      const int self[1] = {dev.id};
      const bool los =
          line_of_sight(room.ap_position, dev.position, room, devices, self);
      const bool expect_layer1 =
          los && received_power_dbm(params, d) >= gamma0;
      CHECK(snap.is_layer1(dev.id) == expect_layer1);
      CHECK(snap.ap_distance(dev.id) == doctest::Approx(d));
      CHECK(snap.ap_los(dev.id) == los);
    }
    for (int i = 0; i < 40; ++i) {
      for (int j = i + 1; j < 40; ++j) {
        const int pair[2] = {i, j};
        CHECK(snap.pair_distance(i, j) ==
              doctest::Approx(distance(devices[i].position, devices[j].position)));
        CHECK(snap.pair_los(i, j) ==
              line_of_sight(devices[i].position, devices[j].position, room,
                            devices, pair));
        CHECK(snap.pair_los(i, j) == snap.pair_los(j, i));
      }
    }
  }
}

TEST_CASE("random waypoint step moves along a 3-4-5 triangle") {
  const Room room = empty_room();
  Device d = make_device(0, 0.0, 0.0);
  d.speed_mps = 1.0;
  d.waypoint = {3.0, 4.0};
  Rng rng(1);
  random_waypoint_step(d, room, 1.0, rng);
  CHECK(d.position.x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(d.position.y == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(d.waypoint.x == 3.0);
  CHECK(d.waypoint.y == 4.0);
}

TEST_CASE("zero speed devices never move nor redraw") {
  const Room room = empty_room();
  Device d = make_device(0, 2.0, 2.0);
  d.speed_mps = 0.0;
  d.waypoint = {9.0, 9.0};
  Rng rng(1);
  random_waypoint_step(d, room, 1.0, rng);
  CHECK(d.position.x == 2.0);
  CHECK(d.position.y == 2.0);
  CHECK(d.waypoint.x == 9.0);
  // The stream must be untouched: the next draw equals a fresh seed's first.
  CHECK(rng.uniform() == Rng(1).uniform());
}

TEST_CASE("overshoot lands on the waypoint and redraws from the stream") {
  const Room room = empty_room();
  Device d = make_device(0, 0.0, 0.0);
  d.speed_mps = 1.0;
  d.waypoint = {0.3, 0.0};

  Rng expect(99);
  const double wx = expect.uniform(0.0, room.width);
  const double wy = expect.uniform(0.0, room.height);

  Rng rng(99);
  random_waypoint_step(d, room, 1.0, rng);
  CHECK(d.position.x == 0.3);
  CHECK(d.position.y == 0.0);
  CHECK(d.waypoint.x == wx);
  CHECK(d.waypoint.y == wy);
}

TEST_CASE("motion stays inside the room") {
  const Room room = empty_room();
  Rng rng(5);
  auto devices = random_scene(rng, room, 15);
  for (auto& d : devices) d.speed_mps = 1.5;
  for (int step = 0; step < 2000; ++step) {
    for (auto& d : devices) {
      random_waypoint_step(d, room, 1.0, rng);
      CHECK(room.contains(d.position));
    }
  }
}

TEST_CASE("identical seeds give identical trajectories") {
  const Room room = empty_room();
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    auto devices = random_scene(rng, room, 8);
    for (auto& d : devices) d.speed_mps = 1.5;
    std::vector<double> trace;
    for (int step = 0; step < 200; ++step) {
      for (auto& d : devices) {
        random_waypoint_step(d, room, 1.0, rng);
        trace.push_back(d.position.x);
        trace.push_back(d.position.y);
      }
    }
    return trace;
  };
  CHECK(run(123) == run(123));
}

TEST_CASE("neighbors_within counts by threshold") {
  const Room room = empty_room();
  // Agents at distances 1, 2.5 and 4 from device 0; all unobstructed.
  std::vector<Device> devices{
      make_device(0, 2.0, 1.0, 0.0), make_device(1, 3.0, 1.0, 0.0),
      make_device(2, 4.5, 1.0, 0.0), make_device(3, 6.0, 1.0, 0.0)};
  const LinkBudgetParams params;
  const double gamma0 = -1e9;  // everyone passes the signal check
  const auto snap = classify_layers(room, devices, params, gamma0);
  REQUIRE(snap.layer1_ids().size() == 4);
  CHECK(neighbors_within(0, snap, 3.0) == 2);
  CHECK_THROWS_AS(neighbors_within(99, snap, 3.0), std::out_of_range);
}

TEST_CASE("a sole agent has zero neighbors") {
  const Room room = empty_room();
  std::vector<Device> devices{make_device(0, 2.0, 2.0)};
  const auto snap = classify_layers(room, devices, LinkBudgetParams{}, -1e9);
  CHECK(neighbors_within(0, snap, 3.0) == 0);
}

TEST_CASE("neighbor counts match a brute-force scan") {
  Rng rng(21);
  const Room room = empty_room();
  auto devices = random_scene(rng, room, 20);
  for (auto& d : devices) d.body_radius = 0.0;  // keep everyone in layer 1
  const auto snap = classify_layers(room, devices, LinkBudgetParams{}, -1e9);
  REQUIRE(snap.layer1_ids().size() == 20);
  for (int i = 0; i < 20; ++i) {
    int expect = 0;
    for (int j = 0; j < 20; ++j) {
      if (j != i &&
          distance(devices[i].position, devices[j].position) <= 3.0) {
        ++expect;
      }
    }
    CHECK(neighbors_within(i, snap, 3.0) == expect);
  }
}

TEST_CASE("room validation") {
  Room room = empty_room();
  CHECK_NOTHROW(room.validate());
  room.ap_position = {11.0, 5.0};
  CHECK_THROWS_AS(room.validate(), std::domain_error);
  room = empty_room();
  room.static_obstacles.push_back({9.0, 9.0, 2.0, 1.0});
  CHECK_THROWS_AS(room.validate(), std::domain_error);
  room = empty_room();
  room.static_obstacles.push_back({1.0, 1.0, 0.0, 1.0});
  CHECK_THROWS_AS(room.validate(), std::domain_error);
}

TEST_CASE("speed classes") {
  CHECK(speed_mps(SpeedClass::kStatic) == 0.0);
  CHECK(speed_mps(SpeedClass::kSlow) == 0.5);
  CHECK(speed_mps(SpeedClass::kFast) == 1.5);
  CHECK(parse_speed_class("fast") == SpeedClass::kFast);
  CHECK_THROWS_AS(parse_speed_class("warp"), ConfigError);
}
