#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "udld/link_budget.hpp"
#include "udld/rng.hpp"

using namespace udld;

namespace {

LinkBudgetParams default_params() { return LinkBudgetParams{}; }

// Operating point the absorption table is calibrated against: 40 devices
// sharing 10 GHz, 10 bps/Hz target.
constexpr double kSliceBandwidth = 250e6;
constexpr double kTargetSe = 10.0;

// Linear-domain recomputation of the whole budget, used as the independent
// oracle for the dB-domain implementation.
double capacity_linear_oracle(const LinkBudgetParams& p, double bandwidth_hz,
                              double d) {
  const double gain_lin = 52525.0 / (p.beamwidth_deg * p.beamwidth_deg);
  const double p_mw = std::pow(10.0, p.transmit_power_dbm / 10.0);
  const double ls_amp = 4.0 * M_PI * d * p.carrier_frequency_hz / kSpeedOfLight;
  const double ls_lin = ls_amp * ls_amp;
  const double k = p.absorption.coefficient(p.carrier_frequency_hz) *
                   (p.relative_humidity / p.absorption.reference_humidity());
  const double la_lin = std::exp(k * d);
  const double noise_mw =
      std::pow(10.0, p.noise_density_dbm_per_hz / 10.0) * bandwidth_hz;
  const double snr = p_mw * gain_lin * gain_lin / (ls_lin * la_lin * noise_mw);
  return bandwidth_hz * std::log2(1.0 + snr);
}

}  // namespace

TEST_CASE("antenna gain matches the 27 dBi / 10 degree pairing") {
  CHECK(antenna_gain_dbi(10.0) == doctest::Approx(27.2036606108).epsilon(1e-9));
  CHECK(std::abs(antenna_gain_dbi(10.0) - 27.0) < 0.5);
}

TEST_CASE("antenna gain zero crossing and doubling law") {
  CHECK(std::abs(antenna_gain_dbi(229.2)) < 1e-3);
  const double g0 = antenna_gain_dbi(57.3);
  const double g1 = antenna_gain_dbi(114.6);
  CHECK(g0 - g1 == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("antenna gain rejects out-of-range beamwidths") {
  CHECK_THROWS_AS(antenna_gain_dbi(0.0), std::domain_error);
  CHECK_THROWS_AS(antenna_gain_dbi(-3.0), std::domain_error);
  CHECK_THROWS_AS(antenna_gain_dbi(360.1), std::domain_error);
}

TEST_CASE("antenna gain is strictly decreasing and invertible") {
  double prev = antenna_gain_dbi(0.01);
  for (double bw = 0.5; bw <= 360.0; bw += 0.5) {
    const double g = antenna_gain_dbi(bw);
    CHECK(g < prev);
    // invert: bw = sqrt(52525 / 10^(g/10))
    const double back = std::sqrt(52525.0 / std::pow(10.0, g / 10.0));
    CHECK(back == doctest::Approx(bw).epsilon(1e-9));
    prev = g;
  }
}

TEST_CASE("spreading loss frozen value and scaling laws") {
  CHECK(spreading_loss_db(575e9, 1.0) ==
        doctest::Approx(87.6411401157).epsilon(1e-9));
  const double six = 20.0 * std::log10(2.0);
  CHECK(spreading_loss_db(575e9, 2.0) - spreading_loss_db(575e9, 1.0) ==
        doctest::Approx(six).epsilon(1e-12));
  CHECK(spreading_loss_db(2 * 575e9, 1.0) - spreading_loss_db(575e9, 1.0) ==
        doctest::Approx(six).epsilon(1e-12));
  CHECK_THROWS_AS(spreading_loss_db(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(spreading_loss_db(575e9, 0.0), std::domain_error);
}

TEST_CASE("absorption: vacuum table gives zero loss") {
  AbsorptionTable vacuum({500e9, 600e9}, {0.0, 0.0});
  CHECK(absorption_loss_db(vacuum, 575e9, 5.0, 0.6, 296.0) == 0.0);
  CHECK(absorption_loss_db(vacuum, 500e9, 0.001, 0.6, 296.0) == 0.0);
}

TEST_CASE("absorption loss is linear in distance") {
  const LinkBudgetParams p = default_params();
  const double l1 = absorption_loss_db(p, 1.7);
  const double l2 = absorption_loss_db(p, 3.4);
  CHECK(l2 == 2.0 * l1);
}

TEST_CASE("absorption loss scales linearly with humidity") {
  LinkBudgetParams p = default_params();
  p.relative_humidity = 0.3;
  const double half = absorption_loss_db(p, 3.0);
  p.relative_humidity = 0.6;
  const double ref = absorption_loss_db(p, 3.0);
  CHECK(half == doctest::Approx(0.5 * ref).epsilon(1e-12));
  p.relative_humidity = 0.0;
  CHECK(absorption_loss_db(p, 3.0) == 0.0);
}

TEST_CASE("absorption table rejects out-of-band frequencies") {
  const AbsorptionTable table = AbsorptionTable::defaults();
  CHECK_THROWS_AS(table.coefficient(499e9), ConfigError);
  CHECK_THROWS_AS(table.coefficient(601e9), ConfigError);
  CHECK(table.coefficient(500e9) > 0.0);
  CHECK(table.coefficient(600e9) > 0.0);
}

TEST_CASE("calibrated default: absorption at 3 m matches the range anchor") {
  const LinkBudgetParams p = default_params();
  // 17.146 dB of slack is what pins max_range to 3.0 m at this geometry.
  CHECK(absorption_loss_db(p, 3.0) == doctest::Approx(17.1456).epsilon(1e-4));
  const auto range = max_range_m(p, kSliceBandwidth, kTargetSe);
  REQUIRE(range.has_value());
  CHECK(*range == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("capacity: spectral efficiency is 1 where SNR crosses 0 dB") {
  const LinkBudgetParams p = default_params();
  // Find the 0 dB SNR distance with plain bisection on snr_db.
  double lo = 0.1;
  double hi = 50.0;
  REQUIRE(snr_db(p, kSliceBandwidth, lo) > 0.0);
  REQUIRE(snr_db(p, kSliceBandwidth, hi) < 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (snr_db(p, kSliceBandwidth, mid) > 0.0 ? lo : hi) = mid;
  }
  const double se = capacity_bps(p, kSliceBandwidth, lo) / kSliceBandwidth;
  CHECK(se == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("capacity under the default operating point reaches 10 bps/Hz at 3 m") {
  const LinkBudgetParams p = default_params();
  const double se = capacity_bps(p, kSliceBandwidth, 3.0) / kSliceBandwidth;
  CHECK(se >= 10.0);
  CHECK(se == doctest::Approx(10.0).epsilon(1e-4));
}

TEST_CASE("capacity decreases with distance") {
  const LinkBudgetParams p = default_params();
  const double r1 = capacity_bps(p, kSliceBandwidth, 1.0);
  const double r2 = capacity_bps(p, kSliceBandwidth, 2.0);
  const double r3 = capacity_bps(p, kSliceBandwidth, 3.0);
  CHECK(r1 > r2);
  CHECK(r2 > r3);
}

TEST_CASE("capacity monotonicity in distance and power over random params") {
  Rng rng(20240811);
  for (int trial = 0; trial < 200; ++trial) {
    LinkBudgetParams p = default_params();
    p.beamwidth_deg = rng.uniform(1.0, 60.0);
    p.transmit_power_dbm = rng.uniform(-10.0, 10.0);
    p.carrier_frequency_hz = rng.uniform(500e9, 600e9);
    p.relative_humidity = rng.uniform(0.0, 1.0);
    const double b = rng.uniform(1e6, 1e9);
    const double d = rng.uniform(0.2, 8.0);
    CHECK(capacity_bps(p, b, d) > capacity_bps(p, b, d * 1.01));
    LinkBudgetParams hotter = p;
    hotter.transmit_power_dbm += 1.0;
    CHECK(capacity_bps(hotter, b, d) > capacity_bps(p, b, d));
  }
}

TEST_CASE("dB-domain budget matches the linear-domain oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    LinkBudgetParams p = default_params();
    p.beamwidth_deg = rng.uniform(0.5, 120.0);
    p.transmit_power_dbm = rng.uniform(-20.0, 20.0);
    p.carrier_frequency_hz = rng.uniform(500e9, 600e9);
    p.relative_humidity = rng.uniform(0.0, 1.0);
    const double b = rng.uniform(1e6, 1e10);
    const double d = rng.uniform(0.05, 10.0);
    const double got = capacity_bps(p, b, d);
    const double want = capacity_linear_oracle(p, b, d);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("min beamwidth hits the Fig. 1 operating point") {
  const LinkBudgetParams p = default_params();
  const auto bw = min_beamwidth_deg(p, kSliceBandwidth, 3.0, kTargetSe);
  REQUIRE(bw.has_value());
  CHECK(*bw == doctest::Approx(10.0).epsilon(0.005));
}

TEST_CASE("min beamwidth widens toward the maximum as the link shortens") {
  const LinkBudgetParams p = default_params();
  const auto bw = min_beamwidth_deg(p, kSliceBandwidth, 1e-4, kTargetSe);
  REQUIRE(bw.has_value());
  CHECK(*bw == kBeamwidthMaxDeg);
}

TEST_CASE("min beamwidth narrows strictly with distance") {
  const LinkBudgetParams p = default_params();
  const auto b1 = min_beamwidth_deg(p, kSliceBandwidth, 1.0, kTargetSe);
  const auto b2 = min_beamwidth_deg(p, kSliceBandwidth, 2.0, kTargetSe);
  const auto b3 = min_beamwidth_deg(p, kSliceBandwidth, 3.0, kTargetSe);
  REQUIRE(b1.has_value());
  REQUIRE(b2.has_value());
  REQUIRE(b3.has_value());
  // Longer links demand more gain, so the feasible beam gets narrower.
  CHECK(*b1 > *b2);
  CHECK(*b2 > *b3);
}

TEST_CASE("min beamwidth reports infeasible targets") {
  const LinkBudgetParams p = default_params();
  CHECK_FALSE(min_beamwidth_deg(p, kSliceBandwidth, 40.0, kTargetSe).has_value());
}

TEST_CASE("min beamwidth boundary consistency") {
  const LinkBudgetParams p = default_params();
  for (double d : {1.0, 1.7, 2.4, 3.0}) {
    const auto bw = min_beamwidth_deg(p, kSliceBandwidth, d, kTargetSe);
    REQUIRE(bw.has_value());
    const double target_bps = kTargetSe * kSliceBandwidth;
    LinkBudgetParams q = p;
    q.beamwidth_deg = *bw;
    CHECK(capacity_bps(q, kSliceBandwidth, d) >= target_bps * (1.0 - 1e-9));
    q.beamwidth_deg = *bw - 0.1;
    CHECK(capacity_bps(q, kSliceBandwidth, d) > target_bps);
    q.beamwidth_deg = *bw + 0.1;
    CHECK(capacity_bps(q, kSliceBandwidth, d) < target_bps);
  }
}

TEST_CASE("max range responds to gain and absorption") {
  LinkBudgetParams p = default_params();
  const auto base = max_range_m(p, kSliceBandwidth, kTargetSe);
  REQUIRE(base.has_value());

  LinkBudgetParams narrow = p;
  narrow.beamwidth_deg = 5.0;  // more gain
  const auto longer = max_range_m(narrow, kSliceBandwidth, kTargetSe);
  REQUIRE(longer.has_value());
  CHECK(*longer > *base);

  LinkBudgetParams foggy = p;
  foggy.absorption = p.absorption.scaled(2.0);
  const auto shorter = max_range_m(foggy, kSliceBandwidth, kTargetSe);
  REQUIRE(shorter.has_value());
  CHECK(*shorter < *base);
}

TEST_CASE("max range reports infeasible targets") {
  LinkBudgetParams p = default_params();
  p.beamwidth_deg = 359.0;
  CHECK_FALSE(max_range_m(p, kSliceBandwidth, 40.0).has_value());
}

TEST_CASE("calibration recovers the embedded anchor") {
  const LinkBudgetParams p = default_params();
  const AbsorptionTable solved =
      calibrate_absorption(p, kSliceBandwidth, kTargetSe, 3.0);
  CHECK(solved.coefficient(575e9) ==
        doctest::Approx(p.absorption.coefficient(575e9)).epsilon(1e-5));

  LinkBudgetParams q = p;
  q.absorption = solved;
  const auto range = max_range_m(q, kSliceBandwidth, kTargetSe);
  REQUIRE(range.has_value());
  CHECK(*range == doctest::Approx(3.0).epsilon(0.001));
}

TEST_CASE("params validation") {
  LinkBudgetParams p = default_params();
  p.relative_humidity = 1.5;
  CHECK_THROWS_AS(p.validate(), std::domain_error);
  p = default_params();
  p.carrier_frequency_hz = 650e9;  // outside table
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = default_params();
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("absorption table file round trip") {
  const AbsorptionTable table = AbsorptionTable::defaults();
  const std::string path = "absorption_roundtrip_test.txt";
  table.save(path);
  const AbsorptionTable loaded = AbsorptionTable::load(path);
  CHECK(loaded.size() == table.size());
  for (double f : {500e9, 533e9, 557e9, 575e9, 600e9}) {
    CHECK(loaded.coefficient(f) ==
          doctest::Approx(table.coefficient(f)).epsilon(1e-9));
  }
  std::remove(path.c_str());
}
