#include "udld/link_budget.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace udld {
namespace {

constexpr double kGainNumerator = 52525.0;
// 10*log10(e): converts a natural-log absorption exponent K*d into dB.
constexpr double kNeperToDb = 4.342944819032518;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

AbsorptionTable::AbsorptionTable(std::vector<double> frequency_hz,
                                 std::vector<double> k_per_m,
                                 double reference_humidity)
    : frequency_hz_(std::move(frequency_hz)),
      k_per_m_(std::move(k_per_m)),
      reference_humidity_(reference_humidity) {
  if (frequency_hz_.size() < 2 || frequency_hz_.size() != k_per_m_.size()) {
    throw ConfigError("absorption table needs >= 2 (frequency, k) rows");
  }
  if (!std::is_sorted(frequency_hz_.begin(), frequency_hz_.end())) {
    throw ConfigError("absorption table frequencies must be ascending");
  }
  for (double k : k_per_m_) {
    if (!(k >= 0.0)) {
      throw ConfigError("absorption coefficients must be >= 0");
    }
  }
  if (!(reference_humidity_ > 0.0 && reference_humidity_ <= 1.0)) {
    throw ConfigError("absorption table reference humidity must be in (0, 1]");
  }
}

AbsorptionTable AbsorptionTable::defaults() {
  // 500-600 GHz grid, 2.5 GHz spacing, at 60% RH / 296 K. The spectral shape
  // is a gentle bump around the strong 557 GHz water vapor line; the single
  // degree of freedom is the 575 GHz value, calibrated so the default radio
  // settings give a 3.0 m range at 10 bps/Hz.
  constexpr double kAnchor575 = 1.315973;  // 1/m
  constexpr double kBumpCenterGhz = 557.0;
  constexpr double kBumpWidthGhz = 8.0;
  constexpr double kBumpAmplitude = 2.0;
  auto shape = [](double f_ghz) {
    const double t = (f_ghz - kBumpCenterGhz) / kBumpWidthGhz;
    return 1.0 + kBumpAmplitude * std::exp(-t * t);
  };
  const double norm = kAnchor575 / shape(575.0);
  std::vector<double> freqs;
  std::vector<double> ks;
  for (int i = 0; i <= 40; ++i) {
    const double f_ghz = 500.0 + 2.5 * i;
    freqs.push_back(f_ghz * 1e9);
    ks.push_back(norm * shape(f_ghz));
  }
  return AbsorptionTable(std::move(freqs), std::move(ks), 0.6);
}

AbsorptionTable AbsorptionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open absorption table: " + path);
  }
  std::vector<double> freqs;
  std::vector<double> ks;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double f = 0.0;
    double k = 0.0;
    if (row >> f >> k) {
      freqs.push_back(f);
      ks.push_back(k);
    }
  }
  if (freqs.size() < 2) {
    throw ConfigError("absorption table " + path + " has fewer than 2 rows");
  }
  return AbsorptionTable(std::move(freqs), std::move(ks));
}

void AbsorptionTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write absorption table: " + path);
  }
  out << "# frequency_hz k_per_m (reference humidity "
      << reference_humidity_ << ")\n";
  for (std::size_t i = 0; i < frequency_hz_.size(); ++i) {
    std::ostringstream row;
    row.precision(12);
    row << frequency_hz_[i] << ' ' << k_per_m_[i] << '\n';
    out << row.str();
  }
  if (!out) {
    throw std::runtime_error("write failed for absorption table: " + path);
  }
}

double AbsorptionTable::coefficient(double frequency_hz) const {
  if (frequency_hz < frequency_hz_.front() ||
      frequency_hz > frequency_hz_.back()) {
    throw ConfigError("frequency " + std::to_string(frequency_hz) +
                      " Hz outside absorption table band [" +
                      std::to_string(frequency_hz_.front()) + ", " +
                      std::to_string(frequency_hz_.back()) + "]");
  }
  const auto upper = std::upper_bound(frequency_hz_.begin(),
                                      frequency_hz_.end(), frequency_hz);
  if (upper == frequency_hz_.end()) {
    return k_per_m_.back();
  }
  const std::size_t hi = static_cast<std::size_t>(upper - frequency_hz_.begin());
  if (hi == 0) {
    return k_per_m_.front();
  }
  const std::size_t lo = hi - 1;
  const double span = frequency_hz_[hi] - frequency_hz_[lo];
  const double t = span > 0.0 ? (frequency_hz - frequency_hz_[lo]) / span : 0.0;
  return k_per_m_[lo] + t * (k_per_m_[hi] - k_per_m_[lo]);
}

AbsorptionTable AbsorptionTable::scaled(double factor) const {
  std::vector<double> ks(k_per_m_);
  for (double& k : ks) k *= factor;
  return AbsorptionTable(frequency_hz_, std::move(ks), reference_humidity_);
}

void LinkBudgetParams::validate() const {
  if (!(carrier_frequency_hz > 0.0)) {
    throw std::domain_error("carrier_frequency_hz must be > 0");
  }
  if (!(beamwidth_deg > 0.0 && beamwidth_deg <= kBeamwidthMaxDeg)) {
    throw std::domain_error("beamwidth_deg must be in (0, 360]");
  }
  if (!(relative_humidity >= 0.0 && relative_humidity <= 1.0)) {
    throw std::domain_error("relative_humidity must be in [0, 1]");
  }
  if (!(temperature_k > 0.0)) {
    throw std::domain_error("temperature_k must be > 0");
  }
  if (absorption.size() == 0) {
    throw ConfigError("absorption table is empty");
  }
  // Forces the band check.
  absorption.coefficient(carrier_frequency_hz);
}

double antenna_gain_dbi(double beamwidth_deg) {
  if (!(beamwidth_deg > 0.0 && beamwidth_deg <= kBeamwidthMaxDeg)) {
    throw std::domain_error("beamwidth must be in (0, 360] degrees");
  }
  return 10.0 * std::log10(kGainNumerator / (beamwidth_deg * beamwidth_deg));
}

double spreading_loss_db(double frequency_hz, double distance_m) {
  if (!(frequency_hz > 0.0) || !(distance_m > 0.0)) {
    throw std::domain_error("spreading loss needs frequency > 0 and distance > 0");
  }
  return 20.0 *
         std::log10(4.0 * M_PI * distance_m * frequency_hz / kSpeedOfLight);
}

double absorption_loss_db(const AbsorptionTable& table, double frequency_hz,
                          double distance_m, double relative_humidity,
                          double temperature_k) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("absorption loss needs distance > 0");
  }
  if (!(temperature_k > 0.0)) {
    throw std::domain_error("temperature must be > 0");
  }
  const double k_ref = table.coefficient(frequency_hz);
  const double k = k_ref * (relative_humidity / table.reference_humidity());
  return kNeperToDb * k * distance_m;
}

double absorption_loss_db(const LinkBudgetParams& params, double distance_m) {
  return absorption_loss_db(params.absorption, params.carrier_frequency_hz,
                            distance_m, params.relative_humidity,
                            params.temperature_k);
}

double received_power_dbm(const LinkBudgetParams& params, double distance_m) {
  const double gain = antenna_gain_dbi(params.beamwidth_deg);
  return params.transmit_power_dbm + 2.0 * gain -
         spreading_loss_db(params.carrier_frequency_hz, distance_m) -
         absorption_loss_db(params, distance_m);
}

double snr_db(const LinkBudgetParams& params, double bandwidth_hz,
              double distance_m) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::domain_error("bandwidth must be > 0");
  }
  const double noise_dbm =
      params.noise_density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
  return received_power_dbm(params, distance_m) - noise_dbm;
}

double capacity_bps(const LinkBudgetParams& params, double bandwidth_hz,
                    double distance_m) {
  const double snr = db_to_linear(snr_db(params, bandwidth_hz, distance_m));
  return bandwidth_hz * std::log2(1.0 + snr);
}

LinkQuality evaluate_link(const LinkBudgetParams& params, double bandwidth_hz,
                          double distance_m) {
  LinkQuality q;
  q.distance_m = distance_m;
  q.bandwidth_hz = bandwidth_hz;
  q.received_power_dbm = received_power_dbm(params, distance_m);
  q.rate_bps = capacity_bps(params, bandwidth_hz, distance_m);
  return q;
}

std::optional<double> min_beamwidth_deg(const LinkBudgetParams& params,
                                        double bandwidth_hz, double distance_m,
                                        double target_se_bps_per_hz) {
  if (!(target_se_bps_per_hz > 0.0)) {
    throw std::domain_error("target spectral efficiency must be > 0");
  }
  const double target_bps = target_se_bps_per_hz * bandwidth_hz;
  auto meets = [&](double bw) {
    LinkBudgetParams p = params;
    p.beamwidth_deg = bw;
    return capacity_bps(p, bandwidth_hz, distance_m) >= target_bps;
  };
  if (!meets(kBeamwidthFloorDeg)) {
    return std::nullopt;  // even the narrowest pencil-beam falls short
  }
  if (meets(kBeamwidthMaxDeg)) {
    return kBeamwidthMaxDeg;
  }
  double lo = kBeamwidthFloorDeg;  // feasible
  double hi = kBeamwidthMaxDeg;    // infeasible
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    (meets(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::optional<double> max_range_m(const LinkBudgetParams& params,
                                  double bandwidth_hz,
                                  double target_se_bps_per_hz) {
  if (!(target_se_bps_per_hz > 0.0)) {
    throw std::domain_error("target spectral efficiency must be > 0");
  }
  const double target_bps = target_se_bps_per_hz * bandwidth_hz;
  auto meets = [&](double d) {
    return capacity_bps(params, bandwidth_hz, d) >= target_bps;
  };
  constexpr double kNear = 1e-6;
  if (!meets(kNear)) {
    return std::nullopt;
  }
  double lo = kNear;
  double hi = 1.0;
  while (meets(hi) && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= 1e6) {
    return hi;  // effectively unbounded for this parameter set
  }
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (meets(mid) ? lo : hi) = mid;
  }
  return lo;
}

AbsorptionTable calibrate_absorption(const LinkBudgetParams& params,
                                     double bandwidth_hz,
                                     double target_se_bps_per_hz,
                                     double target_range_m) {
  if (!(target_range_m > 0.0)) {
    throw std::domain_error("target range must be > 0");
  }
  // Range shrinks monotonically as the table scales up; bisect the scale.
  auto range_at = [&](double factor) -> std::optional<double> {
    LinkBudgetParams p = params;
    p.absorption = params.absorption.scaled(factor);
    return max_range_m(p, bandwidth_hz, target_se_bps_per_hz);
  };
  const auto vacuum = range_at(0.0);
  if (!vacuum || *vacuum < target_range_m) {
    throw ConfigError(
        "calibration infeasible: target range unreachable even in vacuum");
  }
  double lo = 0.0;  // range too large
  double hi = 1.0;
  while (true) {
    const auto r = range_at(hi);
    if (!r || *r < target_range_m) break;
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) {
      throw ConfigError("calibration diverged: absorption has no effect");
    }
  }
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const auto r = range_at(mid);
    if (r && *r >= target_range_m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return params.absorption.scaled(lo);
}

}  // namespace udld
