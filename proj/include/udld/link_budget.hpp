#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udld/errors.hpp"

namespace udld {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kBeamwidthFloorDeg = 0.5;
inline constexpr double kBeamwidthMaxDeg = 360.0;

// Medium absorption coefficient K (1/m) versus frequency, tabulated at a
// reference humidity and temperature. Lookup interpolates linearly between
// grid points; the effective coefficient scales linearly with the humidity
// ratio relative to the reference. Temperature dependence is deliberately
// flat (see absorption_loss_db).
class AbsorptionTable {
 public:
  AbsorptionTable() = default;
  AbsorptionTable(std::vector<double> frequency_hz, std::vector<double> k_per_m,
                  double reference_humidity = 0.6);

  // Built-in table over 500-600 GHz. The 575 GHz anchor is calibrated so
  // that max_range_m under the default radio settings lands at 3.0 m.
  static AbsorptionTable defaults();

  // Two-column whitespace-separated text file: frequency_hz k_per_m.
  static AbsorptionTable load(const std::string& path);
  void save(const std::string& path) const;

  // Coefficient at the reference humidity; ConfigError outside the band.
  double coefficient(double frequency_hz) const;

  double min_frequency_hz() const { return frequency_hz_.front(); }
  double max_frequency_hz() const { return frequency_hz_.back(); }
  double reference_humidity() const { return reference_humidity_; }
  std::size_t size() const { return frequency_hz_.size(); }

  // Same grid with every coefficient multiplied by `factor`.
  AbsorptionTable scaled(double factor) const;

 private:
  std::vector<double> frequency_hz_;
  std::vector<double> k_per_m_;
  double reference_humidity_ = 0.6;
};

struct LinkBudgetParams {
  double carrier_frequency_hz = 575e9;
  double transmit_power_dbm = 0.0;
  double beamwidth_deg = 10.0;
  double relative_humidity = 0.6;
  double temperature_k = 296.0;
  double noise_density_dbm_per_hz = -174.0;
  AbsorptionTable absorption = AbsorptionTable::defaults();

  void validate() const;  // throws std::domain_error / ConfigError
};

struct LinkQuality {
  double distance_m = 0.0;
  double bandwidth_hz = 0.0;
  double rate_bps = 0.0;
  double received_power_dbm = 0.0;
};

// Symmetric-aperture gain model: G = 10*log10(52525 / bw^2) dBi.
double antenna_gain_dbi(double beamwidth_deg);

// Free space path loss, 20*log10(4*pi*d*f/c) dB.
double spreading_loss_db(double frequency_hz, double distance_m);

// Molecular absorption in dB: 10*log10(e) * K(f, rho) * d, with K interpolated
// from the table and scaled linearly in humidity. Temperature is accepted for
// interface completeness but does not modulate the tabulated coefficient.
double absorption_loss_db(const AbsorptionTable& table, double frequency_hz,
                          double distance_m, double relative_humidity,
                          double temperature_k);
double absorption_loss_db(const LinkBudgetParams& params, double distance_m);

// Power at the receiver after both antenna gains and both losses.
double received_power_dbm(const LinkBudgetParams& params, double distance_m);

double snr_db(const LinkBudgetParams& params, double bandwidth_hz,
              double distance_m);

// Shannon rate B*log2(1 + SNR) in bits/s.
double capacity_bps(const LinkBudgetParams& params, double bandwidth_hz,
                    double distance_m);

LinkQuality evaluate_link(const LinkBudgetParams& params, double bandwidth_hz,
                          double distance_m);

// Smallest beamwidth (same beam at both ends) reaching the target spectral
// efficiency at `distance_m`, bisected to 0.01 degree. nullopt when even the
// 0.5-degree floor cannot reach it.
std::optional<double> min_beamwidth_deg(const LinkBudgetParams& params,
                                        double bandwidth_hz, double distance_m,
                                        double target_se_bps_per_hz);

// Largest distance at which the target spectral efficiency is still met,
// bisected to 1 mm. nullopt when the target is out of reach at any distance.
std::optional<double> max_range_m(const LinkBudgetParams& params,
                                  double bandwidth_hz,
                                  double target_se_bps_per_hz);

// Solves for the absorption anchor K(f_c) such that max_range_m equals
// `target_range_m`, holding the table's spectral shape fixed. Returns the
// rescaled table; ConfigError when no non-negative coefficient can work.
AbsorptionTable calibrate_absorption(const LinkBudgetParams& params,
                                     double bandwidth_hz,
                                     double target_se_bps_per_hz,
                                     double target_range_m);

}  // namespace udld
