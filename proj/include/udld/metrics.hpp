#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace udld {

struct EpisodeMetrics {
  int episode = 0;
  double coverage = 0.0;  // (|layer1| + covered layer2) / N
  double total_reward = 0.0;
  double mean_reward_per_agent = 0.0;
  int layer1_count = 0;
  int layer2_count = 0;
  int link_count = 0;
  double epsilon = 0.0;
};

// Mean/std pairs over an episode window. std is the sample standard
// deviation (n-1 denominator), 0 for a single sample.
struct WindowStats {
  double mean_coverage = 0.0;
  double std_coverage = 0.0;
  double mean_total_reward = 0.0;
  double std_total_reward = 0.0;
  int episode_count = 0;
};

// Stats over the last `window` episodes of one run. Throws std::domain_error
// on an empty stream or window < 1.
WindowStats aggregate_window(std::span<const EpisodeMetrics> run, int window);

// Pools the per-seed windows of several runs: mean/std over all windowed
// episodes of all seeds together.
WindowStats aggregate_runs(std::span<const std::vector<EpisodeMetrics>> runs,
                           int window);

struct SweepCell {
  int density = 0;              // device count N
  std::string mobility;         // speed class name
  std::string model;
  double mean_coverage = 0.0;
  double std_coverage = 0.0;
  int seed_count = 0;
};

double mean_of(std::span<const double> xs);
double sample_std(std::span<const double> xs);

// Fixed column order, 6 significant digits, '\n' endings; byte-stable for a
// given metric stream.
void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> rows);
void write_metrics_csv(const std::string& path,
                       std::span<const EpisodeMetrics> rows);

std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path);

void write_sweep_csv(const std::string& path, std::span<const SweepCell> cells);

// %.6g rendering used for every floating-point CSV field.
std::string format_g6(double v);

}  // namespace udld
