#include "udld/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace udld {

double mean_of(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::domain_error("mean of empty sample");
  }
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::domain_error("std of empty sample");
  }
  if (xs.size() == 1) {
    return 0.0;
  }
  bool constant = true;
  for (double x : xs) constant = constant && x == xs.front();
  if (constant) {
    return 0.0;  // rounding in the mean must not manufacture variance
  }
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

namespace {

WindowStats stats_from(const std::vector<double>& cov,
                       const std::vector<double>& rew) {
  WindowStats w;
  w.episode_count = static_cast<int>(cov.size());
  w.mean_coverage = mean_of(cov);
  w.std_coverage = sample_std(cov);
  w.mean_total_reward = mean_of(rew);
  w.std_total_reward = sample_std(rew);
  return w;
}

}  // namespace

WindowStats aggregate_window(std::span<const EpisodeMetrics> run, int window) {
  if (window < 1) {
    throw std::domain_error("aggregation window must be >= 1");
  }
  if (run.empty()) {
    throw std::domain_error("cannot aggregate an empty metric stream");
  }
  const std::size_t k = std::min<std::size_t>(window, run.size());
  std::vector<double> cov;
  std::vector<double> rew;
  cov.reserve(k);
  rew.reserve(k);
  for (std::size_t i = run.size() - k; i < run.size(); ++i) {
    cov.push_back(run[i].coverage);
    rew.push_back(run[i].total_reward);
  }
  return stats_from(cov, rew);
}

WindowStats aggregate_runs(std::span<const std::vector<EpisodeMetrics>> runs,
                           int window) {
  if (window < 1) {
    throw std::domain_error("aggregation window must be >= 1");
  }
  std::vector<double> cov;
  std::vector<double> rew;
  for (const auto& run : runs) {
    if (run.empty()) {
      throw std::domain_error("cannot aggregate an empty metric stream");
    }
    const std::size_t k = std::min<std::size_t>(window, run.size());
    for (std::size_t i = run.size() - k; i < run.size(); ++i) {
      cov.push_back(run[i].coverage);
      rew.push_back(run[i].total_reward);
    }
  }
  if (cov.empty()) {
    throw std::domain_error("cannot aggregate zero runs");
  }
  return stats_from(cov, rew);
}

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

constexpr const char* kMetricsHeader =
    "episode,coverage,total_reward,mean_reward,layer1,layer2,links,epsilon";

}  // namespace

void write_metrics_csv(std::ostream& out,
                       std::span<const EpisodeMetrics> rows) {
  out << kMetricsHeader << '\n';
  for (const EpisodeMetrics& m : rows) {
    out << m.episode << ',' << format_g6(m.coverage) << ','
        << format_g6(m.total_reward) << ',' << format_g6(m.mean_reward_per_agent)
        << ',' << m.layer1_count << ',' << m.layer2_count << ',' << m.link_count
        << ',' << format_g6(m.epsilon) << '\n';
  }
}

void write_metrics_csv(const std::string& path,
                       std::span<const EpisodeMetrics> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  write_metrics_csv(out, rows);
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("unexpected metrics CSV header in " + path);
  }
  std::vector<EpisodeMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    EpisodeMetrics m;
    char comma;
    ss >> m.episode >> comma >> m.coverage >> comma >> m.total_reward >>
        comma >> m.mean_reward_per_agent >> comma >> m.layer1_count >> comma >>
        m.layer2_count >> comma >> m.link_count >> comma >> m.epsilon;
    if (!ss) {
      throw std::runtime_error("malformed metrics row in " + path + ": " + line);
    }
    rows.push_back(m);
  }
  return rows;
}

void write_sweep_csv(const std::string& path,
                     std::span<const SweepCell> cells) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << "density,mobility,model,mean_coverage,std_coverage,seed_count\n";
  for (const SweepCell& c : cells) {
    out << c.density << ',' << c.mobility << ',' << c.model << ','
        << format_g6(c.mean_coverage) << ',' << format_g6(c.std_coverage) << ','
        << c.seed_count << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace udld
