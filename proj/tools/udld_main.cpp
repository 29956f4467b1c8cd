#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "udld/config.hpp"
#include "udld/link_budget.hpp"
#include "udld/metrics.hpp"
#include "udld/parallel.hpp"
#include "udld/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace udld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<int> episodes;
  std::string output_dir = "out";
};

json load_config_doc(const CommonOpts& opts) {
  json doc;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) {
      throw ConfigError("cannot open config file: " + opts.config_path);
    }
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("invalid JSON in " + opts.config_path + ": " + e.what());
    }
  } else {
    doc = default_config_json();
  }
  for (const std::string& assignment : opts.overrides) {
    apply_override(doc, assignment);
  }
  return doc;
}

SimConfig resolve_config(const CommonOpts& opts) {
  json doc = load_config_doc(opts);
  SimConfig cfg = config_from_json(doc);
  if (opts.model) cfg.model = parse_model(*opts.model);
  if (opts.episodes) cfg.episodes = *opts.episodes;
  if (opts.seed) {
    cfg.seed = *opts.seed;
  } else if (const char* env = std::getenv("UDLD_SEED")) {
    cfg.seed = std::stoull(env);
  }
  cfg.validate();
  return cfg;
}

// Final-20%-of-episodes window, the steady-state slice summaries report.
int summary_window(int episodes) { return std::max(1, episodes / 5); }

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--set", opts.overrides,
                  "Override a config field, e.g. --set learning.alpha=0.02");
  cmd->add_option("--seed", opts.seed, "Seed override (or env UDLD_SEED)");
  cmd->add_option("--output", opts.output_dir, "Output directory");
}

int cmd_run(const CommonOpts& opts) {
  SimConfig cfg = resolve_config(opts);
  Simulation sim(cfg);
  const std::vector<EpisodeMetrics> metrics = sim.run_collect();

  fs::create_directories(opts.output_dir);
  const fs::path csv = fs::path(opts.output_dir) / "metrics.csv";
  write_metrics_csv(csv.string(), metrics);

  const int window = summary_window(cfg.episodes);
  const WindowStats stats = aggregate_window(metrics, window);
  json summary{{"model", model_name(cfg.model)},
               {"seed", cfg.seed},
               {"episodes", cfg.episodes},
               {"device_count", cfg.scene.device_count},
               {"window_episodes", stats.episode_count},
               {"mean_coverage", stats.mean_coverage},
               {"std_coverage", stats.std_coverage},
               {"mean_total_reward", stats.mean_total_reward},
               {"std_total_reward", stats.std_total_reward}};
  const fs::path summary_path = fs::path(opts.output_dir) / "summary.json";
  std::ofstream out(summary_path, std::ios::binary);
  out << summary.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed: " + summary_path.string());
  }
  std::cout << "wrote " << csv.string() << " and " << summary_path.string()
            << '\n';
  return kExitOk;
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
  std::vector<int> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": not an integer: " + item);
    }
  }
  if (out.empty()) {
    throw ConfigError(std::string(what) + ": empty list");
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SweepOpts {
  CommonOpts common;
  std::string densities = "10,20,40,80";
  std::string mobilities = "static,slow,fast";
  std::string models = "model2";
  int seeds = 20;
  std::uint64_t seed_base = 1;
  unsigned jobs = default_jobs();
};

int cmd_sweep(const SweepOpts& opts) {
  const json base_doc = load_config_doc(opts.common);
  const std::vector<int> densities =
      parse_int_list(opts.densities, "--densities");
  const std::vector<std::string> mobilities = parse_name_list(opts.mobilities);
  const std::vector<std::string> models = parse_name_list(opts.models);
  if (mobilities.empty() || models.empty() || opts.seeds < 1) {
    throw ConfigError("sweep grid must be non-empty");
  }

  struct RunSpec {
    std::size_t cell;
    std::uint64_t seed;
  };
  struct Cell {
    int density;
    std::string mobility;
    std::string model;
    std::vector<std::vector<EpisodeMetrics>> runs;
    std::vector<std::string> errors;
    std::mutex mu;
  };

  std::vector<std::unique_ptr<Cell>> cells;
  for (int density : densities) {
    for (const std::string& mobility : mobilities) {
      parse_speed_class(mobility);  // fail fast on typos
      for (const std::string& model : models) {
        parse_model(model);
        auto cell = std::make_unique<Cell>();
        cell->density = density;
        cell->mobility = mobility;
        cell->model = model;
        cells.push_back(std::move(cell));
      }
    }
  }
  std::vector<RunSpec> specs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int s = 0; s < opts.seeds; ++s) {
      specs.push_back({c, opts.seed_base + static_cast<std::uint64_t>(s)});
    }
  }

  run_parallel(
      specs.size(),
      [&](std::size_t k) {
        const RunSpec& spec = specs[k];
        Cell& cell = *cells[spec.cell];
        try {
          json doc = base_doc;
          doc["scene"]["device_count"] = cell.density;
          doc["scene"]["speed_class"] = cell.mobility;
          doc["simulation"]["model"] = cell.model;
          doc["simulation"]["seed"] = spec.seed;
          if (opts.common.episodes) {
            doc["simulation"]["episodes"] = *opts.common.episodes;
          }
          Simulation sim(config_from_json(doc));
          auto metrics = sim.run_collect();
          std::lock_guard<std::mutex> lock(cell.mu);
          cell.runs.push_back(std::move(metrics));
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(cell.mu);
          cell.errors.push_back("density=" + std::to_string(cell.density) +
                                " mobility=" + cell.mobility + " model=" +
                                cell.model + " seed=" +
                                std::to_string(spec.seed) + ": " + e.what());
        }
      },
      opts.jobs);

  std::vector<SweepCell> rows;
  std::vector<std::string> errors;
  for (const auto& cell : cells) {
    for (const std::string& e : cell->errors) errors.push_back(e);
    if (cell->runs.empty()) continue;
    const int window = summary_window(static_cast<int>(cell->runs[0].size()));
    const WindowStats stats = aggregate_runs(cell->runs, window);
    rows.push_back({cell->density, cell->mobility, cell->model,
                    stats.mean_coverage, stats.std_coverage,
                    static_cast<int>(cell->runs.size())});
  }
  std::sort(rows.begin(), rows.end(), [](const SweepCell& a, const SweepCell& b) {
    return std::tie(a.density, a.mobility, a.model) <
           std::tie(b.density, b.mobility, b.model);
  });

  fs::create_directories(opts.common.output_dir);
  const fs::path csv = fs::path(opts.common.output_dir) / "sweep.csv";
  write_sweep_csv(csv.string(), rows);
  json jcells = json::array();
  for (const SweepCell& r : rows) {
    jcells.push_back({{"density", r.density},
                      {"mobility", r.mobility},
                      {"model", r.model},
                      {"mean_coverage", r.mean_coverage},
                      {"std_coverage", r.std_coverage},
                      {"seed_count", r.seed_count}});
  }
  const fs::path jpath = fs::path(opts.common.output_dir) / "sweep.json";
  std::ofstream jout(jpath, std::ios::binary);
  jout << json{{"cells", jcells}}.dump(2) << '\n';

  std::cout << "wrote " << csv.string() << " (" << rows.size() << " cells)\n";
  if (!errors.empty()) {
    std::cerr << errors.size() << " run(s) failed:\n";
    for (const std::string& e : errors) std::cerr << "  " << e << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct FigOpts {
  CommonOpts common;
  std::string figure;
  int seeds = 20;
  std::uint64_t seed_base = 1;
  unsigned jobs = default_jobs();
};

// Seed-averaged episode traces for one model.
std::vector<EpisodeMetrics> averaged_trace(const json& base_doc,
                                           const std::string& model,
                                           int episodes, int seeds,
                                           std::uint64_t seed_base,
                                           unsigned jobs) {
  std::vector<std::vector<EpisodeMetrics>> runs(seeds);
  run_parallel(
      seeds,
      [&](std::size_t s) {
        json doc = base_doc;
        doc["simulation"]["model"] = model;
        doc["simulation"]["seed"] = seed_base + s;
        doc["simulation"]["episodes"] = episodes;
        Simulation sim(config_from_json(doc));
        runs[s] = sim.run_collect();
      },
      jobs);
  std::vector<EpisodeMetrics> avg(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeMetrics& m = avg[ep];
    m.episode = ep;
    for (int s = 0; s < seeds; ++s) {
      const EpisodeMetrics& r = runs[s][ep];
      m.coverage += r.coverage;
      m.total_reward += r.total_reward;
      m.mean_reward_per_agent += r.mean_reward_per_agent;
      m.layer1_count += r.layer1_count;
      m.layer2_count += r.layer2_count;
      m.link_count += r.link_count;
      m.epsilon = r.epsilon;
    }
    m.coverage /= seeds;
    m.total_reward /= seeds;
    m.mean_reward_per_agent /= seeds;
  }
  return avg;
}

int cmd_figdata(const FigOpts& opts) {
  const json base_doc = load_config_doc(opts.common);
  fs::create_directories(opts.common.output_dir);
  const SimConfig base_cfg = config_from_json(base_doc);
  const int episodes = opts.common.episodes.value_or(base_cfg.episodes);

  const fs::path out_path =
      fs::path(opts.common.output_dir) / (opts.figure + ".csv");
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + out_path.string());
  }

  if (opts.figure == "fig1") {
    // Minimum beamwidth to reach the target spectral efficiency, over the
    // table band, at 60% humidity, for 1/2/3 m links.
    LinkBudgetParams params = base_cfg.radio.params;
    params.relative_humidity = 0.6;
    const double bandwidth = base_cfg.radio.total_bandwidth_hz /
                             base_cfg.scene.device_count;
    out << "frequency_hz,distance_m,min_beamwidth_deg\n";
    const double f_lo = params.absorption.min_frequency_hz();
    const double f_hi = params.absorption.max_frequency_hz();
    const int samples = 200;
    for (int k = 0; k <= samples; ++k) {
      const double f = f_lo + (f_hi - f_lo) * k / samples;
      params.carrier_frequency_hz = f;
      for (double d : {1.0, 2.0, 3.0}) {
        const auto bw = min_beamwidth_deg(params, bandwidth, d,
                                          base_cfg.radio.target_se_bps_per_hz);
        out << format_g6(f) << ',' << format_g6(d) << ','
            << (bw ? format_g6(*bw) : "inf") << '\n';
      }
    }
  } else if (opts.figure == "fig4") {
    out << "model,episode,coverage\n";
    for (const char* model : {"central", "model1", "model2", "no_d2d"}) {
      const auto avg = averaged_trace(base_doc, model, episodes, opts.seeds,
                                      opts.seed_base, opts.jobs);
      for (const EpisodeMetrics& m : avg) {
        out << model << ',' << m.episode << ',' << format_g6(m.coverage)
            << '\n';
      }
    }
  } else if (opts.figure == "fig5") {
    out << "model,episode,total_reward,mean_reward\n";
    for (const char* model : {"model1", "model2"}) {
      const auto avg = averaged_trace(base_doc, model, episodes, opts.seeds,
                                      opts.seed_base, opts.jobs);
      for (const EpisodeMetrics& m : avg) {
        out << model << ',' << m.episode << ',' << format_g6(m.total_reward)
            << ',' << format_g6(m.mean_reward_per_agent) << '\n';
      }
    }
  } else if (opts.figure == "fig6") {
    out << "density,layer1_mean,layer2_mean\n";
    for (int density : {10, 20, 40, 80}) {
      json doc = base_doc;
      doc["scene"]["device_count"] = density;
      const auto avg = averaged_trace(doc, "no_d2d", episodes, opts.seeds,
                                      opts.seed_base, opts.jobs);
      double l1 = 0.0;
      double l2 = 0.0;
      for (const EpisodeMetrics& m : avg) {
        l1 += m.layer1_count;
        l2 += m.layer2_count;
      }
      // layer counts were seed-summed by averaged_trace
      const double scale = 1.0 / (episodes * static_cast<double>(opts.seeds));
      out << density << ',' << format_g6(l1 * scale) << ','
          << format_g6(l2 * scale) << '\n';
    }
  } else if (opts.figure == "fig7") {
    const std::string model =
        opts.common.model.value_or(std::string("model2"));
    out << "density,mobility,mean_coverage,std_coverage,seed_count\n";
    for (int density : {10, 20, 40, 80}) {
      for (const char* mobility : {"static", "slow", "fast"}) {
        std::vector<std::vector<EpisodeMetrics>> runs(opts.seeds);
        run_parallel(
            opts.seeds,
            [&](std::size_t s) {
              json doc = base_doc;
              doc["scene"]["device_count"] = density;
              doc["scene"]["speed_class"] = mobility;
              doc["simulation"]["model"] = model;
              doc["simulation"]["seed"] = opts.seed_base + s;
              doc["simulation"]["episodes"] = episodes;
              Simulation sim(config_from_json(doc));
              runs[s] = sim.run_collect();
            },
            opts.jobs);
        const WindowStats stats =
            aggregate_runs(runs, summary_window(episodes));
        out << density << ',' << mobility << ','
            << format_g6(stats.mean_coverage) << ','
            << format_g6(stats.std_coverage) << ',' << opts.seeds << '\n';
      }
    }
  } else {
    std::cerr << "unknown figure id: " << opts.figure
              << " (valid: fig1 fig4 fig5 fig6 fig7)\n";
    return kExitUsage;
  }
  if (!out) {
    throw std::runtime_error("write failed: " + out_path.string());
  }
  std::cout << "wrote " << out_path.string() << '\n';
  return kExitOk;
}

struct CalibrateOpts {
  CommonOpts common;
  std::optional<double> target_range;
  std::string write_path;
};

int cmd_calibrate(const CalibrateOpts& opts) {
  const SimConfig cfg = resolve_config(opts.common);
  const double bandwidth =
      cfg.radio.total_bandwidth_hz / cfg.scene.device_count;
  const double target = opts.target_range.value_or(cfg.radio.d0_m);

  const AbsorptionTable calibrated =
      calibrate_absorption(cfg.radio.params, bandwidth,
                           cfg.radio.target_se_bps_per_hz, target);
  LinkBudgetParams params = cfg.radio.params;
  params.absorption = calibrated;
  const double anchor =
      calibrated.coefficient(params.carrier_frequency_hz);
  const auto range =
      max_range_m(params, bandwidth, cfg.radio.target_se_bps_per_hz);

  std::cout << "anchor K(" << format_g6(params.carrier_frequency_hz)
            << " Hz) = " << format_g6(anchor) << " 1/m\n";
  std::cout << "max_range = " << (range ? format_g6(*range) : "inf") << " m"
            << " (target " << format_g6(target) << " m)\n";
  std::cout << "absorption at target range = "
            << format_g6(absorption_loss_db(params, target)) << " dB\n";
  if (!opts.write_path.empty()) {
    calibrated.save(opts.write_path);
    std::cout << "wrote " << opts.write_path << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2-layered D2D THz indoor coverage simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one simulation config");
  add_common(run, run_opts);
  run->add_option("--model", run_opts.model,
                  "Model override: model1|model2|central|no_d2d");
  run->add_option("--episodes", run_opts.episodes, "Episode count override");

  SweepOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Density x mobility x model grid, aggregated over seeds");
  add_common(sweep, sweep_opts.common);
  sweep->add_option("--episodes", sweep_opts.common.episodes,
                    "Episode count override");
  sweep->add_option("--densities", sweep_opts.densities,
                    "Comma-separated device counts");
  sweep->add_option("--mobilities", sweep_opts.mobilities,
                    "Comma-separated speed classes");
  sweep->add_option("--models", sweep_opts.models, "Comma-separated models");
  sweep->add_option("--seeds", sweep_opts.seeds, "Seeds per cell");
  sweep->add_option("--seed-base", sweep_opts.seed_base, "First seed value");
  sweep->add_option("--jobs", sweep_opts.jobs, "Parallel runs");

  FigOpts fig_opts;
  CLI::App* figdata =
      app.add_subcommand("figdata", "Emit the dataset behind one figure");
  figdata->add_option("figure", fig_opts.figure, "fig1|fig4|fig5|fig6|fig7")
      ->required();
  add_common(figdata, fig_opts.common);
  figdata->add_option("--model", fig_opts.common.model,
                      "Model for fig7 (default model2)");
  figdata->add_option("--episodes", fig_opts.common.episodes,
                      "Episode count override");
  figdata->add_option("--seeds", fig_opts.seeds, "Seeds to average");
  figdata->add_option("--seed-base", fig_opts.seed_base, "First seed value");
  figdata->add_option("--jobs", fig_opts.jobs, "Parallel runs");

  CalibrateOpts cal_opts;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Solve the absorption anchor for the target range");
  add_common(calibrate, cal_opts.common);
  calibrate->add_option("--target-range", cal_opts.target_range,
                        "Range to calibrate to (default radio.d0_m)");
  calibrate->add_option("--write", cal_opts.write_path,
                        "Write the calibrated table to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (figdata->parsed()) return cmd_figdata(fig_opts);
    if (calibrate->parsed()) return cmd_calibrate(cal_opts);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
