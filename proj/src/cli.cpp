#include "tpaug/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "tpaug/augment.hpp"
#include "tpaug/dataset.hpp"
#include "tpaug/errors.hpp"
#include "tpaug/metrics.hpp"
#include "tpaug/simulate.hpp"
#include "tpaug/tpgmm.hpp"

namespace tpaug {
namespace {

// Verbosity comes from TPAUG_LOG (trace, debug, info, warn, error, off).
std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::get("tpaug");
  if (!logger) logger = spdlog::stderr_logger_st("tpaug");
  logger->set_pattern("[%l] %v");
  const char* level = std::getenv("TPAUG_LOG");
  logger->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  return logger;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse " + what + " entry '" + item + "'");
    }
  }
  return out;
}

// "a:b:n" is a uniform grid; anything else names a file with one time per
// line (or comma-separated).
Eigen::VectorXd parse_time_grid(const std::string& spec) {
  const auto first = spec.find(':');
  if (first != std::string::npos && !std::filesystem::exists(spec)) {
    const auto second = spec.find(':', first + 1);
    if (second == std::string::npos) throw ArgumentError("time grid must be start:stop:count");
    const auto lo = parse_numbers(spec.substr(0, first), "time grid");
    const auto hi = parse_numbers(spec.substr(first + 1, second - first - 1), "time grid");
    const auto n = parse_numbers(spec.substr(second + 1), "time grid");
    if (lo.size() != 1 || hi.size() != 1 || n.size() != 1 || n[0] < 1 || n[0] != std::floor(n[0])) {
      throw ArgumentError("time grid must be start:stop:count");
    }
    return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n[0]), lo[0], hi[0]);
  }
  std::string text = read_file(spec);
  for (char& c : text) {
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') c = ',';
  }
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParseError(spec, "not a number: '" + item + "'");
    }
  }
  if (values.empty()) throw ParseError(spec, "empty time grid");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string format_report(const CostReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "cost," << to_string(report.kind);
  if (report.kind == CostKind::Dtw) out << ',' << kDtwVariant;
  out << "\n";
  out << "demo,value\n";
  for (std::size_t i = 0; i < report.per_demo.size(); ++i) out << i << ',' << report.per_demo[i] << "\n";
  out << "mean," << report.mean << "\n";
  return out.str();
}

std::vector<FrameLimits> no_limits() { return {}; }

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger();
  CLI::App app{"Task-parameterized GMM learning with synthetic demonstration augmentation", "tpaug"};
  app.require_subcommand(1);
  std::function<void()> action;

  // train
  std::string data_path, model_path, mode_text;
  int components = 8;
  std::uint64_t seed = 0;
  auto* train = app.add_subcommand("train", "Fit a TP-GMM to a dataset");
  train->add_option("--data", data_path, "Dataset file")->required();
  train->add_option("--components", components, "Number of Gaussian components K")->required();
  train->add_option("--mode", mode_text, "time|trajectory (must match the dataset)")->required();
  train->add_option("--seed", seed, "Seed for the EM initialization");
  train->add_option("--out", model_path, "Model output file")->required();
  train->callback([&] {
    action = [&] {
      const DatasetFile data = load_dataset(data_path);
      const Mode mode = mode_from_string(mode_text);
      if (mode != data.mode) throw ArgumentError("--mode does not match the dataset mode");
      EmConfig em = default_em_config(mode);
      em.seed = derive_seed(seed, 0);
      const TpGmm model = fit(data.demos, components, em);
      save(model, model_path);
      log->info("trained {} components on {} demonstrations", components, data.demos.size());
    };
  });

  // augment
  std::string validation_path, method_text = "rf", selection_text = "original", log_path;
  int max_demos = 8, max_iters = 50;
  double snr_db = 30.0, expansion = kDefaultLimitExpansion;
  auto* aug = app.add_subcommand("augment", "Improve a TP-GMM with synthetic demonstrations");
  aug->add_option("--data", data_path, "Expert dataset")->required();
  aug->add_option("--validation", validation_path, "Validation dataset (generalization selection)");
  aug->add_option("--method", method_text, "noise|rf|rf-noise");
  aug->add_option("--max-demos", max_demos, "Maximum training-set size M");
  aug->add_option("--max-iters", max_iters, "Maximum iterations L");
  aug->add_option("--snr-db", snr_db, "Noise SNR in decibels");
  aug->add_option("--selection", selection_text, "original|generalization");
  aug->add_option("--components", components, "Number of Gaussian components K");
  aug->add_option("--seed", seed, "Run seed");
  aug->add_option("--expansion", expansion, "Widening of observed frame limits");
  aug->add_option("--out", model_path, "Model output file")->required();
  aug->add_option("--log", log_path, "Run log output file (JSON lines)")->required();
  aug->callback([&] {
    action = [&] {
      const DatasetFile data = load_dataset(data_path);
      std::vector<Demonstration> validation;
      if (!validation_path.empty()) {
        DatasetFile v = load_dataset(validation_path);
        if (v.mode != data.mode || v.p != data.p || v.n_frames != data.n_frames) {
          throw ArgumentError("validation dataset does not match the training dataset layout");
        }
        validation = std::move(v.demos);
      }
      AugmentConfig cfg;
      cfg.method = method_from_string(method_text);
      cfg.selection = selection_from_string(selection_text);
      cfg.max_demos = max_demos;
      cfg.max_iters = max_iters;
      cfg.snr_db = snr_db;
      cfg.components = components;
      cfg.seed = seed;
      cfg.limit_expansion = expansion;
      cfg.limits = no_limits();
      cfg.em = default_em_config(data.mode);
      cfg.em.seed = derive_seed(seed, 0);
      const AugmentResult res = run_augmentation(data.demos, validation, cfg);
      save(res.model, model_path);
      save(res.log, log_path);
      log->info("cost {} -> {} with {} demonstrations ({} discarded)", res.log.initial_cost,
                res.log.final_cost, res.dataset.size(), res.log.discarded_count);
    };
  });

  // reproduce
  std::string situation_path, times_spec, start_text, traj_path;
  int steps = 0;
  auto* rep = app.add_subcommand("reproduce", "Generate a motion for a situation");
  rep->add_option("--model", model_path, "Model file")->required();
  rep->add_option("--situation", situation_path, "Situation file")->required();
  auto* times_opt = rep->add_option("--times", times_spec, "Time grid start:stop:count or file");
  auto* start_opt = rep->add_option("--start", start_text, "Start position x,y[,z]");
  auto* steps_opt = rep->add_option("--steps", steps, "Integration steps");
  times_opt->excludes(start_opt)->excludes(steps_opt);
  rep->add_option("--out", traj_path, "Trajectory CSV output")->required();
  rep->callback([&] {
    action = [&] {
      const TpGmm model = load_model(model_path);
      const Situation sit = load_situation(situation_path);
      Eigen::MatrixXd traj;
      std::vector<std::string> header;
      if (model.mode == Mode::TimeBased) {
        if (times_spec.empty()) throw ArgumentError("time-based models need --times");
        const Eigen::VectorXd times = parse_time_grid(times_spec);
        const Eigen::MatrixXd pos = reproduce_time_based(model, sit, times);
        traj.resize(pos.rows(), pos.cols() + 1);
        traj << times, pos;
        header = {"t", "x", "y"};
      } else {
        if (start_text.empty() || steps < 1) {
          throw ArgumentError("trajectory-based models need --start and --steps >= 1");
        }
        const auto start = parse_numbers(start_text, "--start");
        traj = reproduce_trajectory_based(
            model, sit, Eigen::Map<const Eigen::VectorXd>(start.data(), static_cast<Eigen::Index>(start.size())),
            steps);
        header = {"x", "y"};
      }
      if (model.position_dim() == 3) header.push_back("z");
      write_file_atomic(traj_path, to_csv(traj, header));
    };
  });

  // eval
  std::string cost_text;
  auto* ev = app.add_subcommand("eval", "Reproduction cost of a model on a dataset");
  ev->add_option("--model", model_path, "Model file")->required();
  ev->add_option("--data", data_path, "Dataset file")->required();
  ev->add_option("--cost", cost_text, "rms|dtw (default: by model mode)");
  ev->callback([&] {
    action = [&] {
      const TpGmm model = load_model(model_path);
      const DatasetFile data = load_dataset(data_path);
      if (data.mode != model.mode) throw ArgumentError("dataset mode does not match the model");
      CostKind kind = model.mode == Mode::TimeBased ? CostKind::Rms : CostKind::Dtw;
      if (!cost_text.empty()) kind = cost_kind_from_string(cost_text);
      std::vector<Eigen::MatrixXd> repros, targets;
      for (const auto& d : data.demos) {
        repros.push_back(reproduce_like(model, d));
        targets.push_back(d.positions());
      }
      out << format_report(cost(kind, repros, targets));
    };
  });

  // simulate
  SimulationConfig sim;
  std::string sim_methods = "all", sim_selections = "all", out_dir;
  auto* simc = app.add_subcommand("simulate", "Seeded batch experiment on the scripted 2D task");
  simc->add_option("--runs", sim.runs, "Runs per method and selection");
  simc->add_option("--method", sim_methods, "noise|rf|rf-noise|all");
  simc->add_option("--selection", sim_selections, "original|generalization|all");
  simc->add_option("--seed", sim.seed, "Master seed");
  simc->add_option("--samples", sim.samples_per_demo, "Samples per demonstration");
  simc->add_option("--components", sim.components, "Number of Gaussian components K");
  simc->add_option("--max-demos", sim.max_demos, "Maximum training-set size M");
  simc->add_option("--max-iters", sim.max_iters, "Maximum iterations L");
  simc->add_option("--snr-db", sim.snr_db, "Noise SNR in decibels");
  simc->add_option("--out", out_dir, "Output directory")->required();
  simc->callback([&] {
    action = [&] {
      if (sim_methods != "all") sim.methods = {method_from_string(sim_methods)};
      if (sim_selections != "all") sim.selections = {selection_from_string(sim_selections)};
      const SimulationResult result = run_simulation(sim);
      write_simulation(result, out_dir);
      out << format_cost_table(result);
    };
  });

  // gen2d / gen3d
  int situations = 6, samples = 100;
  std::string gen_out;
  auto* g2 = app.add_subcommand("gen2d", "Generate the scripted 2D start-to-goal dataset");
  auto* g3 = app.add_subcommand("gen3d", "Generate the scripted 3D trajectory-mode dataset");
  for (auto* g : {g2, g3}) {
    g->add_option("--situations", situations, "Number of situations")->required();
    g->add_option("--samples", samples, "Samples per demonstration");
    g->add_option("--seed", seed, "Generator seed");
    g->add_option("--out", gen_out, "Dataset output file")->required();
  }
  g2->callback([&] { action = [&] { save(generate_2d_task(situations, samples, seed), gen_out); }; });
  g3->callback([&] { action = [&] { save(generate_3d_task(situations, samples, seed), gen_out); }; });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tpaug: error: " << e.what() << "\n";
    return kExitArgument;
  }

  try {
    action();
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "tpaug: argument error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const DataError& e) {
    err << "tpaug: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "tpaug: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace tpaug
