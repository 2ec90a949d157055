#pragma once

// Seeded batch experiment on the scripted 2D task: initial model from the
// training split, repeated augmentation runs per (method, selection), and
// costs of the best run on the training and validation splits.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tpaug/augment.hpp"
#include "tpaug/dataset.hpp"

namespace tpaug {

struct SimulationConfig {
  int runs = 20;
  std::vector<Method> methods{Method::Noise, Method::Rf, Method::RfNoise};
  std::vector<Selection> selections{Selection::Original, Selection::Generalization};
  std::uint64_t seed = 0;
  int train_situations = 3;
  int validation_situations = 3;
  int samples_per_demo = 100;
  int components = 8;
  int max_demos = 8;
  int max_iters = 50;
  double snr_db = 30.0;
};

struct RunOutcome {
  double train_cost = 0.0;
  double validation_cost = 0.0;
  int accepted = 0;
  RunLog log;
};

struct SimulationRow {
  Method method = Method::Rf;
  Selection selection = Selection::Original;
  std::vector<RunOutcome> runs;
  std::size_t best_run = 0;  // lowest final selection cost, first on ties
  TpGmm best_model;
};

struct SimulationResult {
  SimulationConfig config;
  DatasetFile train;
  DatasetFile validation;
  TpGmm initial_model;
  double initial_train_cost = 0.0;
  double initial_validation_cost = 0.0;
  std::vector<SimulationRow> rows;
};

SimulationResult run_simulation(const SimulationConfig& cfg);

/// CSV cost table: one row per (method, selection) plus the initial model.
std::string format_cost_table(const SimulationResult& result);
/// CSV of every run's costs.
std::string format_run_table(const SimulationResult& result);
/// CSV of expert and reproduced trajectories (initial and best models).
std::string format_trajectories(const SimulationResult& result);
/// Static SVG with one panel per situation.
std::string render_svg(const SimulationResult& result);

/// Writes cost_table.csv, runs.csv, trajectories.csv and reproductions.svg.
void write_simulation(const SimulationResult& result, const std::filesystem::path& dir);

double median(std::vector<double> values);

}  // namespace tpaug
