#pragma once

// Iterative dataset augmentation: synthesize a candidate demonstration,
// retrain on the aggregated set, keep it only if the expert reproduction
// cost strictly drops.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tpaug/frames.hpp"
#include "tpaug/gmm.hpp"
#include "tpaug/metrics.hpp"
#include "tpaug/tpgmm.hpp"

namespace tpaug {

enum class Method { Noise, Rf, RfNoise };
enum class Selection { Original, Generalization };

std::string_view to_string(Method method);
std::string_view to_string(Selection selection);
/// Accepts "noise", "rf", "rf-noise" (also "rf_noise").
Method method_from_string(std::string_view text);
Selection selection_from_string(std::string_view text);

struct AugmentConfig {
  Method method = Method::Rf;
  int max_demos = 8;   // M, total demonstrations in the training set
  int max_iters = 50;  // L
  double snr_db = 30.0;
  Selection selection = Selection::Original;
  int components = 8;  // K
  std::uint64_t seed = 0;
  /// One entry per frame index. Empty: derived from the training
  /// situations with `limit_expansion`.
  std::vector<FrameLimits> limits;
  double limit_expansion = kDefaultLimitExpansion;
  /// EM settings. The initial fit uses them as given; every retrain
  /// replaces the seed with derive_seed(seed, iter + 1).
  EmConfig em;
};

struct IterationRecord {
  int iter = 0;
  Method method = Method::Rf;
  bool accepted = false;
  double cost_before = 0.0;
  double cost_after = 0.0;  // +inf when the candidate could not be fitted
  int n_demos = 0;          // training-set size after this iteration

  bool operator==(const IterationRecord&) const = default;
};

struct RunLog {
  CostKind cost_kind = CostKind::Rms;
  int initial_demos = 0;
  double initial_cost = 0.0;
  std::vector<IterationRecord> iterations;
  double final_cost = 0.0;
  int discarded_count = 0;

  bool operator==(const RunLog&) const = default;
};

struct AugmentResult {
  TpGmm model;
  std::vector<Demonstration> dataset;  // experts first, then accepted synthetic demos
  RunLog log;
};

/// SplitMix64 mix of (base, stream); used for per-fit and per-run seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Default EM settings per mode: time-binning init for time-based data,
/// k-means for trajectory-based data.
EmConfig default_em_config(Mode mode);

/// Adds i.i.d. zero-mean Gaussian noise per element. Column j receives
/// variance (centered mean square of column j) / 10^(snr_db/10).
Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& traj, double snr_db, Rng& rng);

/// One synthetic demonstration.
///
/// Noise: uniformly chosen expert, positions perturbed, same situation.
/// Rf: one frame per index sampled from `limits`, then a uniformly chosen
///     expert supplies the time grid / start point for the reproduction.
/// RfNoise: Rf followed by position noise.
/// Random draws happen in that order, so a replay with the same seed
/// reproduces the candidate exactly.
Demonstration synthesize(Method method, std::span<const Demonstration> experts, const TpGmm& model,
                         std::span<const FrameLimits> limits, double snr_db, Rng& rng);

/// Reproduction cost of `model` against `experts` (RMS for time-based
/// models, DTW for trajectory-based ones).
CostReport selection_cost(const TpGmm& model, std::span<const Demonstration> experts);

/// Runs the augmentation loop. `validation` is required (non-empty) for
/// Selection::Generalization and ignored otherwise.
AugmentResult run_augmentation(std::span<const Demonstration> init_demos,
                               std::span<const Demonstration> validation,
                               const AugmentConfig& cfg);

}  // namespace tpaug
