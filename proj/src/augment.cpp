#include "tpaug/augment.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tpaug/errors.hpp"

namespace tpaug {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Noise:
      return "noise";
    case Method::Rf:
      return "rf";
    case Method::RfNoise:
      return "rf-noise";
  }
  return "?";
}

std::string_view to_string(Selection selection) {
  return selection == Selection::Original ? "original" : "generalization";
}

Method method_from_string(std::string_view text) {
  if (text == "noise") return Method::Noise;
  if (text == "rf") return Method::Rf;
  if (text == "rf-noise" || text == "rf_noise") return Method::RfNoise;
  throw ArgumentError("unknown method '" + std::string(text) + "' (expected noise|rf|rf-noise)");
}

Selection selection_from_string(std::string_view text) {
  if (text == "original") return Selection::Original;
  if (text == "generalization") return Selection::Generalization;
  throw ArgumentError("unknown selection '" + std::string(text) +
                      "' (expected original|generalization)");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EmConfig default_em_config(Mode mode) {
  EmConfig cfg;
  cfg.init = mode == Mode::TimeBased ? InitMethod::TimeBinning : InitMethod::KMeans;
  return cfg;
}

Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& traj, double snr_db, Rng& rng) {
  if (traj.rows() < 1) throw ArgumentError("inject_noise needs at least one sample");
  if (!std::isfinite(snr_db)) throw ArgumentError("snr_db must be finite");
  const double ratio = std::pow(10.0, snr_db / 10.0);
  Eigen::MatrixXd out = traj;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < traj.cols(); ++j) {
    const auto col = traj.col(j).array();
    const double power = (col - col.mean()).square().mean();
    const double sigma = std::sqrt(power / ratio);
    for (Eigen::Index i = 0; i < traj.rows(); ++i) out(i, j) += sigma * normal(rng);
  }
  return out;
}

namespace {

std::size_t pick_index(std::size_t count, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

Demonstration with_positions(const Demonstration& like, Eigen::MatrixXd positions,
                             const Situation& situation) {
  if (like.mode() == Mode::TimeBased) {
    return Demonstration(Mode::TimeBased, like.inputs(), std::move(positions), situation);
  }
  return Demonstration::trajectory_based(positions, situation);
}

}  // namespace

Demonstration synthesize(Method method, std::span<const Demonstration> experts, const TpGmm& model,
                         std::span<const FrameLimits> limits, double snr_db, Rng& rng) {
  if (experts.empty()) throw ArgumentError("synthesize needs at least one expert demonstration");
  if (method == Method::Noise) {
    const auto& src = experts[pick_index(experts.size(), rng)];
    return with_positions(src, inject_noise(src.positions(), snr_db, rng), src.situation());
  }

  if (static_cast<int>(limits.size()) != model.frames()) {
    throw ArgumentError("need one frame-limit entry per model frame");
  }
  std::vector<Frame> frames;
  frames.reserve(limits.size());
  for (const auto& lim : limits) frames.push_back(sample_frame(lim, rng));
  const Situation situation(std::move(frames));
  const auto& like = experts[pick_index(experts.size(), rng)];

  Eigen::MatrixXd positions;
  if (model.mode == Mode::TimeBased) {
    positions = reproduce_time_based(model, situation, like.inputs().col(0));
  } else {
    // The start keeps its pose relative to the first frame.
    const Eigen::VectorXd start =
        to_global(situation[0], to_local(like.situation()[0], like.inputs().row(0).transpose()));
    positions = reproduce_trajectory_based(model, situation, start, like.samples() - 1);
  }
  if (method == Method::RfNoise) positions = inject_noise(positions, snr_db, rng);
  return with_positions(like, std::move(positions), situation);
}

CostReport selection_cost(const TpGmm& model, std::span<const Demonstration> experts) {
  std::vector<Eigen::MatrixXd> repros;
  std::vector<Eigen::MatrixXd> targets;
  repros.reserve(experts.size());
  targets.reserve(experts.size());
  for (const auto& demo : experts) {
    repros.push_back(reproduce_like(model, demo));
    targets.push_back(demo.positions());
  }
  const CostKind kind = model.mode == Mode::TimeBased ? CostKind::Rms : CostKind::Dtw;
  return cost(kind, repros, targets);
}

AugmentResult run_augmentation(std::span<const Demonstration> init_demos,
                               std::span<const Demonstration> validation,
                               const AugmentConfig& cfg) {
  const int mu = static_cast<int>(init_demos.size());
  if (mu < 2) throw ArgumentError("augmentation needs at least 2 initial demonstrations");
  if (cfg.max_demos <= mu) throw ArgumentError("max_demos must exceed the initial demonstration count");
  if (cfg.max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!std::isfinite(cfg.snr_db)) throw ArgumentError("snr_db must be finite");
  if (cfg.components < 1) throw ArgumentError("components must be >= 1");
  if (cfg.selection == Selection::Generalization && validation.empty()) {
    throw ArgumentError("generalization selection requires validation demonstrations");
  }
  const auto scored = cfg.selection == Selection::Original ? init_demos : validation;

  std::vector<FrameLimits> limits = cfg.limits;
  if (limits.empty() && cfg.method != Method::Noise) {
    std::vector<Situation> situations;
    for (const auto& d : init_demos) situations.push_back(d.situation());
    limits = limits_from_situations(situations, cfg.limit_expansion);
  }

  auto fit_with_seed = [&](std::span<const Demonstration> demos, std::uint64_t stream) {
    EmConfig em = cfg.em;
    em.seed = derive_seed(cfg.seed, stream);
    return fit(demos, cfg.components, em);
  };

  AugmentResult result;
  result.dataset.assign(init_demos.begin(), init_demos.end());
  // The initial model is the plain fit under cfg.em, identical to a direct `fit` call.
  result.model = fit(result.dataset, cfg.components, cfg.em);
  double current = selection_cost(result.model, scored).mean;

  RunLog& log = result.log;
  log.cost_kind = result.model.mode == Mode::TimeBased ? CostKind::Rms : CostKind::Dtw;
  log.initial_demos = mu;
  log.initial_cost = current;

  Rng rng(derive_seed(cfg.seed, 0x5EEDULL << 32));
  int n_demos = mu;
  for (int iter = 0; n_demos < cfg.max_demos && iter < cfg.max_iters; ++iter) {
    IterationRecord rec;
    rec.iter = iter;
    rec.method = cfg.method;
    rec.cost_before = current;
    rec.cost_after = std::numeric_limits<double>::infinity();

    std::optional<TpGmm> candidate_model;
    std::vector<Demonstration> candidate_set = result.dataset;
    try {
      candidate_set.push_back(
          synthesize(cfg.method, init_demos, result.model, limits, cfg.snr_db, rng));
      candidate_model = fit_with_seed(candidate_set, static_cast<std::uint64_t>(iter) + 1);
      rec.cost_after = selection_cost(*candidate_model, scored).mean;
    } catch (const NumericError&) {
      candidate_model.reset();
    }

    if (candidate_model && rec.cost_after < current) {
      rec.accepted = true;
      current = rec.cost_after;
      result.model = std::move(*candidate_model);
      result.dataset = std::move(candidate_set);
      ++n_demos;
    } else {
      ++log.discarded_count;
    }
    rec.n_demos = n_demos;
    log.iterations.push_back(rec);
  }
  log.final_cost = current;
  return result;
}

}  // namespace tpaug
