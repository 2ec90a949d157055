#include "tpaug/tpgmm.hpp"

#include <cmath>
#include <string>

#include "tpaug/errors.hpp"

namespace tpaug {

std::string_view to_string(Mode mode) {
  return mode == Mode::TimeBased ? "time" : "trajectory";
}

Mode mode_from_string(std::string_view text) {
  if (text == "time") return Mode::TimeBased;
  if (text == "trajectory") return Mode::TrajectoryBased;
  throw ArgumentError("unknown mode '" + std::string(text) + "' (expected time|trajectory)");
}

AugmentedFrame augment(Mode mode, const Frame& frame) {
  return mode == Mode::TimeBased ? AugmentedFrame::time_based(frame)
                                 : AugmentedFrame::trajectory_based(frame);
}

Eigen::MatrixXd displacements(const Eigen::MatrixXd& positions) {
  const auto t = positions.rows();
  if (t < 2) throw ArgumentError("displacements need at least two samples");
  Eigen::MatrixXd d(t, positions.cols());
  d.topRows(t - 1) = positions.bottomRows(t - 1) - positions.topRows(t - 1);
  d.row(t - 1) = d.row(t - 2);
  return d;
}

Demonstration::Demonstration(Mode mode, Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
                             Situation situation)
    : mode_(mode),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      situation_(std::move(situation)) {
  if (situation_.size() == 0) throw ArgumentError("demonstration has no frames");
  const auto p = situation_.dim();
  const auto t = inputs_.rows();
  if (t < 2) throw ArgumentError("demonstration needs at least 2 samples");
  if (outputs_.rows() != t) throw DimensionError("inputs and outputs have different sample counts");
  if (!inputs_.allFinite() || !outputs_.allFinite()) {
    throw NumericError("demonstration contains non-finite values");
  }
  if (mode_ == Mode::TimeBased) {
    if (inputs_.cols() != 1 || outputs_.cols() != p) {
      throw DimensionError("time-based demonstration must be T x 1 inputs and T x p outputs");
    }
  } else {
    if (inputs_.cols() != p || outputs_.cols() != p) {
      throw DimensionError("trajectory-based demonstration must be T x p inputs and outputs");
    }
    if ((displacements(inputs_) - outputs_).cwiseAbs().maxCoeff() > 1e-9) {
      throw ArgumentError("trajectory-based outputs must be forward differences of inputs");
    }
  }
}

Demonstration Demonstration::time_based(const Eigen::VectorXd& times, Eigen::MatrixXd positions,
                                        Situation situation) {
  return Demonstration(Mode::TimeBased, Eigen::MatrixXd(times), std::move(positions),
                       std::move(situation));
}

Demonstration Demonstration::trajectory_based(const Eigen::MatrixXd& positions,
                                              Situation situation) {
  return Demonstration(Mode::TrajectoryBased, positions, displacements(positions),
                       std::move(situation));
}

Eigen::MatrixXd Demonstration::joint() const {
  Eigen::MatrixXd j(inputs_.rows(), inputs_.cols() + outputs_.cols());
  j << inputs_, outputs_;
  return j;
}

bool Demonstration::operator==(const Demonstration& o) const {
  return mode_ == o.mode_ && inputs_.rows() == o.inputs_.rows() &&
         inputs_.cols() == o.inputs_.cols() && outputs_.cols() == o.outputs_.cols() &&
         inputs_ == o.inputs_ && outputs_ == o.outputs_ && situation_ == o.situation_;
}

void TpGmm::validate() const {
  const int k = components();
  if (k < 1) throw ArgumentError("model has no components");
  if (per_frame.empty()) throw ArgumentError("model has no frames");
  const int d = dim();
  for (const auto& frame : per_frame) {
    if (static_cast<int>(frame.size()) != k) throw DimensionError("per-frame component lists must be K long");
    for (const auto& c : frame) {
      if (c.dim() != d || c.cov.rows() != d || c.cov.cols() != d) {
        throw DimensionError("model components have inconsistent dimensions");
      }
    }
  }
  const int expected_in = mode == Mode::TimeBased ? 1 : d / 2;
  if (input_dim != expected_in || (mode == Mode::TrajectoryBased && d % 2 != 0)) {
    throw DimensionError("input_dim does not match the model mode");
  }
  const int p = position_dim();
  if (p != 2 && p != 3) throw DimensionError("position dimension must be 2 or 3");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ArgumentError("model weights must form a simplex");
  }
}

bool TpGmm::operator==(const TpGmm& o) const {
  return mode == o.mode && input_dim == o.input_dim && weights.size() == o.weights.size() &&
         weights == o.weights && per_frame == o.per_frame;
}

std::vector<Eigen::MatrixXd> project_demo(const Demonstration& demo) {
  const Eigen::MatrixXd joint = demo.joint();
  std::vector<Eigen::MatrixXd> local;
  local.reserve(demo.situation().size());
  for (const auto& frame : demo.situation().frames()) {
    const AugmentedFrame a = augment(demo.mode(), frame);
    // Rows: (ξ_t − b̂)ᵀ Â, i.e. Âᵀ (ξ_t − b̂) transposed.
    local.push_back((joint.rowwise() - a.offset.transpose()) * a.matrix);
  }
  return local;
}

namespace {

void check_consistent(std::span<const Demonstration> demos) {
  if (demos.empty()) throw ArgumentError("need at least one demonstration");
  const auto& first = demos.front();
  for (const auto& d : demos) {
    if (d.mode() != first.mode()) throw ArgumentError("demonstrations mix time and trajectory modes");
    if (d.situation().size() != first.situation().size()) {
      throw ArgumentError("demonstrations have inconsistent frame counts");
    }
    if (d.position_dim() != first.position_dim()) {
      throw ArgumentError("demonstrations have inconsistent position dimensions");
    }
  }
}

// Frame-wise stacked local data, one T_total x D matrix per frame.
std::vector<Eigen::MatrixXd> stacked_local_data(std::span<const Demonstration> demos) {
  const std::size_t n_frames = demos.front().situation().size();
  Eigen::Index total = 0;
  for (const auto& d : demos) total += d.samples();
  const auto dim = demos.front().joint().cols();
  std::vector<Eigen::MatrixXd> out(n_frames, Eigen::MatrixXd(total, dim));
  Eigen::Index row = 0;
  for (const auto& d : demos) {
    const auto local = project_demo(d);
    for (std::size_t n = 0; n < n_frames; ++n) out[n].middleRows(row, d.samples()) = local[n];
    row += d.samples();
  }
  return out;
}

// Unnormalized log responsibilities, T x K.
Eigen::MatrixXd joint_log_terms(const TpGmm& model, const std::vector<Eigen::MatrixXd>& data) {
  const int k = model.components();
  Eigen::MatrixXd lp(data.front().rows(), k);
  for (int c = 0; c < k; ++c) {
    lp.col(c).setConstant(std::log(model.weights[c]));
    for (std::size_t n = 0; n < data.size(); ++n) {
      lp.col(c) += log_density_rows(model.per_frame[n][c], data[n]);
    }
  }
  return lp;
}

// Responsibilities below this are zeroed so the M-step never touches
// subnormal numbers.
constexpr double kNegligibleResponsibility = 1e-250;

// Normalizes `lp` rows in place into responsibilities; returns the mean
// log-likelihood.
double normalize_rows(Eigen::MatrixXd& lp) {
  const Eigen::VectorXd row_max = lp.rowwise().maxCoeff();
  if (!row_max.allFinite()) throw NumericError("every component density underflowed for some sample");
  lp.colwise() -= row_max;
  lp = lp.array().max(-700.0).exp();
  const Eigen::VectorXd sums = lp.rowwise().sum();
  lp.array().colwise() /= sums.array();
  lp = (lp.array() < kNegligibleResponsibility).select(0.0, lp);
  return (row_max.array() + sums.array().log()).mean();
}

}  // namespace

TpGmm fit(std::span<const Demonstration> demos, int k, const EmConfig& cfg, TpEmTrace* trace) {
  cfg.validate();
  check_consistent(demos);
  if (k < 1) throw ArgumentError("K must be >= 1");
  const Mode mode = demos.front().mode();
  // Each frame's local data is normalized per column; the floor applies in
  // those units and the fitted components are mapped back at the end.
  auto data = stacked_local_data(demos);
  std::vector<Eigen::VectorXd> scales;
  double log_jacobian = 0.0;
  for (auto& local : data) {
    scales.push_back(column_scales(local));
    local = local.array().rowwise() / scales.back().transpose().array();
    log_jacobian += scales.back().array().log().sum();
  }
  const auto t = data.front().rows();
  if (t < k) throw ArgumentError("need at least K samples to fit K components");
  const int input_dim = static_cast<int>(demos.front().inputs().cols());

  std::vector<int> labels;
  if (cfg.init == InitMethod::TimeBinning) {
    labels = initial_labels(data.front(), k, cfg);
  } else {
    Eigen::MatrixXd features(t, data.front().cols() * static_cast<Eigen::Index>(data.size()));
    for (std::size_t n = 0; n < data.size(); ++n) {
      features.middleCols(n * data.front().cols(), data.front().cols()) = data[n];
    }
    labels = initial_labels(features, k, cfg);
  }

  TpGmm model;
  model.mode = mode;
  model.input_dim = input_dim;
  for (const auto& local : data) {
    Gmm g = init_from_labels(local, labels, k, input_dim, cfg.cov_floor);
    model.weights = g.weights;
    model.per_frame.push_back(std::move(g.components));
  }

  TpEmTrace local_trace;
  Eigen::MatrixXd resp = joint_log_terms(model, data);
  double ll = normalize_rows(resp);
  local_trace.log_likelihood.push_back(ll - log_jacobian);
  Eigen::MatrixXd cen, weighted;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int c = 0; c < k; ++c) {
      const double nk = resp.col(c).sum();
      if (!(nk > 0.0)) {
        model.weights[c] = 0.0;
        continue;
      }
      model.weights[c] = nk / static_cast<double>(t);
      for (std::size_t n = 0; n < data.size(); ++n) {
        Eigen::VectorXd mu(data[n].cols());
        mu.noalias() = data[n].transpose() * resp.col(c);
        mu /= nk;
        cen = data[n].rowwise() - mu.transpose();
        weighted = cen.array().colwise() * resp.col(c).array();
        Eigen::MatrixXd cov(mu.size(), mu.size());
        cov.noalias() = cen.transpose().lazyProduct(weighted);
        cov /= nk;
        cov = 0.5 * (cov + cov.transpose()).eval();
        cov.diagonal().array() += cfg.cov_floor;
        model.per_frame[n][c] = {mu, std::move(cov)};
      }
    }
    model.weights /= model.weights.sum();
    resp = joint_log_terms(model, data);
    const double next = normalize_rows(resp);
    local_trace.log_likelihood.push_back(next - log_jacobian);
    const bool done = std::abs(next - ll) < cfg.log_lik_tol;
    ll = next;
    if (done) {
      local_trace.converged = true;
      break;
    }
  }
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (auto& c : model.per_frame[n]) c = unnormalize(c, scales[n]);
  }
  if (trace) *trace = std::move(local_trace);
  return model;
}

double joint_log_likelihood(const TpGmm& model, std::span<const Demonstration> demos) {
  check_consistent(demos);
  Eigen::MatrixXd lp = joint_log_terms(model, stacked_local_data(demos));
  return normalize_rows(lp);
}

Eigen::MatrixXd responsibilities(const TpGmm& model, std::span<const Demonstration> demos) {
  check_consistent(demos);
  Eigen::MatrixXd lp = joint_log_terms(model, stacked_local_data(demos));
  normalize_rows(lp);
  return lp;
}

Gmm instantiate(const TpGmm& model, const Situation& situation) {
  model.validate();
  if (static_cast<int>(situation.size()) != model.frames()) {
    throw ArgumentError("situation has " + std::to_string(situation.size()) +
                        " frames but the model expects " + std::to_string(model.frames()));
  }
  if (situation.dim() != model.position_dim()) {
    throw DimensionError("situation dimension does not match the model");
  }
  const int d = model.dim();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);

  std::vector<AugmentedFrame> frames;
  for (const auto& f : situation.frames()) frames.push_back(augment(model.mode, f));

  Gmm out;
  out.weights = model.weights;
  out.input_dim = model.input_dim;
  for (int c = 0; c < model.components(); ++c) {
    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd info = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < model.frames(); ++n) {
      const auto& comp = model.per_frame[n][c];
      auto [mu, sigma] = transform_gaussian(frames[n], comp.mean, comp.cov);
      Eigen::LLT<Eigen::MatrixXd> llt(sigma);
      const Eigen::MatrixXd p_n = llt.solve(eye);
      precision += p_n;
      info += p_n * mu;
    }
    precision = 0.5 * (precision + precision.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> fused(precision);
    if (fused.info() != Eigen::Success) throw NumericError("summed precision is singular");
    Eigen::MatrixXd cov = fused.solve(eye);
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::VectorXd mean = cov * info;
    out.components.push_back({std::move(mean), std::move(cov)});
  }
  return out;
}

Eigen::MatrixXd reproduce_time_based(const TpGmm& model, const Situation& situation,
                                     const Eigen::VectorXd& times) {
  if (model.mode != Mode::TimeBased) throw ArgumentError("model is not time-based");
  const GmrConditioner gmr_model(instantiate(model, situation));
  Eigen::MatrixXd out(times.size(), gmr_model.output_dim());
  Eigen::VectorXd in(1);
  for (Eigen::Index t = 0; t < times.size(); ++t) {
    in[0] = times[t];
    out.row(t) = gmr_model.condition(in).mean.transpose();
  }
  return out;
}

Eigen::MatrixXd reproduce_trajectory_based(const TpGmm& model, const Situation& situation,
                                           const Eigen::VectorXd& start, int steps) {
  if (model.mode != Mode::TrajectoryBased) throw ArgumentError("model is not trajectory-based");
  if (steps < 1) throw ArgumentError("steps must be >= 1");
  const GmrConditioner gmr_model(instantiate(model, situation));
  if (start.size() != gmr_model.input_dim()) throw DimensionError("start point dimension mismatch");
  Eigen::MatrixXd out(steps + 1, start.size());
  out.row(0) = start.transpose();
  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd x = out.row(t).transpose();
    out.row(t + 1) = (x + gmr_model.condition(x).mean).transpose();
  }
  if (!out.allFinite()) throw NumericError("trajectory reproduction diverged");
  return out;
}

Eigen::MatrixXd reproduce_like(const TpGmm& model, const Demonstration& demo) {
  if (model.mode == Mode::TimeBased) {
    return reproduce_time_based(model, demo.situation(), demo.inputs().col(0));
  }
  return reproduce_trajectory_based(model, demo.situation(), demo.inputs().row(0).transpose(),
                                    demo.samples() - 1);
}

Demonstration package_reproduction(const TpGmm& model, const Demonstration& like,
                                   const Situation& situation, Eigen::MatrixXd positions) {
  if (model.mode == Mode::TimeBased) {
    return Demonstration(Mode::TimeBased, like.inputs(), std::move(positions), situation);
  }
  return Demonstration::trajectory_based(positions, situation);
}

}  // namespace tpaug
