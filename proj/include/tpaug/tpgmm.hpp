#pragma once

// Task-parameterized GMM: per-frame projection of demonstrations, joint EM
// over all frames, precision-weighted fusion into a situation-specific
// mixture, and motion reproduction.

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tpaug/frames.hpp"
#include "tpaug/gmm.hpp"

namespace tpaug {

/// Time-based: input = time (1D), output = position.
/// Trajectory-based: input = position, output = per-sample displacement.
enum class Mode { TimeBased, TrajectoryBased };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

AugmentedFrame augment(Mode mode, const Frame& frame);

/// One expert or synthetic demonstration: T samples of (input, output) and
/// the situation it was recorded in.
class Demonstration {
 public:
  /// Validates shapes against `mode`; in trajectory mode outputs must be the
  /// forward differences of inputs (last row repeated) within 1e-9.
  Demonstration(Mode mode, Eigen::MatrixXd inputs, Eigen::MatrixXd outputs, Situation situation);

  static Demonstration time_based(const Eigen::VectorXd& times, Eigen::MatrixXd positions,
                                  Situation situation);
  static Demonstration trajectory_based(const Eigen::MatrixXd& positions, Situation situation);

  Mode mode() const { return mode_; }
  int samples() const { return static_cast<int>(inputs_.rows()); }
  int position_dim() const { return situation_.dim(); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::MatrixXd& outputs() const { return outputs_; }
  const Situation& situation() const { return situation_; }

  /// Positions along the demonstration (outputs in time mode, inputs in
  /// trajectory mode).
  const Eigen::MatrixXd& positions() const {
    return mode_ == Mode::TimeBased ? outputs_ : inputs_;
  }
  /// [inputs | outputs], T x D.
  Eigen::MatrixXd joint() const;

  bool operator==(const Demonstration& o) const;

 private:
  Mode mode_;
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd outputs_;
  Situation situation_;
};

/// Forward differences of a T x p path; the last row repeats the previous
/// displacement.
Eigen::MatrixXd displacements(const Eigen::MatrixXd& positions);

struct TpGmm {
  Mode mode = Mode::TimeBased;
  Eigen::VectorXd weights;
  /// per_frame[n][k]: component k seen from frame n.
  std::vector<std::vector<GaussianComponent>> per_frame;
  int input_dim = 1;

  int components() const { return static_cast<int>(weights.size()); }
  int frames() const { return static_cast<int>(per_frame.size()); }
  int dim() const { return per_frame.empty() ? 0 : per_frame.front().front().dim(); }
  /// Position dimension p.
  int position_dim() const { return mode == Mode::TimeBased ? dim() - 1 : dim() / 2; }
  void validate() const;

  bool operator==(const TpGmm& o) const;
};

/// Local data of a demonstration in each of its frames: for frame n the
/// rows are Ânᵀ (ξ_t − b̂n).
std::vector<Eigen::MatrixXd> project_demo(const Demonstration& demo);

struct TpEmTrace {
  std::vector<double> log_likelihood;  // mean per-sample joint log-likelihood
  bool converged = false;
};

/// Joint EM over all frames (E-step responsibility ∝ π_k Π_n N(ξ_t^(n) | μ_k^n, Σ_k^n)).
/// As in em_fit, each frame's local data is normalized per column while the
/// covariance floor is applied. Throws ArgumentError for empty or inconsistent demonstration sets.
TpGmm fit(std::span<const Demonstration> demos, int k, const EmConfig& cfg,
          TpEmTrace* trace = nullptr);

/// Joint mean log-likelihood of `demos` under `model`.
double joint_log_likelihood(const TpGmm& model, std::span<const Demonstration> demos);

/// Per-sample responsibilities (rows sum to 1) of the joint E-step.
Eigen::MatrixXd responsibilities(const TpGmm& model, std::span<const Demonstration> demos);

/// Product of the frame-wise transformed Gaussians for one situation.
Gmm instantiate(const TpGmm& model, const Situation& situation);

/// T x p positions, row t = GMR mean at times[t].
Eigen::MatrixXd reproduce_time_based(const TpGmm& model, const Situation& situation,
                                     const Eigen::VectorXd& times);

/// (steps+1) x p path from `start`, integrating GMR displacement means with
/// a unit step.
Eigen::MatrixXd reproduce_trajectory_based(const TpGmm& model, const Situation& situation,
                                           const Eigen::VectorXd& start, int steps);

/// Positions reproducing `demo`'s situation on its time grid (time mode) or
/// from its start point over its sample count (trajectory mode).
Eigen::MatrixXd reproduce_like(const TpGmm& model, const Demonstration& demo);

/// Wraps reproduced positions as a demonstration of `model.mode`.
Demonstration package_reproduction(const TpGmm& model, const Demonstration& like,
                                   const Situation& situation, Eigen::MatrixXd positions);

}  // namespace tpaug
