#pragma once

// Reference frames (task parameters): rigid transforms attached to
// task-relevant objects, their augmented block forms, and sampling of new
// frames within Euler/translation limits.

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tpaug {

using Rng = std::mt19937_64;

/// Element-wise tolerance on RᵀR = I and on det(R) = 1.
inline constexpr double kRotationTolerance = 1e-9;

bool is_valid_rotation(const Eigen::MatrixXd& rotation, double tol = kRotationTolerance);

/// Rigid transform y = A x + b with A in SO(p), p in {2, 3}.
/// Construction rejects invalid rotations with FrameValidityError; no
/// re-orthogonalization is attempted.
class Frame {
 public:
  Frame(Eigen::MatrixXd rotation, Eigen::VectorXd translation);

  static Frame identity(int dim);

  int dim() const { return static_cast<int>(translation_.size()); }
  const Eigen::MatrixXd& rotation() const { return rotation_; }
  const Eigen::VectorXd& translation() const { return translation_; }

  bool operator==(const Frame& other) const;

 private:
  Eigen::MatrixXd rotation_;
  Eigen::VectorXd translation_;
};

/// Ordered set of N frames describing one task instance. Frame index n is
/// the frame's identity across demonstrations.
class Situation {
 public:
  Situation() = default;
  explicit Situation(std::vector<Frame> frames);

  std::size_t size() const { return frames_.size(); }
  int dim() const { return frames_.front().dim(); }
  const Frame& operator[](std::size_t n) const { return frames_[n]; }
  const std::vector<Frame>& frames() const { return frames_; }

  bool operator==(const Situation& other) const { return frames_ == other.frames_; }

 private:
  std::vector<Frame> frames_;
};

/// Closed sampling box for one frame index: Euler angles (1 for p=2, 3 for
/// p=3, radians) and translation components.
struct FrameLimits {
  Eigen::VectorXd euler_min;
  Eigen::VectorXd euler_max;
  Eigen::VectorXd trans_min;
  Eigen::VectorXd trans_max;

  int dim() const { return static_cast<int>(trans_min.size()); }
  /// Throws ArgumentError when sizes disagree or min > max anywhere.
  void validate() const;
  bool contains(const Frame& frame, double tol = 1e-12) const;
};

/// Rotation from Euler angles. p=2: a single planar angle. p=3: intrinsic
/// Z-Y-X, angles ordered (yaw, pitch, roll), R = Rz(yaw) Ry(pitch) Rx(roll).
Eigen::MatrixXd euler_to_rotation(const Eigen::VectorXd& angles);

/// Inverse of euler_to_rotation. Pitch is returned in [-pi/2, pi/2]; at
/// gimbal lock roll is set to 0.
Eigen::VectorXd rotation_to_euler(const Eigen::MatrixXd& rotation);

Eigen::VectorXd to_global(const Frame& frame, const Eigen::VectorXd& local);
Eigen::VectorXd to_local(const Frame& frame, const Eigen::VectorXd& global);

/// Block form of a frame acting on a stacked [input; output] vector.
///
/// Time-based:       matrix = diag(1, A),  offset = [0; b]
/// Trajectory-based: matrix = diag(A, A),  offset = [b; 0]
struct AugmentedFrame {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;

  static AugmentedFrame time_based(const Frame& frame);
  static AugmentedFrame trajectory_based(const Frame& frame);

  int dim() const { return static_cast<int>(offset.size()); }
};

/// (A mu + b, A Sigma Aᵀ). Throws NumericError if `cov` is not
/// symmetric positive-definite.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> transform_gaussian(const AugmentedFrame& frame,
                                                               const Eigen::VectorXd& mean,
                                                               const Eigen::MatrixXd& cov);

/// Uniform draw of each Euler angle and translation component from its
/// closed interval. Draw order: Euler angles, then translation.
Frame sample_frame(const FrameLimits& limits, Rng& rng);

/// Default widening applied by limits_from_situations.
inline constexpr double kDefaultLimitExpansion = 0.25;

/// Per-frame-index limits spanning the observed situations, each interval
/// widened on both sides by `expansion` times its range (times 1 when the
/// range is zero).
std::vector<FrameLimits> limits_from_situations(std::span<const Situation> situations,
                                                double expansion = kDefaultLimitExpansion);

}  // namespace tpaug
