#include "tpaug/frames.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tpaug/errors.hpp"

namespace tpaug {

bool is_valid_rotation(const Eigen::MatrixXd& rotation, double tol) {
  const auto p = rotation.rows();
  if (p != rotation.cols() || (p != 2 && p != 3)) return false;
  if (!rotation.allFinite()) return false;
  const Eigen::MatrixXd gram = rotation.transpose() * rotation;
  if ((gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Frame::Frame(Eigen::MatrixXd rotation, Eigen::VectorXd translation)
    : rotation_(std::move(rotation)), translation_(std::move(translation)) {
  if (rotation_.rows() != translation_.size()) {
    throw DimensionError("frame rotation is " + std::to_string(rotation_.rows()) +
                         "x" + std::to_string(rotation_.cols()) + " but translation has " +
                         std::to_string(translation_.size()) + " entries");
  }
  if (!is_valid_rotation(rotation_)) {
    throw FrameValidityError("frame rotation is not in SO(" + std::to_string(rotation_.rows()) +
                             ") within tolerance");
  }
  if (!translation_.allFinite()) throw FrameValidityError("frame translation is not finite");
}

Frame Frame::identity(int dim) {
  return Frame(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim));
}

bool Frame::operator==(const Frame& other) const {
  return rotation_.rows() == other.rotation_.rows() && rotation_ == other.rotation_ &&
         translation_ == other.translation_;
}

Situation::Situation(std::vector<Frame> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw ArgumentError("a situation needs at least one frame");
  for (const auto& f : frames_) {
    if (f.dim() != frames_.front().dim()) {
      throw DimensionError("all frames of a situation must share the same dimension");
    }
  }
}

void FrameLimits::validate() const {
  const auto p = trans_min.size();
  if (p != 2 && p != 3) throw DimensionError("frame limits must be 2D or 3D");
  const Eigen::Index n_angles = p == 2 ? 1 : 3;
  if (trans_max.size() != p || euler_min.size() != n_angles || euler_max.size() != n_angles) {
    throw DimensionError("frame limit vectors have inconsistent sizes");
  }
  if ((euler_min.array() > euler_max.array()).any() ||
      (trans_min.array() > trans_max.array()).any()) {
    throw ArgumentError("frame limits have min > max");
  }
}

bool FrameLimits::contains(const Frame& frame, double tol) const {
  if (frame.dim() != dim()) return false;
  const Eigen::VectorXd angles = rotation_to_euler(frame.rotation());
  const auto& b = frame.translation();
  return (angles.array() >= euler_min.array() - tol).all() &&
         (angles.array() <= euler_max.array() + tol).all() &&
         (b.array() >= trans_min.array() - tol).all() &&
         (b.array() <= trans_max.array() + tol).all();
}

Eigen::MatrixXd euler_to_rotation(const Eigen::VectorXd& angles) {
  if (angles.size() == 1) {
    const double c = std::cos(angles[0]);
    const double s = std::sin(angles[0]);
    Eigen::MatrixXd r(2, 2);
    r << c, -s, s, c;
    return r;
  }
  if (angles.size() == 3) {
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(angles[0], Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(angles[1], Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(angles[2], Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    return r;
  }
  throw DimensionError("expected 1 (planar) or 3 (Z-Y-X) Euler angles, got " +
                       std::to_string(angles.size()));
}

Eigen::VectorXd rotation_to_euler(const Eigen::MatrixXd& r) {
  if (r.rows() == 2 && r.cols() == 2) {
    Eigen::VectorXd a(1);
    a[0] = std::atan2(r(1, 0), r(0, 0));
    return a;
  }
  if (r.rows() != 3 || r.cols() != 3) throw DimensionError("rotation must be 2x2 or 3x3");
  Eigen::VectorXd a(3);
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  a[1] = std::asin(sp);
  if (std::abs(sp) < 1.0 - 1e-12) {
    a[0] = std::atan2(r(1, 0), r(0, 0));
    a[2] = std::atan2(r(2, 1), r(2, 2));
  } else {
    // Gimbal lock: only yaw -/+ roll is observable.
    a[2] = 0.0;
    a[0] = std::atan2(-r(0, 1), r(1, 1));
  }
  return a;
}

Eigen::VectorXd to_global(const Frame& frame, const Eigen::VectorXd& local) {
  if (local.size() != frame.dim()) throw DimensionError("point dimension does not match frame");
  return frame.rotation() * local + frame.translation();
}

Eigen::VectorXd to_local(const Frame& frame, const Eigen::VectorXd& global) {
  if (global.size() != frame.dim()) throw DimensionError("point dimension does not match frame");
  return frame.rotation().transpose() * (global - frame.translation());
}

AugmentedFrame AugmentedFrame::time_based(const Frame& frame) {
  const int p = frame.dim();
  AugmentedFrame out{Eigen::MatrixXd::Zero(p + 1, p + 1), Eigen::VectorXd::Zero(p + 1)};
  out.matrix(0, 0) = 1.0;
  out.matrix.bottomRightCorner(p, p) = frame.rotation();
  out.offset.tail(p) = frame.translation();
  return out;
}

AugmentedFrame AugmentedFrame::trajectory_based(const Frame& frame) {
  const int p = frame.dim();
  AugmentedFrame out{Eigen::MatrixXd::Zero(2 * p, 2 * p), Eigen::VectorXd::Zero(2 * p)};
  out.matrix.topLeftCorner(p, p) = frame.rotation();
  out.matrix.bottomRightCorner(p, p) = frame.rotation();
  out.offset.head(p) = frame.translation();
  return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> transform_gaussian(const AugmentedFrame& frame,
                                                               const Eigen::VectorXd& mean,
                                                               const Eigen::MatrixXd& cov) {
  const int d = frame.dim();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d) {
    throw DimensionError("Gaussian dimension does not match augmented frame");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive-definite");
  Eigen::VectorXd m = frame.matrix * mean + frame.offset;
  Eigen::MatrixXd s = frame.matrix * cov * frame.matrix.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return {std::move(m), std::move(s)};
}

Frame sample_frame(const FrameLimits& limits, Rng& rng) {
  limits.validate();
  auto draw = [&rng](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  Eigen::VectorXd angles(limits.euler_min.size());
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    angles[i] = draw(limits.euler_min[i], limits.euler_max[i]);
  }
  Eigen::VectorXd b(limits.trans_min.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = draw(limits.trans_min[i], limits.trans_max[i]);
  return Frame(euler_to_rotation(angles), std::move(b));
}

std::vector<FrameLimits> limits_from_situations(std::span<const Situation> situations,
                                                double expansion) {
  if (situations.empty()) throw ArgumentError("limits_from_situations needs at least one situation");
  if (!(expansion >= 0.0)) throw ArgumentError("limit expansion must be non-negative");
  const std::size_t n_frames = situations.front().size();
  const int p = situations.front().dim();
  for (const auto& s : situations) {
    if (s.size() != n_frames || s.dim() != p) {
      throw ArgumentError("all situations must have the same frame count and dimension");
    }
  }

  auto widen = [expansion](Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      const double range = hi[i] - lo[i];
      const double pad = expansion * (range > 0.0 ? range : 1.0);
      lo[i] -= pad;
      hi[i] += pad;
    }
  };

  std::vector<FrameLimits> out;
  out.reserve(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) {
    FrameLimits lim;
    for (const auto& s : situations) {
      const Eigen::VectorXd a = rotation_to_euler(s[n].rotation());
      const Eigen::VectorXd& b = s[n].translation();
      if (lim.euler_min.size() == 0) {
        lim.euler_min = lim.euler_max = a;
        lim.trans_min = lim.trans_max = b;
      } else {
        lim.euler_min = lim.euler_min.cwiseMin(a);
        lim.euler_max = lim.euler_max.cwiseMax(a);
        lim.trans_min = lim.trans_min.cwiseMin(b);
        lim.trans_max = lim.trans_max.cwiseMax(b);
      }
    }
    widen(lim.euler_min, lim.euler_max);
    widen(lim.trans_min, lim.trans_max);
    out.push_back(std::move(lim));
  }
  return out;
}

}  // namespace tpaug
