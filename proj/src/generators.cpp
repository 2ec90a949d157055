#include <cmath>
#include <numbers>
#include <random>

#include "tpaug/dataset.hpp"
#include "tpaug/errors.hpp"

namespace tpaug {
namespace {

constexpr double kPi = std::numbers::pi;

// Bump profile sin^2(pi s): zero value and zero slope at s = 0 and s = 1.
double bump(double s) {
  const double v = std::sin(kPi * s);
  return v * v;
}

Eigen::Vector2d planar_dir(double angle, const Eigen::Vector2d& local) {
  return Eigen::Rotation2Dd(angle) * local;
}

// Rotation whose x axis is `x_dir` and whose z axis is the component of
// world up orthogonal to it.
Eigen::Matrix3d arm_frame(const Eigen::Vector3d& x_dir) {
  const Eigen::Vector3d x = x_dir.normalized();
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d z = (up - up.dot(x) * x).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

}  // namespace

DatasetFile generate_2d_task(int n_situations, int samples_per_demo, std::uint64_t seed) {
  if (n_situations < 2) throw ArgumentError("generate_2d_task needs at least 2 situations");
  if (samples_per_demo < 20) throw ArgumentError("generate_2d_task needs at least 20 samples per demo");
  using B = Task2dBounds;
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(B::goal_x_min, B::goal_x_max);
  std::uniform_real_distribution<double> uy(B::goal_y_min, B::goal_y_max);
  std::uniform_real_distribution<double> ua(-B::goal_angle_max, B::goal_angle_max);
  std::uniform_real_distribution<double> uj(-1.0, 1.0);

  const int t = samples_per_demo;
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(t, 0.0, 1.0);
  std::vector<Demonstration> demos;
  for (int s = 0; s < n_situations; ++s) {
    const Frame start = Frame::identity(2);
    const double gx = ux(rng);
    const double gy = uy(rng);
    const double angle = ua(rng);
    Eigen::VectorXd angle_vec(1);
    angle_vec[0] = angle;
    const Frame goal(euler_to_rotation(angle_vec), Eigen::Vector2d(gx, gy));
    const double j1 = uj(rng);
    const double j2 = uj(rng);

    const Eigen::Vector2d p0 = start.translation();
    const Eigen::Vector2d p1 = goal.translation();
    const double dist = (p1 - p0).norm();
    const Eigen::Vector2d v0 = B::tangent_scale * dist * planar_dir(0.0, Eigen::Vector2d(0.0, 1.0));
    const Eigen::Vector2d v1 = B::tangent_scale * dist * planar_dir(angle, Eigen::Vector2d(0.0, -1.0));
    const Eigen::Vector2d chord = (p1 - p0) / dist;
    const Eigen::Vector2d normal(-chord.y(), chord.x());

    Eigen::MatrixXd pos(t, 2);
    for (int i = 0; i < t; ++i) {
      const double u = times[i];
      const double u2 = u * u;
      const double u3 = u2 * u;
      const double h00 = 2 * u3 - 3 * u2 + 1;
      const double h10 = u3 - 2 * u2 + u;
      const double h01 = -2 * u3 + 3 * u2;
      const double h11 = u3 - u2;
      Eigen::Vector2d x = h00 * p0 + h10 * v0 + h01 * p1 + h11 * v1;
      x += B::jitter_scale * dist * bump(u) *
           (j1 * normal + j2 * std::sin(2.0 * kPi * u) * chord);
      pos.row(i) = x.transpose();
    }
    demos.push_back(Demonstration::time_based(times, std::move(pos), Situation({start, goal})));
  }
  return DatasetFile::from_demos(std::move(demos));
}

DatasetFile generate_3d_task(int n_situations, int samples_per_demo, std::uint64_t seed) {
  if (n_situations < 2) throw ArgumentError("generate_3d_task needs at least 2 situations");
  if (samples_per_demo < 20) throw ArgumentError("generate_3d_task needs at least 20 samples per demo");
  Rng rng(seed);
  std::normal_distribution<double> tremor(0.0, 1.0);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  constexpr double kUpperArm = 0.30;
  constexpr double kForearm = 0.28;
  constexpr double kClearance = 0.08;
  constexpr double kJitter = 0.03;
  constexpr double kWiggle = 0.03;
  constexpr double kPaceSpread = 0.3;
  constexpr double kArmShare = 0.75;
  constexpr double kArcSweep = 2.0 * kPi / 3.0;
  constexpr double kTremor = 0.03;
  const int t = samples_per_demo;

  std::vector<Demonstration> demos;
  for (int s = 0; s < n_situations; ++s) {
    const Eigen::Vector3d shoulder(uniform(-0.05, 0.05), uniform(-0.05, 0.05), 1.2 + uniform(-0.05, 0.05));
    const double azimuth = uniform(-kPi / 6.0, kPi / 6.0);
    const double elevation = uniform(-2.0 * kPi / 9.0, 0.0);
    const double flexion = uniform(0.0, kPi / 4.0);
    const Eigen::Vector3d upper_dir(std::cos(elevation) * std::sin(azimuth),
                                    std::cos(elevation) * std::cos(azimuth), std::sin(elevation));
    const Eigen::Vector3d elbow = shoulder + kUpperArm * upper_dir;
    // Forearm bends upward about the horizontal axis orthogonal to the upper arm.
    const Eigen::Vector3d hinge = upper_dir.cross(Eigen::Vector3d::UnitZ()).normalized();
    const Eigen::Vector3d fore_dir = Eigen::AngleAxisd(-flexion, hinge) * upper_dir;
    const Eigen::Vector3d wrist = elbow + kForearm * fore_dir;

    const Frame wrist_frame(arm_frame(elbow - wrist), wrist);
    const Frame shoulder_frame(arm_frame(elbow - shoulder), shoulder);

    const Eigen::Vector3d a = wrist + kClearance * wrist_frame.rotation().col(2);
    const Eigen::Vector3d c = shoulder + kClearance * shoulder_frame.rotation().col(2);
    const Eigen::Vector3d via = elbow + kClearance * Eigen::Vector3d::UnitZ();
    // Quadratic Bezier through `via` at its midpoint.
    const Eigen::Vector3d control = 2.0 * via - 0.5 * (a + c);
    const Eigen::Vector3d jitter(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    const Eigen::Vector3d wiggle(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    // Monotone re-timing u -> u^gamma: demonstrators move at different paces.
    const double gamma = std::exp(uniform(-kPaceSpread, kPaceSpread));

    // Path parameter u in [0, 1]: the arm segment on [0, kArmShare], then an
    // arc around the shoulder in its x-z plane from the top over to the back.
    const Eigen::Vector3d sx = shoulder_frame.rotation().col(0);
    const Eigen::Vector3d sz = shoulder_frame.rotation().col(2);
    auto path = [&](double u) -> Eigen::Vector3d {
      if (u <= kArmShare) {
        const double v = u / kArmShare;
        return (1 - v) * (1 - v) * a + 2 * v * (1 - v) * control + v * v * c;
      }
      const double theta = 0.5 * kPi + kArcSweep * (u - kArmShare) / (1.0 - kArmShare);
      return shoulder + kClearance * (std::cos(theta) * sx + std::sin(theta) * sz);
    };

    Eigen::MatrixXd pos(t, 3);
    for (int i = 0; i < t; ++i) {
      const double u = std::pow(static_cast<double>(i) / (t - 1), gamma);
      Eigen::Vector3d x = path(u);
      x += bump(u) * (kJitter * jitter + kWiggle * std::sin(3.0 * kPi * u) * wiggle);
      for (int j = 0; j < 3; ++j) x[j] += kTremor * tremor(rng);
      pos.row(i) = x.transpose();
    }
    demos.push_back(Demonstration::trajectory_based(pos, Situation({wrist_frame, shoulder_frame})));
  }
  return DatasetFile::from_demos(std::move(demos));
}

}  // namespace tpaug
