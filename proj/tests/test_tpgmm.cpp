#include <doctest.h>

#include <numbers>

#include "support.hpp"
#include "tpaug/augment.hpp"
#include "tpaug/dataset.hpp"
#include "tpaug/errors.hpp"
#include "tpaug/tpgmm.hpp"

using namespace tpaug;

namespace {

constexpr double kPi = std::numbers::pi;

Demonstration wavy_demo(Rng& rng, const Situation& sit, int t = 40) {
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(t, 0.0, 1.0);
  const double phase = test::uniform(rng, 0, 1);
  Eigen::MatrixXd pos(t, sit.dim());
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < sit.dim(); ++j) pos(i, j) = std::sin(2 * kPi * times[i] + phase + j) + j;
  }
  return Demonstration::time_based(times, pos, sit);
}

}  // namespace

TEST_CASE("mode strings") {
  CHECK(to_string(Mode::TimeBased) == "time");
  CHECK(mode_from_string("trajectory") == Mode::TrajectoryBased);
  CHECK_THROWS_AS(mode_from_string("both"), ArgumentError);
}

TEST_CASE("Demonstration invariants") {
  const Situation sit({Frame::identity(2)});
  Eigen::MatrixXd pos(4, 2);
  pos << 0, 0, 1, 0, 2, 1, 3, 3;
  const auto traj = Demonstration::trajectory_based(pos, sit);
  Eigen::MatrixXd expected(4, 2);
  expected << 1, 0, 1, 1, 1, 2, 1, 2;
  CHECK(traj.outputs() == expected);
  CHECK(traj.positions() == pos);
  CHECK_THROWS_AS(Demonstration(Mode::TrajectoryBased, pos, pos, sit), ArgumentError);
  CHECK_THROWS_AS(Demonstration::time_based(Eigen::VectorXd::Zero(3), pos, sit), DimensionError);
  CHECK_THROWS_AS(Demonstration::time_based(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Zero(4, 3), sit),
                  DimensionError);
  Eigen::MatrixXd bad = pos;
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(Demonstration::trajectory_based(bad, sit), NumericError);
}

TEST_CASE("project_demo") {
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(3, 0, 1);
  Eigen::MatrixXd pos(3, 2);
  pos << 1, 1, 2, 0, -1, 3;
  const auto id = project_demo(Demonstration::time_based(times, pos, Situation({Frame::identity(2)})));
  CHECK(id.front().col(0) == times);
  CHECK(id.front().rightCols(2) == pos);

  Eigen::Vector2d angle_b(1, 0);
  const Frame f(euler_to_rotation(Eigen::VectorXd::Constant(1, kPi / 2)), angle_b);
  const auto local = project_demo(Demonstration::time_based(times, pos, Situation({f})));
  CHECK(test::max_abs_diff(local.front().row(0).tail(2), Eigen::RowVector2d(1, 0)) < 1e-15);

  Rng rng(21);
  const Situation sit = test::random_situation(rng, 3, 2);
  Eigen::MatrixXd path = test::random_matrix(rng, 10, 3);
  const auto demo = Demonstration::trajectory_based(path, sit);
  const auto proj = project_demo(demo);
  for (int n = 0; n < 2; ++n) {
    const Eigen::MatrixXd a = test::naive_block_matrix(Mode::TrajectoryBased, sit[n]);
    const Eigen::VectorXd b = test::naive_block_offset(Mode::TrajectoryBased, sit[n]);
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd xi = demo.joint().row(t).transpose();
      CHECK(test::max_abs_diff(proj[n].row(t).transpose(), a.inverse() * (xi - b)) < 1e-12);
    }
  }
}

TEST_CASE("fit with one identity frame reduces to plain EM") {
  Rng rng(1);
  const Situation sit({Frame::identity(2)});
  std::vector<Demonstration> demos{wavy_demo(rng, sit), wavy_demo(rng, sit)};
  EmConfig cfg;
  const TpGmm tp = fit(demos, 3, cfg);
  Eigen::MatrixXd joint(80, 3);
  joint << demos[0].joint(), demos[1].joint();
  const Gmm plain = em_fit(joint, 3, 1, cfg);
  CHECK(test::max_abs_diff(tp.weights, plain.weights) < 1e-8);
  for (int c = 0; c < 3; ++c) {
    CHECK(test::max_abs_diff(tp.per_frame[0][c].mean, plain.components[c].mean) < 1e-8);
    CHECK(test::max_abs_diff(tp.per_frame[0][c].cov, plain.components[c].cov) < 1e-8);
  }
}

TEST_CASE("fit validates its inputs") {
  Rng rng(2);
  const Situation one({Frame::identity(2)});
  const Situation two({Frame::identity(2), Frame::identity(2)});
  EmConfig cfg;
  std::vector<Demonstration> mixed{wavy_demo(rng, one), wavy_demo(rng, two)};
  CHECK_THROWS_AS(fit(mixed, 2, cfg), ArgumentError);
  CHECK_THROWS_AS(fit(std::vector<Demonstration>{}, 2, cfg), ArgumentError);
  std::vector<Demonstration> few{wavy_demo(rng, one, 3)};
  CHECK_THROWS_AS(fit(few, 5, cfg), ArgumentError);
}

TEST_CASE("fit trace is non-decreasing; responsibilities are normalized") {
  Rng rng(3);
  std::vector<Demonstration> demos;
  for (int i = 0; i < 3; ++i) demos.push_back(wavy_demo(rng, test::random_situation(rng, 2, 2)));
  EmConfig cfg;
  TpEmTrace trace;
  const TpGmm m = fit(demos, 4, cfg, &trace);
  REQUIRE(trace.log_likelihood.size() >= 2);
  for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i) {
    CHECK(trace.log_likelihood[i] >= trace.log_likelihood[i - 1] - 1e-8);
  }
  CHECK(joint_log_likelihood(m, demos) == doctest::Approx(trace.log_likelihood.back()).epsilon(1e-10));
  const Eigen::MatrixXd r = responsibilities(m, demos);
  CHECK(r.rows() == 120);
  CHECK((r.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("instantiate: single identity frame and equal-precision product") {
  Rng rng(4);
  TpGmm m = test::random_tpgmm(rng, Mode::TimeBased, 2, 1, 3);
  const Gmm g = instantiate(m, Situation({Frame::identity(2)}));
  for (int c = 0; c < 3; ++c) {
    CHECK(test::max_abs_diff(g.components[c].mean, m.per_frame[0][c].mean) < 1e-12);
    CHECK(test::max_abs_diff(g.components[c].cov, m.per_frame[0][c].cov) < 1e-12);
  }

  m.per_frame.push_back(m.per_frame[0]);
  const Gmm half = instantiate(m, Situation({Frame::identity(2), Frame::identity(2)}));
  for (int c = 0; c < 3; ++c) {
    CHECK(test::max_abs_diff(half.components[c].mean, m.per_frame[0][c].mean) < 1e-12);
    CHECK(test::max_abs_diff(half.components[c].cov, 0.5 * m.per_frame[0][c].cov) < 1e-12);
  }
  CHECK_THROWS_AS(instantiate(m, Situation({Frame::identity(2)})), ArgumentError);
}

TEST_CASE("instantiate matches the naive precision-accumulation product") {
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const Mode mode = i % 2 ? Mode::TrajectoryBased : Mode::TimeBased;
    const TpGmm m = test::random_tpgmm(rng, mode, 2 + i % 2, 2, 3);
    const Situation sit = test::random_situation(rng, 2 + i % 2, 2);
    const Gmm fast = instantiate(m, sit);
    const Gmm slow = test::naive_fusion(m, sit);
    for (int c = 0; c < 3; ++c) {
      CHECK(test::max_abs_diff(fast.components[c].mean, slow.components[c].mean) < 1e-10);
      CHECK(test::max_abs_diff(fast.components[c].cov, slow.components[c].cov) < 1e-10);
    }
  }
}

TEST_CASE("reproduce_time_based with a decoupled component is constant") {
  TpGmm m;
  m.weights = Eigen::VectorXd::Ones(1);
  m.per_frame = {{{Eigen::Vector3d(0.5, 2.0, -1.0), Eigen::Matrix3d::Identity()}}};
  const Eigen::MatrixXd traj =
      reproduce_time_based(m, Situation({Frame::identity(2)}), Eigen::VectorXd::LinSpaced(5, 0, 1));
  for (int t = 0; t < 5; ++t) CHECK(traj.row(t) == Eigen::RowVector2d(2.0, -1.0));
}

TEST_CASE("reproduce_trajectory_based fixed point and constant field") {
  TpGmm m;
  m.mode = Mode::TrajectoryBased;
  m.input_dim = 2;
  m.weights = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  m.per_frame = {{{mean, Eigen::MatrixXd::Identity(4, 4)}}};
  const Situation sit({Frame::identity(2)});
  const Eigen::Vector2d start(0.3, -0.2);
  const Eigen::MatrixXd still = reproduce_trajectory_based(m, sit, start, 6);
  CHECK(still.rows() == 7);
  for (int t = 0; t < 7; ++t) CHECK(still.row(t) == start.transpose());

  m.per_frame[0][0].mean.tail(2) = Eigen::Vector2d(0.1, 0.25);
  const Eigen::MatrixXd moving = reproduce_trajectory_based(m, sit, start, 4);
  for (int t = 0; t < 5; ++t) {
    CHECK(test::max_abs_diff(moving.row(t), (start + t * Eigen::Vector2d(0.1, 0.25)).transpose()) < 1e-14);
  }
  CHECK_THROWS_AS(reproduce_trajectory_based(m, sit, Eigen::Vector3d::Zero(), 4), DimensionError);
}

TEST_CASE("time-based reproduction is equivariant under rigid maps") {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const int p = 2 + i % 2;
    const TpGmm m = test::random_tpgmm(rng, Mode::TimeBased, p, 2, 3);
    const Situation sit = test::random_situation(rng, p, 2);
    const Frame g = test::random_frame(rng, p);
    std::vector<Frame> moved;
    for (const auto& f : sit.frames()) {
      moved.emplace_back(g.rotation() * f.rotation(), g.rotation() * f.translation() + g.translation());
    }
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(15, -1, 1);
    const Eigen::MatrixXd a = reproduce_time_based(m, sit, times);
    const Eigen::MatrixXd b = reproduce_time_based(m, Situation(moved), times);
    const Eigen::MatrixXd expected = (a * g.rotation().transpose()).rowwise() + g.translation().transpose();
    CHECK(test::max_abs_diff(b, expected) < 1e-8);
  }
}

TEST_CASE("reproduce_like and package_reproduction keep shapes and modes") {
  const DatasetFile data = generate_3d_task(2, 40, 3);
  EmConfig cfg = default_em_config(Mode::TrajectoryBased);
  const TpGmm m = fit(data.demos, 3, cfg);
  const Eigen::MatrixXd r = reproduce_like(m, data.demos[0]);
  CHECK(r.rows() == 40);
  CHECK(r.row(0) == data.demos[0].positions().row(0));
  const Demonstration d = package_reproduction(m, data.demos[0], data.demos[1].situation(), r);
  CHECK(d.mode() == Mode::TrajectoryBased);
  CHECK(d.outputs() == displacements(r));
  CHECK(d.situation() == data.demos[1].situation());
}
