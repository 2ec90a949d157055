#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tpaug/augment.hpp"
#include "tpaug/dataset.hpp"
#include "tpaug/errors.hpp"

using namespace tpaug;

namespace {

AugmentConfig small_config(Method method, std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.method = method;
  cfg.components = 4;
  cfg.max_demos = 5;
  cfg.max_iters = 6;
  cfg.seed = seed;
  cfg.em = default_em_config(Mode::TimeBased);
  return cfg;
}

std::vector<Demonstration> task(int n, std::uint64_t seed) { return generate_2d_task(n, 40, seed).demos; }

}  // namespace

TEST_CASE("method and selection strings") {
  CHECK(method_from_string("rf-noise") == Method::RfNoise);
  CHECK(method_from_string("rf_noise") == Method::RfNoise);
  CHECK(to_string(Method::Noise) == "noise");
  CHECK(selection_from_string("generalization") == Selection::Generalization);
  CHECK_THROWS_AS(method_from_string("gan"), ArgumentError);
  CHECK_THROWS_AS(selection_from_string("best"), ArgumentError);
}

TEST_CASE("derive_seed is a deterministic stream split") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("inject_noise in the vanishing-noise limit") {
  Rng rng(1);
  const Eigen::MatrixXd traj = test::random_matrix(rng, 100, 3);
  const Eigen::MatrixXd out = inject_noise(traj, 300.0, rng);
  CHECK(((out - traj).cwiseAbs().array() <= 1e-6 * traj.cwiseAbs().array().max(1e-300)).all());
}

TEST_CASE("inject_noise hits the requested SNR with zero-mean noise") {
  const int t = 10000;
  Eigen::MatrixXd traj(t, 2);
  for (int i = 0; i < t; ++i) {
    traj(i, 0) = std::sin(0.01 * i);
    traj(i, 1) = 3.0 + 0.5 * std::cos(0.003 * i);
  }
  Eigen::Vector2d signal;
  for (int j = 0; j < 2; ++j) signal[j] = (traj.col(j).array() - traj.col(j).mean()).square().mean();
  // Standardized noise pooled over seeds; its mean has standard error 1/sqrt(count).
  double pooled = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    const Eigen::MatrixXd noise = inject_noise(traj, 30.0, rng) - traj;
    for (int j = 0; j < 2; ++j) {
      const double snr = 10.0 * std::log10(signal[j] / noise.col(j).array().square().mean());
      CHECK(std::abs(snr - 30.0) < 1.0);
      pooled += noise.col(j).sum() / std::sqrt(signal[j] / 1000.0);
    }
  }
  const double count = 2.0 * seeds * t;
  CHECK(std::abs(pooled / count) < 3.0 / std::sqrt(count));

  Rng rng(2);
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(50, 1, 2.0);
  CHECK(inject_noise(flat, 30.0, rng) == flat);
  CHECK_THROWS_AS(inject_noise(Eigen::MatrixXd(0, 2), 30.0, rng), ArgumentError);
}

TEST_CASE("synthesize noise keeps the source situation") {
  const auto experts = task(3, 4);
  const TpGmm model = fit(experts, 4, default_em_config(Mode::TimeBased));
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Demonstration cand = synthesize(Method::Noise, experts, model, {}, 30.0, rng);
    bool matched = false;
    for (const auto& e : experts) {
      if (e.situation() == cand.situation()) {
        matched = true;
        CHECK(cand.inputs() == e.inputs());
        CHECK(cand.positions() != e.positions());
      }
    }
    CHECK(matched);
  }
}

TEST_CASE("synthesize rf samples within limits and replays the model") {
  const auto experts = task(3, 6);
  const TpGmm model = fit(experts, 4, default_em_config(Mode::TimeBased));
  std::vector<Situation> sits;
  for (const auto& e : experts) sits.push_back(e.situation());
  const auto limits = limits_from_situations(sits);
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) {
    const Demonstration cand = synthesize(Method::Rf, experts, model, limits, 30.0, a);
    CHECK(cand == synthesize(Method::Rf, experts, model, limits, 30.0, b));
    for (std::size_t n = 0; n < limits.size(); ++n) CHECK(limits[n].contains(cand.situation()[n], 1e-9));
    CHECK(cand.positions() == reproduce_time_based(model, cand.situation(), cand.inputs().col(0)));

    const Demonstration noisy = synthesize(Method::RfNoise, experts, model, limits, 30.0, a);
    CHECK(noisy == synthesize(Method::RfNoise, experts, model, limits, 30.0, b));
    const Eigen::MatrixXd clean = reproduce_time_based(model, noisy.situation(), noisy.inputs().col(0));
    CHECK(noisy.positions() != clean);
    CHECK(test::max_abs_diff(noisy.positions(), clean) < 0.5);
  }
  CHECK_THROWS_AS(synthesize(Method::Rf, experts, model, {}, 30.0, a), ArgumentError);
}

TEST_CASE("synthesize rf with degenerate limits replays an expert situation") {
  for (const Mode mode : {Mode::TimeBased, Mode::TrajectoryBased}) {
    const auto data = mode == Mode::TimeBased ? generate_2d_task(2, 40, 8) : generate_3d_task(2, 40, 8);
    const TpGmm model = fit(data.demos, 3, default_em_config(mode));
    std::vector<Situation> only{data.demos[1].situation()};
    const auto limits = limits_from_situations(only, 0.0);
    const std::vector<Demonstration> source{data.demos[1]};
    Rng rng(9);
    const Demonstration cand = synthesize(Method::Rf, source, model, limits, 30.0, rng);
    const Eigen::MatrixXd expected = reproduce_like(model, data.demos[1]);
    CHECK(test::max_abs_diff(cand.positions(), expected) < 1e-9);
  }
}

TEST_CASE("run_augmentation rejects a cost-raising candidate") {
  const auto experts = task(3, 10);
  AugmentConfig cfg = small_config(Method::Noise, 1);
  cfg.max_iters = 1;
  cfg.snr_db = -20.0;
  const AugmentResult r = run_augmentation(experts, {}, cfg);
  CHECK(r.model == fit(experts, cfg.components, cfg.em));
  CHECK(r.log.discarded_count == 1);
  REQUIRE(r.log.iterations.size() == 1);
  CHECK_FALSE(r.log.iterations[0].accepted);
  CHECK(r.log.iterations[0].cost_after > r.log.iterations[0].cost_before);
  CHECK(r.log.iterations[0].n_demos == 3);
  CHECK(r.dataset.size() == 3);
  CHECK(r.log.final_cost == r.log.initial_cost);
}

TEST_CASE("run_augmentation invariants and replay") {
  const auto experts = task(3, 11);
  for (Method m : {Method::Noise, Method::Rf, Method::RfNoise}) {
    const AugmentConfig cfg = small_config(m, 3);
    const AugmentResult r = run_augmentation(experts, {}, cfg);
    double last = r.log.initial_cost;
    int n = 3;
    int rejected = 0;
    for (const auto& rec : r.log.iterations) {
      CHECK(rec.method == m);
      CHECK(rec.cost_before == last);
      if (rec.accepted) {
        CHECK(rec.cost_after < rec.cost_before);
        last = rec.cost_after;
        ++n;
      } else {
        ++rejected;
      }
      CHECK(rec.n_demos == n);
    }
    CHECK(r.log.final_cost == last);
    CHECK(r.log.final_cost <= r.log.initial_cost);
    CHECK(r.log.discarded_count == rejected);
    CHECK(static_cast<int>(r.log.iterations.size()) <= cfg.max_iters);
    CHECK(n <= cfg.max_demos);
    CHECK(static_cast<int>(r.dataset.size()) == n);
    for (int i = 0; i < 3; ++i) CHECK(r.dataset[i] == experts[i]);
    CHECK(selection_cost(r.model, experts).mean == r.log.final_cost);
    CHECK(run_augmentation(experts, {}, cfg).log == r.log);
  }
}

TEST_CASE("run_augmentation scores generalization on the validation set") {
  const auto all = task(5, 12);
  const std::vector<Demonstration> train(all.begin(), all.begin() + 3);
  const std::vector<Demonstration> validation(all.begin() + 3, all.end());
  AugmentConfig cfg = small_config(Method::Rf, 4);
  cfg.selection = Selection::Generalization;
  const AugmentResult r = run_augmentation(train, validation, cfg);
  CHECK(r.log.initial_cost == selection_cost(fit(train, 4, cfg.em), validation).mean);
  CHECK(selection_cost(r.model, validation).mean == r.log.final_cost);
  CHECK_THROWS_AS(run_augmentation(train, {}, cfg), ArgumentError);
}

TEST_CASE("run_augmentation argument checks") {
  const auto experts = task(3, 13);
  AugmentConfig cfg = small_config(Method::Rf, 0);
  cfg.max_demos = 3;
  CHECK_THROWS_AS(run_augmentation(experts, {}, cfg), ArgumentError);
  cfg = small_config(Method::Rf, 0);
  cfg.max_iters = 0;
  CHECK_THROWS_AS(run_augmentation(experts, {}, cfg), ArgumentError);
  const std::vector<Demonstration> one(experts.begin(), experts.begin() + 1);
  CHECK_THROWS_AS(run_augmentation(one, {}, small_config(Method::Rf, 0)), ArgumentError);
}
