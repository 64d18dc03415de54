// Copyright 2026 The nlpr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "nlpr/optimizer.hpp"
#include "oracles.hpp"

using namespace nlpr;

TEST_CASE("project_box clamps and is idempotent") {
  Image x(2, 1);
  x(0, 0) = 0.0;
  x(0, 1) = 10.0;
  const Image p = project_box(x, 2.0, 5.0);
  CHECK(p(0, 0) == 2.0);
  CHECK(p(0, 1) == 5.0);
  const Image pp = project_box(p, 2.0, 5.0);
  for (size_t i = 0; i < p.size(); ++i) CHECK(pp.values()[i] == p.values()[i]);

  const Image inside = oracle::uniform_random(4, 4, 80, 2.5, 4.5);
  const Image q = project_box(inside, 2.0, 5.0);
  for (size_t i = 0; i < q.size(); ++i) CHECK(q.values()[i] == inside.values()[i]);
}

TEST_CASE("project_box is the L2-nearest feasible point") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> wide(-50.0, 400.0);
  std::uniform_real_distribution<double> feas(2.0, 5.0);
  for (int rep = 0; rep < 10; ++rep) {
    Image x(6, 6);
    for (auto& v : x.values()) v = wide(rng);
    const Image p = project_box(x, 2.0, 5.0);
    double dp = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
      dp += (p.values()[i] - x.values()[i]) * (p.values()[i] - x.values()[i]);
    for (int trial = 0; trial < 100; ++trial) {
      double dy = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        const double y = feas(rng);
        dy += (y - x.values()[i]) * (y - x.values()[i]);
      }
      CHECK(dp <= dy + 1e-9);
    }
  }
}

TEST_CASE("project_box_mean shifts uniformly when nothing clips") {
  Image x(2, 1, 1.0);
  const Image p = project_box_mean(x, 0.0, 4.0, 2.0);
  CHECK(p(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p(0, 1) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("project_box_mean clips against the box while hitting the mean") {
  Image x(2, 1);
  x(0, 0) = 0.0;
  x(0, 1) = 10.0;
  const Image p = project_box_mean(x, 0.0, 4.0, 3.0);
  CHECK(p(0, 0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(p(0, 1) == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("project_box_mean keeps feasible inputs bit-identical") {
  Image x(2, 2);
  x(0, 0) = 1.0;
  x(0, 1) = 3.0;
  x(1, 0) = 2.0;
  x(1, 1) = 2.0;
  const Image p = project_box_mean(x, 0.0, 4.0, 2.0);
  for (size_t i = 0; i < x.size(); ++i) CHECK(p.values()[i] == x.values()[i]);
}

TEST_CASE("project_box_mean hits the target mean within tolerance") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> wide(-100.0, 700.0);
  for (int rep = 0; rep < 20; ++rep) {
    Image x(9, 7);
    for (auto& v : x.values()) v = wide(rng);
    const double target = 5.0 + 295.0 * (rep + 0.5) / 20.0;
    const Image p = project_box_mean(x, 5.0, 300.0, target);
    CHECK(std::abs(p.mean() - target) <= 1e-6 * 295.0);
    for (double v : p.values()) {
      CHECK(v >= 5.0);
      CHECK(v <= 300.0);
    }
  }
  CHECK_THROWS_AS(project_box_mean(Image(2, 2, 1.0), 5.0, 300.0, 4.0), config_error);
  CHECK_THROWS_AS(project_box_mean(Image(2, 2, 1.0), 5.0, 300.0, 301.0), config_error);
}

TEST_CASE("minimize keeps a feasible scene at distance ~0 when started there") {
  const NlpParams params;
  OptimizerConfig cfg;
  cfg.max_iters = 40;
  const LuminanceImage s(oracle::smooth_scene(24, 24, 90, 10.0, 290.0));
  const MinimizeResult r = minimize(s, BoxConstraint{5.0, 300.0}, params, {}, cfg, s);
  CHECK(r.trace.final_distance <= 1e-6);
  CHECK(r.trace.converged);
  CHECK(r.trace.final_distance <= r.trace.samples.front().distance);
}

TEST_CASE("tone mapping improves on the rescale baseline and stays feasible") {
  const NlpParams params;
  OptimizerConfig cfg;
  cfg.max_iters = 250;
  const LuminanceImage scene(oracle::smooth_scene(32, 32, 91, 0.78, 16200.0));
  const LuminanceImage baseline = affine_rescale(scene, 5.0, 300.0);
  const double d_baseline = nlpd(scene, baseline, params).total;

  const MinimizeResult r = minimize(scene, BoxConstraint{5.0, 300.0}, params, {}, cfg);
  for (double v : r.image.grid().values()) {
    CHECK(v >= 5.0);
    CHECK(v <= 300.0);
  }
  CHECK(r.trace.final_distance < d_baseline);
  CHECK(r.trace.final_distance <= r.trace.samples.front().distance);
  // trace records every iteration
  CHECK(r.trace.samples.size() >= 2);
  CHECK(r.trace.samples.front().iter == 0);
}

TEST_CASE("mean-constrained minimization hits the target mean") {
  const NlpParams params;
  OptimizerConfig cfg;
  cfg.max_iters = 150;
  const LuminanceImage scene(oracle::smooth_scene(24, 24, 92, 0.78, 16200.0));
  for (double target : {60.0, 120.0}) {
    const MinimizeResult r =
        minimize(scene, BoxMeanConstraint{5.0, 300.0, target}, params, {}, cfg);
    CHECK(std::abs(r.image.grid().mean() - target) / target <= 1e-3);
    const LuminanceImage resc = LuminanceImage(
        project_box_mean(affine_rescale(scene, 5.0, 300.0).grid(), 5.0, 300.0, target));
    CHECK(r.trace.final_distance < nlpd(scene, resc, params).total);
  }
}

TEST_CASE("minimize is deterministic") {
  const NlpParams params;
  OptimizerConfig cfg;
  cfg.max_iters = 30;
  const LuminanceImage scene(oracle::smooth_scene(16, 16, 93, 1.0, 5000.0));
  const MinimizeResult a = minimize(scene, BoxConstraint{5.0, 300.0}, params, {}, cfg);
  const MinimizeResult b = minimize(scene, BoxConstraint{5.0, 300.0}, params, {}, cfg);
  REQUIRE(a.trace.samples.size() == b.trace.samples.size());
  for (size_t i = 0; i < a.trace.samples.size(); ++i)
    CHECK(a.trace.samples[i].distance == b.trace.samples[i].distance);
  for (size_t i = 0; i < a.image.grid().size(); ++i)
    CHECK(a.image.grid().values()[i] == b.image.grid().values()[i]);
}

TEST_CASE("exhausted iteration budget returns best-so-far unconverged") {
  const NlpParams params;
  OptimizerConfig cfg;
  cfg.max_iters = 3;
  const LuminanceImage scene(oracle::smooth_scene(16, 16, 94, 0.78, 16200.0));
  const MinimizeResult r = minimize(scene, BoxConstraint{5.0, 300.0}, params, {}, cfg);
  CHECK_FALSE(r.trace.converged);
  CHECK(r.trace.final_distance <= r.trace.samples.front().distance);
}

TEST_CASE("discrete constraints are rejected by minimize") {
  const NlpParams params;
  const LuminanceImage scene(Image(8, 8, 50.0));
  CHECK_THROWS_AS(
      minimize(scene, DiscreteLevelsConstraint{{5.0, 300.0}}, params, {}, {}),
      config_error);
}

TEST_CASE("trace serializes to CSV with the documented columns") {
  OptimizationTrace t;
  t.samples.push_back({0, 0.5, 100.0});
  t.samples.push_back({1, 0.25, 99.5});
  std::ostringstream os;
  write_trace_csv(t, os);
  CHECK(os.str() == "iter,distance,mean_luminance\n0,0.5,100\n1,0.25,99.5\n");
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = {};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = {};
  CHECK(cfg.effective_step(5.0, 300.0) == doctest::Approx(0.1 * 295.0 / 300.0));
  cfg.step_size = 0.5;
  CHECK(cfg.effective_step(5.0, 300.0) == 0.5);
}
