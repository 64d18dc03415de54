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

#include <doctest.h>

#include "nlpr/config_json.hpp"
#include "nlpr/nlp.hpp"
#include "nlpr/nlpd.hpp"
#include "oracles.hpp"

using namespace nlpr;

TEST_CASE("front nonlinearity fixed points and scalar evaluation") {
  Image s(1, 3);
  s(0, 0) = 1.0;
  s(0, 1) = 0.0;
  s(0, 2) = 16200.0;
  const double gamma = 1.0 / 2.6;
  const Image x = front_nonlinearity(s, gamma);
  CHECK(x(0, 0) == 1.0);
  CHECK(x(0, 1) == 0.0);
  CHECK(x(0, 2) == doctest::Approx(std::pow(16200.0, gamma)).epsilon(1e-14));
  CHECK(x(0, 2) == doctest::Approx(41.6).epsilon(0.01));

  Image neg(1, 1, -0.5);
  CHECK_THROWS_AS(front_nonlinearity(neg, gamma), domain_error);

  // monotone increasing
  Image sorted(1, 4);
  sorted(0, 0) = 0.1;
  sorted(0, 1) = 2.0;
  sorted(0, 2) = 70.0;
  sorted(0, 3) = 2000.0;
  const Image fx = front_nonlinearity(sorted, gamma);
  for (int i = 1; i < 4; ++i) CHECK(fx(0, i) > fx(0, i - 1));
}

TEST_CASE("normalize_channel basics and dense-convolution oracle") {
  const NlpParams p;
  CHECK(normalize_channel(Image(4, 4, 0.0), p.p_band, p.sigma_band)(2, 2) == 0.0);

  // ablation identity: P = 0, sigma = 1
  const Image z = oracle::uniform_random(6, 5, 21, -2.0, 2.0);
  const Image idy = normalize_channel(z, 0.0, 1.0);
  for (size_t i = 0; i < z.size(); ++i) CHECK(idy.values()[i] == z.values()[i]);

  // 3x3 ones against the dense oracle (mirror boundary makes every local
  // sum equal to the full kernel sum, 1.01)
  const Image ones(3, 3, 1.0);
  const Image y = normalize_channel(ones, p.p_band, p.sigma_band);
  oracle::Grid kernel(5, std::vector<double>(5));
  for (int dy = 0; dy < 5; ++dy)
    for (int dx = 0; dx < 5; ++dx) kernel[dy][dx] = p.p_band.weights[dy * 5 + dx];
  const oracle::Grid conv = oracle::conv2(oracle::to_grid(ones), kernel);
  for (int yy = 0; yy < 3; ++yy)
    for (int xx = 0; xx < 3; ++xx)
      CHECK(y(yy, xx) ==
            doctest::Approx(1.0 / (p.sigma_band + conv[yy][xx])).epsilon(1e-14));
  CHECK(y(1, 1) == doctest::Approx(1.0 / (0.17 + 1.01)).epsilon(1e-12));

  // random grid against the same oracle
  const Image z2 = oracle::uniform_random(11, 8, 22, -3.0, 3.0);
  const Image y2 = normalize_channel(z2, p.p_band, p.sigma_band);
  oracle::Grid absz = oracle::to_grid(z2);
  for (auto& row : absz)
    for (double& v : row) v = std::abs(v);
  const oracle::Grid conv2 = oracle::conv2(absz, kernel);
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 11; ++xx)
      CHECK(y2(yy, xx) ==
            doctest::Approx(z2(yy, xx) / (p.sigma_band + conv2[yy][xx])).epsilon(1e-12));
}

TEST_CASE("published band weights are used verbatim") {
  const Kernel2D& k = default_band_weights();
  REQUIRE(k.radius == 2);
  const double expected_row_sums[5] = {0.21, 0.18, 0.23, 0.18, 0.21};
  double total = 0.0;
  for (int r = 0; r < 5; ++r) {
    double row = 0.0;
    for (int c = 0; c < 5; ++c) row += k.weights[r * 5 + c];
    CHECK(row == doctest::Approx(expected_row_sums[r]).epsilon(1e-12));
    total += row;
  }
  CHECK(total == doctest::Approx(1.01).epsilon(1e-12));  // no renormalization
  CHECK(k.at(0, 0) == 0.05);
  CHECK(k.at(-2, -2) == 0.04);
  CHECK(k.at(-1, -1) == 0.03);
}

TEST_CASE("transform of a constant image") {
  const double c = 42.0;
  const NlpParams p;
  const NlpRepresentation rep = nlp_transform(LuminanceImage::constant(32, 32, c), p);
  REQUIRE(rep.n_channels() == 3);
  for (int k = 0; k + 1 < rep.n_channels(); ++k)
    for (double v : rep.channels[k].values()) CHECK(std::abs(v) <= 1e-12);
  const double cg = std::pow(c, p.gamma);
  const double expect = cg / (p.sigma_low + p.p_low * cg);
  for (double v : rep.channels.back().values())
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("disabling the multiscale decomposition leaves one lowpass channel") {
  const NlpParams p;
  AblationConfig ab;
  ab.disable_multiscale = true;
  const LuminanceImage s(oracle::uniform_random(16, 16, 31, 1.0, 200.0));
  const NlpRepresentation rep = nlp_transform(s, p, ab);
  REQUIRE(rep.n_channels() == 1);
  const Image expect =
      normalize_channel(front_nonlinearity(s.grid(), p.gamma), p.p_low, p.sigma_low);
  for (size_t i = 0; i < expect.size(); ++i)
    CHECK(rep.channels[0].values()[i] == doctest::Approx(expect.values()[i]).epsilon(1e-14));
}

TEST_CASE("transform matches the straight-line reference implementation") {
  const NlpParams p;
  const Image img = oracle::uniform_random(16, 16, 33, 0.5, 300.0);
  const NlpRepresentation rep = nlp_transform(LuminanceImage(img), p);

  oracle::Grid kernel(5, std::vector<double>(5));
  for (int dy = 0; dy < 5; ++dy)
    for (int dx = 0; dx < 5; ++dx) kernel[dy][dx] = p.p_band.weights[dy * 5 + dx];
  const oracle::NlpOut ref =
      oracle::nlp(oracle::to_grid(img), p.gamma, 2, {0.05, 0.25, 0.4, 0.25, 0.05},
                  kernel, p.sigma_band, p.p_low, p.sigma_low);
  REQUIRE(rep.n_channels() == 2);
  for (int k = 0; k < 2; ++k) {
    const Image& ch = rep.channels[k];
    double max_abs = 0.0;
    for (int y = 0; y < ch.height(); ++y)
      for (int x = 0; x < ch.width(); ++x)
        max_abs = std::max(max_abs, std::abs(ch(y, x) - ref.channels[k][y][x]));
    CHECK(max_abs <= 1e-10);
  }
}

TEST_CASE("bandpass responses are bounded by |z|/sigma") {
  const NlpParams p;
  const LuminanceImage s(oracle::uniform_random(24, 24, 35, 0.0, 1000.0));
  const TransformInternals ctx = nlp_transform_internals(s, p);
  for (int k = 0; k + 1 < ctx.n_channels; ++k)
    for (size_t i = 0; i < ctx.z[k].size(); ++i) {
      CHECK(std::abs(ctx.rep.channels[k].values()[i]) <=
            std::abs(ctx.z[k].values()[i]) / p.sigma_band + 1e-15);
      CHECK(std::isfinite(ctx.rep.channels[k].values()[i]));
    }
}

TEST_CASE("transform is deterministic") {
  const NlpParams p;
  const LuminanceImage s(oracle::uniform_random(20, 14, 36, 0.0, 500.0));
  const NlpRepresentation a = nlp_transform(s, p);
  const NlpRepresentation b = nlp_transform(s, p);
  for (int k = 0; k < a.n_channels(); ++k)
    for (size_t i = 0; i < a.channels[k].size(); ++i)
      CHECK(a.channels[k].values()[i] == b.channels[k].values()[i]);
}

TEST_CASE("disabling normalization reduces the transform to pyramid of front") {
  const NlpParams p;
  AblationConfig ab;
  ab.disable_normalization = true;
  const LuminanceImage s(oracle::uniform_random(16, 16, 37, 1.0, 100.0));
  const NlpRepresentation rep = nlp_transform(s, p, ab);
  const PyramidStack stack =
      build_pyramid(front_nonlinearity(s.grid(), p.gamma), rep.n_channels(), p.l_taps);
  for (size_t k = 0; k + 1 < rep.channels.size(); ++k)
    for (size_t i = 0; i < rep.channels[k].size(); ++i)
      CHECK(rep.channels[k].values()[i] == stack.bands[k].values()[i]);
  for (size_t i = 0; i < rep.channels.back().size(); ++i)
    CHECK(rep.channels.back().values()[i] == stack.lowpass.values()[i]);
}

TEST_CASE("with front and normalization disabled the transform is linear") {
  const NlpParams p;
  AblationConfig ab;
  ab.disable_front_nonlinearity = true;
  ab.disable_normalization = true;
  const Image a = oracle::uniform_random(16, 16, 38, 0.0, 10.0);
  const Image b = oracle::uniform_random(16, 16, 39, 0.0, 10.0);
  Image mix(16, 16);
  for (size_t i = 0; i < mix.size(); ++i)
    mix.data()[i] = 0.3 * a.data()[i] + 0.7 * b.data()[i];
  const NlpRepresentation rm = nlp_transform(LuminanceImage(mix), p, ab);
  const NlpRepresentation ra = nlp_transform(LuminanceImage(a), p, ab);
  const NlpRepresentation rb = nlp_transform(LuminanceImage(b), p, ab);
  for (int k = 0; k < rm.n_channels(); ++k)
    for (size_t i = 0; i < rm.channels[k].size(); ++i) {
      const double expect =
          0.3 * ra.channels[k].values()[i] + 0.7 * rb.channels[k].values()[i];
      CHECK(rm.channels[k].values()[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("doubling the scene changes the representation") {
  const NlpParams p;
  const Image img = oracle::uniform_random(32, 32, 41, 1.0, 100.0);
  Image twice = img;
  for (auto& v : twice.values()) v *= 2.0;
  CHECK(nlpd(LuminanceImage(img), LuminanceImage(twice), p).total > 0.0);
}

TEST_CASE("default level count tracks the image size, capped at 6") {
  CHECK(default_n_levels(256, 256) == 6);
  CHECK(default_n_levels(31, 47) == 2);
  CHECK(default_n_levels(4096, 4096) == 6);
  CHECK(default_n_levels(8, 8) == 1);
  CHECK(default_n_levels(64, 512) == 4);
}

TEST_CASE("parameters load from JSON with exact keys") {
  const JsonConfig def = config_from_json_text("{}");
  CHECK(def.params.gamma == doctest::Approx(1.0 / 2.6));
  CHECK(def.params.sigma_band == 0.17);
  CHECK(def.params.sigma_low == 4.86);
  CHECK(def.params.p_low == 1.0);
  CHECK(def.params.alpha == 2.0);
  CHECK(def.params.beta == 0.6);
  CHECK_FALSE(def.has_optimizer);

  const JsonConfig j = config_from_json_text(R"({
    "gamma": 0.5, "sigma_band": 0.2, "n_levels": 3, "alpha": 2.0, "beta": 0.5,
    "l_taps": [0.25, 0.5, 0.25],
    "p_band": [[0.1, 0.1, 0.1], [0.1, 0.2, 0.1], [0.1, 0.1, 0.1]],
    "p_low": 2.0, "sigma_low": 3.0,
    "optimizer": {"max_iters": 50, "step_size": 0.05}
  })");
  CHECK(j.params.gamma == 0.5);
  CHECK(j.params.n_levels == 3);
  CHECK(j.params.l_taps.taps.size() == 3);
  CHECK(j.params.p_band.radius == 1);
  CHECK(j.has_optimizer);
  CHECK(j.optimizer.max_iters == 50);
  CHECK(j.optimizer.step_size == 0.05);

  CHECK_THROWS_AS(config_from_json_text(R"({"gammma": 0.5})"), config_error);
  CHECK_THROWS_AS(config_from_json_text(R"({"optimizer": {"steps": 3}})"), config_error);
  CHECK_THROWS_AS(config_from_json_text("not json"), config_error);
  CHECK_THROWS_AS(config_from_json_text(R"({"sigma_band": -1})"), config_error);
}
