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

// Projected first-order minimization of the perceptual distance over
// display-feasible images: Adam steps in strict alternation with Euclidean
// projection onto the constraint set.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/nlpd.hpp"

namespace nlpr {

struct BoxConstraint {
  double i_min = 5.0;
  double i_max = 300.0;
  void validate() const {
    if (!(i_min >= 0.0) || !(i_min < i_max))
      throw config_error("box constraint requires 0 <= i_min < i_max");
  }
};

struct BoxMeanConstraint {
  double i_min = 5.0;
  double i_max = 300.0;
  double i_mean = 100.0;
  void validate() const {
    if (!(i_min >= 0.0) || !(i_min < i_max))
      throw config_error("box constraint requires 0 <= i_min < i_max");
    if (!(i_mean >= i_min) || !(i_mean <= i_max))
      throw config_error("target mean " + std::to_string(i_mean) +
                         " is infeasible for box [" + std::to_string(i_min) + ", " +
                         std::to_string(i_max) + "]");
  }
};

struct DiscreteLevelsConstraint {
  std::vector<double> levels;  // strictly increasing cd/m^2
  void validate() const {
    if (levels.size() < 2) throw config_error("discrete constraint needs >= 2 levels");
    for (size_t i = 0; i < levels.size(); ++i) {
      if (!(levels[i] >= 0.0) || !std::isfinite(levels[i]))
        throw config_error("levels must be finite and nonnegative");
      if (i > 0 && !(levels[i] > levels[i - 1]))
        throw config_error("levels must be strictly increasing");
    }
  }
};

using ConstraintSpec =
    std::variant<BoxConstraint, BoxMeanConstraint, DiscreteLevelsConstraint>;

struct OptimizerConfig {
  int max_iters = 2000;
  double step_size = 0.0;  // 0 = auto: 0.1 * (i_max - i_min) / 300
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double tol_rel = 1e-6;   // relative best-D change over a 20-iteration window
  long seed = 0;           // reserved for randomized tie-breaking; default path
                           // is fully deterministic

  void validate() const {
    if (max_iters < 1) throw config_error("max_iters must be >= 1");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw config_error("Adam moment parameters must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
    if (!(step_size >= 0.0)) throw config_error("step size must be >= 0");
    if (!(tol_rel >= 0.0)) throw config_error("tol_rel must be >= 0");
  }
  double effective_step(double i_min, double i_max) const {
    return step_size > 0.0 ? step_size : 0.1 * (i_max - i_min) / 300.0;
  }
};

struct OptimizationTrace {
  struct Sample {
    int iter = 0;
    double distance = 0.0;
    double mean_luminance = 0.0;
  };
  std::vector<Sample> samples;
  double final_distance = 0.0;
  bool converged = false;
};

inline void write_trace_csv(const OptimizationTrace& trace, std::ostream& os) {
  os << "iter,distance,mean_luminance\n";
  char buf[96];
  for (const auto& s : trace.samples) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", s.iter, s.distance,
                  s.mean_luminance);
    os << buf;
  }
}

inline void write_trace_csv(const OptimizationTrace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open trace file '" + path + "' for writing");
  write_trace_csv(trace, f);
}

// Per-pixel clamp: the L2-nearest point of the box, idempotent.
inline Image project_box(const Image& x, double i_min, double i_max) {
  BoxConstraint{i_min, i_max}.validate();
  Image out(x.width(), x.height());
  for (size_t i = 0; i < x.size(); ++i)
    out.data()[i] = std::clamp(x.data()[i], i_min, i_max);
  return out;
}

// Exact L2 projection onto box ∩ {mean = i_mean}: clamp(x + delta) with the
// scalar delta found by bisection. The clamped mean is nondecreasing in
// delta, which the loop also verifies.
inline Image project_box_mean(const Image& x, double i_min, double i_max,
                              double i_mean) {
  BoxMeanConstraint{i_min, i_max, i_mean}.validate();
  const double tol = 1e-6 * (i_max - i_min);
  const size_t n = x.size();

  const auto clamped_mean = [&](double delta) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::clamp(x.data()[i] + delta, i_min, i_max);
    return s / static_cast<double>(n);
  };

  // Fast path keeps already-feasible inputs bit-identical.
  {
    bool in_box = true;
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double v = x.data()[i];
      if (v < i_min || v > i_max) {
        in_box = false;
        break;
      }
      s += v;
    }
    if (in_box && std::abs(s / static_cast<double>(n) - i_mean) <= tol) return x;
  }

  double lo = i_min - x.max_value();
  double hi = i_max - x.min_value();
  double mean_lo = clamped_mean(lo);  // == i_min
  double mean_hi = clamped_mean(hi);  // == i_max
  double delta = 0.0;
  for (int it = 0; it < 200; ++it) {
    delta = 0.5 * (lo + hi);
    const double m = clamped_mean(delta);
    if (m < mean_lo - 1e-12 || m > mean_hi + 1e-12)
      throw numeric_error("projection bisection lost monotonicity");
    if (std::abs(m - i_mean) <= tol) break;
    if (m < i_mean) {
      lo = delta;
      mean_lo = m;
    } else {
      hi = delta;
      mean_hi = m;
    }
  }
  Image out(x.width(), x.height());
  for (size_t i = 0; i < n; ++i)
    out.data()[i] = std::clamp(x.data()[i] + delta, i_min, i_max);
  return out;
}

struct MinimizeResult {
  LuminanceImage image;
  OptimizationTrace trace;
};

// Minimizes D(S, I) over the box (optionally mean-constrained) feasible set.
// The default initialization is the affine rescale of S into the box,
// projected through the mean constraint when present. Adam moments are not
// reset on projection, and the best feasible iterate seen is returned, so
// the final distance never exceeds the initial one.
inline MinimizeResult minimize(const LuminanceImage& scene, const ConstraintSpec& cons,
                               const NlpParams& params, const AblationConfig& ablate,
                               const OptimizerConfig& cfg,
                               const std::optional<LuminanceImage>& init = {}) {
  cfg.validate();
  if (std::holds_alternative<DiscreteLevelsConstraint>(cons))
    throw config_error("discrete level sets are handled by the dither module");

  double i_min, i_max;
  const BoxMeanConstraint* mean_cons = std::get_if<BoxMeanConstraint>(&cons);
  if (mean_cons) {
    mean_cons->validate();
    i_min = mean_cons->i_min;
    i_max = mean_cons->i_max;
  } else {
    const auto& box = std::get<BoxConstraint>(cons);
    box.validate();
    i_min = box.i_min;
    i_max = box.i_max;
  }
  const auto project = [&](const Image& img) {
    return mean_cons ? project_box_mean(img, i_min, i_max, mean_cons->i_mean)
                     : project_box(img, i_min, i_max);
  };

  Image cur;
  if (init) {
    if (!init->grid().same_dims(scene.grid()))
      throw dimension_error("initialization dimensions do not match the scene");
    cur = project(init->grid());
  } else {
    cur = project(affine_rescale(scene, i_min, i_max).grid());
  }

  const NlpRepresentation reference = nlp_transform(scene, params, ablate);
  const double step = cfg.effective_step(i_min, i_max);

  OptimizationTrace trace;
  auto evaluate = [&](const Image& img) {
    return nlpd_value_and_gradient(reference, LuminanceImage(img), params, ablate);
  };

  ValueAndGradient vg = evaluate(cur);
  trace.samples.push_back({0, vg.distance.total, cur.mean()});
  Image best = cur;
  double best_d = vg.distance.total;

  const size_t n = cur.size();
  std::vector<double> m(n, 0.0), v(n, 0.0);
  double beta1_pow = 1.0, beta2_pow = 1.0;
  constexpr int kWindow = 20;
  std::deque<double> best_history{best_d};
  bool converged = false;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    double gsum = 0.0;
    for (size_t i = 0; i < n; ++i) gsum += vg.gradient.data()[i];
    if (!std::isfinite(vg.distance.total) || !std::isfinite(gsum))
      throw numeric_error("non-finite objective or gradient at iteration " +
                          std::to_string(t - 1));

    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    const double m_corr = 1.0 / (1.0 - beta1_pow);
    const double v_corr = 1.0 / (1.0 - beta2_pow);
    Image stepped(cur.width(), cur.height());
    for (size_t i = 0; i < n; ++i) {
      const double g = vg.gradient.data()[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double update = (m[i] * m_corr) / (std::sqrt(v[i] * v_corr) + cfg.epsilon);
      stepped.data()[i] = cur.data()[i] - step * update;
    }
    cur = project(stepped);
    vg = evaluate(cur);
    trace.samples.push_back({t, vg.distance.total, cur.mean()});
    if (vg.distance.total < best_d) {
      best_d = vg.distance.total;
      best = cur;
    }

    best_history.push_back(best_d);
    if (static_cast<int>(best_history.size()) > kWindow + 1) best_history.pop_front();
    if (static_cast<int>(best_history.size()) == kWindow + 1) {
      const double before = best_history.front();
      if (before - best_d <= cfg.tol_rel * std::max(before, 1e-30)) {
        converged = true;
        break;
      }
    }
  }

  trace.final_distance = best_d;
  trace.converged = converged;
  return {LuminanceImage(std::move(best)), std::move(trace)};
}

}  // namespace nlpr
