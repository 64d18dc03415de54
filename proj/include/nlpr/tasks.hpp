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

// End-to-end rendering workflows binding acquisition specs, constraints and
// the optimizer, plus the energy-tradeoff curve, detail enhancement and the
// transform-component ablation suite.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlpr/dither.hpp"
#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/nlpd.hpp"
#include "nlpr/optimizer.hpp"

namespace nlpr {

struct DitherMode {
  enum class Kind { Auto, Exact, Windowed };
  Kind kind = Kind::Auto;
  int radius = 0;  // Windowed only; Auto derives the receptive-field radius
};

struct RenderTask {
  AcquisitionSpec acquisition = CalibratedHdr{};
  ConstraintSpec constraint = BoxConstraint{5.0, 300.0};
  DisplayModel display{};
  OptimizerConfig optimizer{};
  AblationConfig ablation{};
  DitherMode dither_mode{};
  std::string preset_name;

  void validate() const {
    display.validate();
    const double tol = 1e-9 * display.range();
    const auto check_box = [&](double lo, double hi) {
      if (lo < display.i_min - tol || hi > display.i_max + tol)
        throw config_error("constraint bounds [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] exceed the display range [" +
                           std::to_string(display.i_min) + ", " +
                           std::to_string(display.i_max) + "]");
    };
    if (const auto* box = std::get_if<BoxConstraint>(&constraint)) {
      box->validate();
      check_box(box->i_min, box->i_max);
    } else if (const auto* bm = std::get_if<BoxMeanConstraint>(&constraint)) {
      bm->validate();
      check_box(bm->i_min, bm->i_max);
    } else {
      const auto& lv = std::get<DiscreteLevelsConstraint>(constraint);
      lv.validate();
      check_box(lv.levels.front(), lv.levels.back());
    }
  }
};

struct RenderResult {
  LuminanceImage image;
  LuminanceImage baseline;  // linear-rescale (or Floyd-Steinberg for discrete sets)
  OptimizationTrace trace;
  double d_optimized = 0.0;
  double d_baseline = 0.0;
};

// Builds scene luminances per the acquisition spec, then optimizes under the
// task's constraint. The feasible baseline is always produced for
// comparison and is the optimizer's initializer for continuous constraints.
inline RenderResult render(const Image& source, const RenderTask& task,
                           const NlpParams& params) {
  task.validate();
  params.validate();
  const LuminanceImage scene = apply_acquisition(source, task.acquisition);

  if (const auto* levels_cons = std::get_if<DiscreteLevelsConstraint>(&task.constraint)) {
    const auto& levels = levels_cons->levels;
    MinimizeResult cont =
        minimize(scene, BoxConstraint{levels.front(), levels.back()}, params,
                 task.ablation, task.optimizer);
    DitherConfig dcfg;
    dcfg.levels = levels;
    switch (task.dither_mode.kind) {
      case DitherMode::Kind::Exact:
        break;
      case DitherMode::Kind::Windowed:
        dcfg.window_radius = task.dither_mode.radius;
        break;
      case DitherMode::Kind::Auto:
        if (std::max(scene.width(), scene.height()) > 128)
          dcfg.window_radius = dither_receptive_field_radius(
              params, scene.width(), scene.height(), task.ablation);
        break;
    }
    LuminanceImage dithered =
        greedy_dither(scene, dcfg, params, task.ablation, cont.image);
    LuminanceImage fs = floyd_steinberg(scene, levels);
    RenderResult out{std::move(dithered), std::move(fs), std::move(cont.trace), 0.0,
                     0.0};
    out.d_optimized = nlpd(scene, out.image, params, task.ablation).total;
    out.d_baseline = nlpd(scene, out.baseline, params, task.ablation).total;
    return out;
  }

  double lo, hi;
  std::optional<double> mean;
  if (const auto* bm = std::get_if<BoxMeanConstraint>(&task.constraint)) {
    lo = bm->i_min;
    hi = bm->i_max;
    mean = bm->i_mean;
  } else {
    const auto& box = std::get<BoxConstraint>(task.constraint);
    lo = box.i_min;
    hi = box.i_max;
  }
  LuminanceImage baseline = affine_rescale(scene, lo, hi);
  if (mean)
    baseline = LuminanceImage(project_box_mean(baseline.grid(), lo, hi, *mean));

  MinimizeResult opt =
      minimize(scene, task.constraint, params, task.ablation, task.optimizer);
  RenderResult out{std::move(opt.image), std::move(baseline), std::move(opt.trace),
                   0.0, 0.0};
  out.d_optimized = out.trace.final_distance;
  out.d_baseline = nlpd(scene, out.baseline, params, task.ablation).total;
  return out;
}

// Simulates more light in the original scene by rescaling the normalized
// measurements to increasing maximum luminances; one render per s_max.
inline std::vector<RenderResult> detail_enhance(const Image& normalized,
                                                const std::vector<double>& s_max_list,
                                                double s_min, const DisplayModel& display,
                                                const NlpParams& params,
                                                const AblationConfig& ablate = {},
                                                const OptimizerConfig& optimizer = {}) {
  if (s_max_list.empty()) throw config_error("detail enhancement needs >= 1 s_max");
  std::vector<RenderResult> out;
  out.reserve(s_max_list.size());
  for (double s_max : s_max_list) {
    RenderTask task;
    task.acquisition = UncalibratedLinear{s_min, s_max};
    task.constraint = BoxConstraint{display.i_min, display.i_max};
    task.display = display;
    task.optimizer = optimizer;
    task.ablation = ablate;
    out.push_back(render(normalized, task, params));
  }
  return out;
}

struct EnergyPoint {
  double i_mean = 0.0;
  double achieved_mean = 0.0;
  double d_optimized = 0.0;
  double d_rescaled = 0.0;
  double energy_saved_fraction = 0.0;
};

struct EnergyCurve {
  std::vector<EnergyPoint> points;
  std::vector<std::string> warnings;
  int monotonicity_violations = 0;  // D rising with mean, recorded not enforced
};

// Distortion-vs-mean-luminance tradeoff: per target mean, a mean-constrained
// optimization against a mean-matched linear rescale. The energy-saved
// fraction reports, for each rescaled point, how much lower a mean the
// optimized curve needs for equal-or-lower distortion (linear interpolation
// along the optimized curve; one extra anchor below the lowest requested
// mean keeps the lowest point interpolable).
inline EnergyCurve energy_curve(const LuminanceImage& scene, const DisplayModel& display,
                                const std::vector<double>& mean_fractions,
                                const NlpParams& params,
                                const AblationConfig& ablate = {},
                                const OptimizerConfig& optimizer = {}) {
  display.validate();
  if (mean_fractions.empty()) throw config_error("energy curve needs >= 1 target mean");
  const double lo = display.i_min, hi = display.i_max;

  std::vector<double> targets;
  EnergyCurve curve;
  for (double f : mean_fractions) {
    const double m = lo + f * (hi - lo);
    if (!(m >= lo) || !(m <= hi)) {
      curve.warnings.push_back("skipping infeasible target mean fraction " +
                               std::to_string(f));
      continue;
    }
    targets.push_back(m);
  }
  if (targets.empty()) throw config_error("all energy targets were infeasible");
  std::sort(targets.begin(), targets.end());

  struct Anchor {
    double mean;
    double d;
  };
  std::vector<Anchor> anchors;
  const double extra = lo + 0.5 * (targets.front() - lo);
  if (extra > lo && extra < targets.front()) {
    MinimizeResult r = minimize(scene, BoxMeanConstraint{lo, hi, extra}, params, ablate,
                                optimizer);
    anchors.push_back({r.image.grid().mean(), r.trace.final_distance});
  }

  const LuminanceImage rescaled_box = affine_rescale(scene, lo, hi);
  for (double m : targets) {
    MinimizeResult opt =
        minimize(scene, BoxMeanConstraint{lo, hi, m}, params, ablate, optimizer);
    LuminanceImage resc =
        LuminanceImage(project_box_mean(rescaled_box.grid(), lo, hi, m));
    EnergyPoint p;
    p.i_mean = m;
    p.achieved_mean = opt.image.grid().mean();
    p.d_optimized = opt.trace.final_distance;
    p.d_rescaled = nlpd(scene, resc, params, ablate).total;
    anchors.push_back({p.achieved_mean, p.d_optimized});
    curve.points.push_back(p);
  }

  for (size_t i = 1; i < curve.points.size(); ++i)
    if (curve.points[i].d_optimized > curve.points[i - 1].d_optimized)
      ++curve.monotonicity_violations;

  // Smallest optimized mean achieving d <= target, walking the anchors from
  // the lowest mean upward.
  const auto equivalent_mean = [&](double d_target, double fallback) {
    for (size_t i = 0; i < anchors.size(); ++i) {
      if (anchors[i].d <= d_target) {
        if (i == 0) return anchors[0].mean;
        const double d0 = anchors[i - 1].d, d1 = anchors[i].d;
        const double m0 = anchors[i - 1].mean, m1 = anchors[i].mean;
        if (d0 <= d1) return anchors[i].mean;  // flat or inverted segment
        return m0 + (m1 - m0) * (d0 - d_target) / (d0 - d1);
      }
    }
    return fallback;
  };
  for (EnergyPoint& p : curve.points) {
    const double m_eq = equivalent_mean(p.d_rescaled, p.i_mean);
    p.energy_saved_fraction = 1.0 - m_eq / p.i_mean;
  }
  return curve;
}

struct AblationOutcome {
  std::string name;
  AblationConfig config;
  LuminanceImage image;
  double d_full = 0.0;  // scored under the full metric
  int n_channels = 0;   // channel count of the variant's own transform
};

// Four renders (full transform plus one component removed at a time), each
// optimized under its own variant metric and re-scored under the full one.
inline std::vector<AblationOutcome> ablation_suite(const LuminanceImage& scene,
                                                   const ConstraintSpec& constraint,
                                                   const NlpParams& params,
                                                   const OptimizerConfig& optimizer = {}) {
  const std::vector<std::pair<std::string, AblationConfig>> variants = {
      {"full", {}},
      {"no-front-nonlinearity", {true, false, false}},
      {"no-multiscale", {false, true, false}},
      {"no-normalization", {false, false, true}},
  };
  std::vector<AblationOutcome> out;
  out.reserve(variants.size());
  for (const auto& [name, ablate] : variants) {
    MinimizeResult r = minimize(scene, constraint, params, ablate, optimizer);
    AblationOutcome o{name, ablate, std::move(r.image), 0.0, 0};
    o.d_full = nlpd(scene, o.image, params).total;
    o.n_channels = nlp_transform(o.image, params, ablate).n_channels();
    out.push_back(std::move(o));
  }
  return out;
}

// Named experiment presets reachable from the command line. The detail,
// energy, dither and ablation presets correspond to the dedicated
// subcommands of the CLI.
inline RenderTask make_preset(const std::string& name) {
  RenderTask task;
  task.preset_name = name;
  if (name == "tonemap-hdr") {
    task.acquisition = CalibratedHdr{};
  } else if (name == "tonemap-ldr") {
    LdrMapping g;
    g.s_min = task.display.i_min;
    g.s_max = task.display.i_max;
    task.acquisition = CalibratedLdr{g};
  } else if (name == "uncalibrated") {
    task.acquisition = UncalibratedLinear{0.01, 1e4};
  } else if (name == "detail") {
    task.acquisition = UncalibratedLinear{0.01, 1e4};
  } else if (name == "haze") {
    task.acquisition = UncalibratedLinear{5.0, 1e4};
  } else if (name == "energy") {
    task.acquisition = CalibratedHdr{};
    task.constraint = BoxMeanConstraint{
        task.display.i_min, task.display.i_max,
        0.5 * (task.display.i_min + task.display.i_max)};
  } else if (name == "dither") {
    task.acquisition = CalibratedHdr{};
    task.constraint = DiscreteLevelsConstraint{
        uniform_levels(2, task.display.i_min, task.display.i_max)};
  } else if (name == "ablation") {
    task.acquisition = CalibratedHdr{};
  } else {
    throw config_error("unknown preset '" + name + "'");
  }
  return task;
}

}  // namespace nlpr
