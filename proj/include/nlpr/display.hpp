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

// Physical data model: display transfer, acquisition models mapping recorded
// data to scene luminances, and the linear-rescale baseline.

#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "nlpr/image.hpp"

namespace nlpr {

// Rec. 709 luma weights, applied to linear channel values.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

// Display transfer model: I(v) = i_min + (i_max - i_min) * v^gamma for
// normalized drive values v in [0, 1]. The additive black point models
// reflected ambient light and scatter.
struct DisplayModel {
  double i_min = 5.0;
  double i_max = 300.0;
  double gamma = 2.2;

  void validate() const {
    if (!(i_min >= 0.0) || !(i_min < i_max))
      throw config_error("display model requires 0 <= i_min < i_max, got [" +
                         std::to_string(i_min) + ", " + std::to_string(i_max) + "]");
    if (!(gamma > 0.0))
      throw config_error("display gamma must be positive");
  }
  double range() const { return i_max - i_min; }
};

// Pixel-value-to-luminance mapping for calibrated LDR acquisition:
// S = s_min + (s_max - s_min) * (R / r_max)^gamma_cam.
struct LdrMapping {
  enum class Kind { GammaAffine };
  Kind kind = Kind::GammaAffine;
  double gamma_cam = 2.2;
  double r_max = 255.0;
  double s_min = 5.0;
  double s_max = 300.0;

  void validate() const {
    if (kind != Kind::GammaAffine)
      throw config_error("unknown LDR mapping descriptor");
    if (!(r_max > 0.0)) throw config_error("LDR mapping requires r_max > 0");
    if (!(s_min >= 0.0) || !(s_min < s_max))
      throw config_error("LDR mapping requires 0 <= s_min < s_max");
    if (!(gamma_cam > 0.0)) throw config_error("LDR mapping requires gamma_cam > 0");
  }
};

inline LdrMapping::Kind ldr_mapping_kind_from_string(const std::string& name) {
  if (name == "gamma" || name == "gamma-affine") return LdrMapping::Kind::GammaAffine;
  throw config_error("unknown LDR mapping descriptor '" + name + "'");
}

struct CalibratedHdr {};                      // data already in cd/m^2
struct CalibratedLdr { LdrMapping mapping; }; // recorded pixel values + mapping
struct UncalibratedLinear {                   // normalized data, assumed range
  double s_min = 0.01;
  double s_max = 1e4;
};

using AcquisitionSpec = std::variant<CalibratedHdr, CalibratedLdr, UncalibratedLinear>;

// S = (s_max - s_min) * L + s_min for normalized measurements L in [0, 1].
inline LuminanceImage scene_from_uncalibrated(const Image& normalized, double s_min,
                                              double s_max) {
  if (!(s_min >= 0.0) || !(s_min < s_max))
    throw config_error("uncalibrated acquisition requires 0 <= s_min < s_max");
  const double* p = normalized.data();
  const int w = normalized.width();
  for (size_t i = 0; i < normalized.size(); ++i) {
    if (!(p[i] >= 0.0) || !(p[i] <= 1.0)) {
      throw domain_error("normalized value " + std::to_string(p[i]) + " at pixel (" +
                         std::to_string(i / w) + ", " + std::to_string(i % w) +
                         ") lies outside [0, 1]");
    }
  }
  Image out(normalized.width(), normalized.height());
  const double span = s_max - s_min;
  for (size_t i = 0; i < normalized.size(); ++i) out.data()[i] = span * p[i] + s_min;
  return LuminanceImage(std::move(out));
}

// S = g(R) with the configured mapping descriptor.
inline LuminanceImage scene_from_ldr(const Image& recorded, const LdrMapping& g) {
  g.validate();
  const double* p = recorded.data();
  const int w = recorded.width();
  for (size_t i = 0; i < recorded.size(); ++i) {
    if (!(p[i] >= 0.0) || !(p[i] <= g.r_max)) {
      throw domain_error("recorded value " + std::to_string(p[i]) + " at pixel (" +
                         std::to_string(i / w) + ", " + std::to_string(i % w) +
                         ") lies outside the mapping domain [0, " +
                         std::to_string(g.r_max) + "]");
    }
  }
  Image out(recorded.width(), recorded.height());
  const double span = g.s_max - g.s_min;
  for (size_t i = 0; i < recorded.size(); ++i)
    out.data()[i] = g.s_min + span * std::pow(p[i] / g.r_max, g.gamma_cam);
  return LuminanceImage(std::move(out));
}

inline LuminanceImage apply_acquisition(const Image& source, const AcquisitionSpec& spec) {
  if (std::holds_alternative<CalibratedHdr>(spec)) return LuminanceImage(source);
  if (const auto* ldr = std::get_if<CalibratedLdr>(&spec))
    return scene_from_ldr(source, ldr->mapping);
  const auto& un = std::get<UncalibratedLinear>(spec);
  return scene_from_uncalibrated(source, un.s_min, un.s_max);
}

// v = ((I - i_min) / (i_max - i_min))^(1/gamma). Inputs may exceed the
// display range by at most 1e-9 * range (clamped); beyond that is an error.
inline Image encode_for_display(const LuminanceImage& lum, const DisplayModel& d) {
  d.validate();
  const double tol = 1e-9 * d.range();
  const Image& g = lum.grid();
  Image out(g.width(), g.height());
  const double inv_gamma = 1.0 / d.gamma;
  for (size_t i = 0; i < g.size(); ++i) {
    const double x = g.data()[i];
    if (x < d.i_min - tol || x > d.i_max + tol) {
      throw domain_error("luminance " + std::to_string(x) + " at pixel (" +
                         std::to_string(i / static_cast<size_t>(g.width())) + ", " +
                         std::to_string(i % static_cast<size_t>(g.width())) +
                         ") violates display range [" + std::to_string(d.i_min) + ", " +
                         std::to_string(d.i_max) + "]");
    }
    const double t = std::clamp((x - d.i_min) / d.range(), 0.0, 1.0);
    out.data()[i] = std::pow(t, inv_gamma);
  }
  return out;
}

// I = i_min + (i_max - i_min) * v^gamma.
inline LuminanceImage decode_from_display(const Image& v, const DisplayModel& d) {
  d.validate();
  Image out(v.width(), v.height());
  for (size_t i = 0; i < v.size(); ++i) {
    const double x = v.data()[i];
    if (!(x >= 0.0) || !(x <= 1.0)) {
      throw domain_error("normalized drive value " + std::to_string(x) + " at pixel (" +
                         std::to_string(i / static_cast<size_t>(v.width())) + ", " +
                         std::to_string(i % static_cast<size_t>(v.width())) +
                         ") lies outside [0, 1]");
    }
    out.data()[i] = d.i_min + d.range() * std::pow(x, d.gamma);
  }
  return LuminanceImage(std::move(out));
}

// Affine min/max rescale into [lo, hi]: the linear-rescaling baseline and
// the optimizer's default initialization. A constant image has no defined
// affine map; it is clamped into the target range instead.
inline LuminanceImage affine_rescale(const LuminanceImage& s, double lo, double hi) {
  if (!(lo < hi)) throw config_error("affine_rescale requires lo < hi");
  const Image& g = s.grid();
  const double mn = g.min_value();
  const double mx = g.max_value();
  Image out(g.width(), g.height());
  if (mx == mn) {
    const double v = std::clamp(mn, lo, hi);
    for (size_t i = 0; i < g.size(); ++i) out.data()[i] = v;
  } else {
    const double scale = (hi - lo) / (mx - mn);
    for (size_t i = 0; i < g.size(); ++i)
      out.data()[i] = std::clamp(lo + (g.data()[i] - mn) * scale, lo, hi);
  }
  return LuminanceImage(std::move(out));
}

}  // namespace nlpr
