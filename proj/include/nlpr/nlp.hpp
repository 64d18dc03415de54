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

// Normalized Laplacian Pyramid transform: a pointwise power law, a Laplacian
// pyramid decomposition, and divisive normalization of each channel by a
// weighted local amplitude sum. Bandpass channels share one parameter set;
// the lowpass residual has its own.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nlpr/image.hpp"
#include "nlpr/pyramid.hpp"

namespace nlpr {

// Square 2D convolution kernel with odd side length, stored row-major.
struct Kernel2D {
  int radius = 0;
  std::vector<double> weights;  // (2*radius+1)^2 entries

  void validate() const {
    const size_t side = 2 * static_cast<size_t>(radius) + 1;
    if (radius < 0 || weights.size() != side * side)
      throw config_error("2D kernel weight count does not match its radius");
  }
  double at(int dy, int dx) const {
    const int side = 2 * radius + 1;
    return weights[static_cast<size_t>(dy + radius) * side + (dx + radius)];
  }
};

// The published 5x5 local weighting for bandpass normalization. Its entries
// sum to 1.01; it is used verbatim, without renormalization.
inline const Kernel2D& default_band_weights() {
  static const Kernel2D k{2,
                          {0.04, 0.04, 0.05, 0.04, 0.04,  //
                           0.04, 0.03, 0.04, 0.03, 0.04,  //
                           0.05, 0.04, 0.05, 0.04, 0.05,  //
                           0.04, 0.03, 0.04, 0.03, 0.04,  //
                           0.04, 0.04, 0.05, 0.04, 0.04}};
  return k;
}

// Transform and metric constants. Defaults are the published values fit to
// human ratings; n_levels == 0 selects the per-image default level count.
struct NlpParams {
  double gamma = 1.0 / 2.6;
  FilterKernel l_taps = laplacian_taps();
  Kernel2D p_band = default_band_weights();
  double sigma_band = 0.17;
  double p_low = 1.0;
  double sigma_low = 4.86;
  int n_levels = 0;
  double alpha = 2.0;
  double beta = 0.6;

  void validate() const {
    l_taps.validate();
    p_band.validate();
    if (!(sigma_band > 0.0) || !(sigma_low > 0.0))
      throw config_error("normalization constants sigma must be positive");
    if (!(alpha >= 1.0)) throw config_error("alpha must be >= 1");
    if (!(beta > 0.0)) throw config_error("beta must be positive");
    if (n_levels < 0) throw config_error("n_levels must be positive (or 0 for auto)");
    if (!(gamma > 0.0)) throw config_error("gamma must be positive");
  }

  int levels_for(int width, int height) const {
    if (n_levels > 0) return n_levels;
    return default_n_levels(width, height);
  }
};

// Switches that remove one transform component at a time.
struct AblationConfig {
  bool disable_front_nonlinearity = false;  // gamma := 1
  bool disable_multiscale = false;          // n_levels := 1
  bool disable_normalization = false;       // P := 0, sigma := 1
};

// Ordered normalized channels y^(1..K); channel K is the lowpass residual.
struct NlpRepresentation {
  std::vector<Image> channels;
  int n_channels() const { return static_cast<int>(channels.size()); }
};

// x = S^gamma, elementwise. Rejects negative inputs.
inline Image front_nonlinearity(const Image& s, double gamma) {
  if (!(gamma > 0.0)) throw config_error("front nonlinearity requires gamma > 0");
  Image out(s.width(), s.height());
  const double* p = s.data();
  for (size_t i = 0; i < s.size(); ++i) {
    if (!(p[i] >= 0.0))
      throw domain_error("front nonlinearity of negative value " + std::to_string(p[i]));
    out.data()[i] = (gamma == 1.0) ? p[i] : std::pow(p[i], gamma);
  }
  return out;
}

// Direct 2D convolution with mirror boundaries (same rule as the pyramid).
inline Image conv2d_mirror(const Image& x, const Kernel2D& k) {
  k.validate();
  const int w = x.width(), h = x.height(), r = k.radius;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const bool y_interior = (y >= r && y < h - r);
    for (int xx = 0; xx < w; ++xx) {
      double acc = 0.0;
      if (y_interior && xx >= r && xx < w - r) {
        for (int dy = -r; dy <= r; ++dy) {
          const double* row = x.data() + static_cast<size_t>(y + dy) * w;
          double racc = 0.0;
          for (int dx = -r; dx <= r; ++dx) racc += k.at(dy, dx) * row[xx + dx];
          acc += racc;
        }
      } else {
        for (int dy = -r; dy <= r; ++dy) {
          const double* row = x.data() + static_cast<size_t>(mirror_index(y + dy, h)) * w;
          double racc = 0.0;
          for (int dx = -r; dx <= r; ++dx)
            racc += k.at(dy, dx) * row[mirror_index(xx + dx, w)];
          acc += racc;
        }
      }
      out(y, xx) = acc;
    }
  }
  return out;
}

// Adjoint of conv2d_mirror (scatter form), needed by the metric gradient.
inline Image conv2d_mirror_adjoint(const Image& u, const Kernel2D& k) {
  k.validate();
  const int w = u.width(), h = u.height(), r = k.radius;
  Image out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const double v = u(y, xx);
      for (int dy = -r; dy <= r; ++dy) {
        double* row = out.data() + static_cast<size_t>(mirror_index(y + dy, h)) * w;
        for (int dx = -r; dx <= r; ++dx)
          row[mirror_index(xx + dx, w)] += k.at(dy, dx) * v;
      }
    }
  }
  return out;
}

// y = z / (sigma + P * |z|) with a convolution kernel P.
inline Image normalize_channel(const Image& z, const Kernel2D& p, double sigma) {
  if (!(sigma > 0.0)) throw config_error("normalization requires sigma > 0");
  Image absz(z.width(), z.height());
  for (size_t i = 0; i < z.size(); ++i) absz.data()[i] = std::abs(z.data()[i]);
  Image denom = conv2d_mirror(absz, p);
  Image out(z.width(), z.height());
  for (size_t i = 0; i < z.size(); ++i)
    out.data()[i] = z.data()[i] / (sigma + denom.data()[i]);
  return out;
}

// y = z / (sigma + p * |z|) with a scalar weight (lowpass form).
inline Image normalize_channel(const Image& z, double p, double sigma) {
  if (!(sigma > 0.0)) throw config_error("normalization requires sigma > 0");
  Image out(z.width(), z.height());
  for (size_t i = 0; i < z.size(); ++i)
    out.data()[i] = z.data()[i] / (sigma + p * std::abs(z.data()[i]));
  return out;
}

// Everything the metric gradient needs from a forward transform pass.
struct TransformInternals {
  double gamma_eff = 1.0;
  bool norm_disabled = false;
  int n_channels = 0;
  std::vector<std::pair<int, int>> level_dims;
  Image front;               // x = S^gamma
  std::vector<Image> z;      // raw channels: bands then lowpass residual
  std::vector<Image> denom;  // divisive denominators (empty when disabled)
  NlpRepresentation rep;     // normalized channels y
};

inline TransformInternals nlp_transform_internals(const LuminanceImage& s,
                                                  const NlpParams& params,
                                                  const AblationConfig& ablate = {}) {
  params.validate();
  TransformInternals out;
  out.gamma_eff = ablate.disable_front_nonlinearity ? 1.0 : params.gamma;
  out.norm_disabled = ablate.disable_normalization;
  const int levels =
      ablate.disable_multiscale ? 1 : params.levels_for(s.width(), s.height());
  out.n_channels = levels;

  out.front = front_nonlinearity(s.grid(), out.gamma_eff);
  PyramidStack stack = build_pyramid(out.front, levels, params.l_taps);
  out.level_dims = stack.level_dims;

  out.z.reserve(levels);
  for (auto& band : stack.bands) out.z.push_back(std::move(band));
  out.z.push_back(std::move(stack.lowpass));

  out.rep.channels.reserve(levels);
  if (out.norm_disabled) {
    for (const Image& z : out.z) out.rep.channels.push_back(z);
    return out;
  }
  out.denom.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    const Image& z = out.z[k];
    Image denom(z.width(), z.height());
    if (k + 1 < levels) {
      Image absz(z.width(), z.height());
      for (size_t i = 0; i < z.size(); ++i) absz.data()[i] = std::abs(z.data()[i]);
      Image conv = conv2d_mirror(absz, params.p_band);
      for (size_t i = 0; i < z.size(); ++i)
        denom.data()[i] = params.sigma_band + conv.data()[i];
    } else {
      for (size_t i = 0; i < z.size(); ++i)
        denom.data()[i] = params.sigma_low + params.p_low * std::abs(z.data()[i]);
    }
    Image y(z.width(), z.height());
    for (size_t i = 0; i < z.size(); ++i)
      y.data()[i] = z.data()[i] / denom.data()[i];
    out.denom.push_back(std::move(denom));
    out.rep.channels.push_back(std::move(y));
  }
  return out;
}

// f(S): the normalized channels only.
inline NlpRepresentation nlp_transform(const LuminanceImage& s, const NlpParams& params,
                                       const AblationConfig& ablate = {}) {
  return nlp_transform_internals(s, params, ablate).rep;
}

}  // namespace nlpr
