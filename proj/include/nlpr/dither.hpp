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

// Rendering with a discrete set of gray levels: a greedy raster-scan
// minimizer of the perceptual distance (each pixel takes the level that
// minimizes the distance of the intermediate image, ties broken toward the
// lower level), plus a classic Floyd-Steinberg baseline.
//
// Exact mode re-evaluates the full distance per candidate and is only
// viable for small images. Windowed mode keeps an incrementally updated
// transform state and re-evaluates only the coefficients inside each
// pixel's pyramid receptive field; it matches exact mode up to floating-
// point summation order.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/nlpd.hpp"
#include "nlpr/optimizer.hpp"

namespace nlpr {

struct DitherConfig {
  std::vector<double> levels;         // sorted, strictly increasing cd/m^2
  std::optional<int> window_radius;   // absent = exact mode

  void validate() const { DiscreteLevelsConstraint{levels}.validate(); }
};

// count equally spaced luminances spanning [lo, hi], endpoints exact.
inline std::vector<double> uniform_levels(int count, double lo, double hi) {
  if (count < 2) throw config_error("need at least 2 levels");
  if (!(lo >= 0.0) || !(lo < hi)) throw config_error("levels require 0 <= lo < hi");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = (i == count - 1) ? hi : lo + (hi - lo) * i / (count - 1);
  return out;
}

inline double nearest_level(double v, const std::vector<double>& levels) {
  auto it = std::lower_bound(levels.begin(), levels.end(), v);
  if (it == levels.begin()) return *it;
  if (it == levels.end()) return levels.back();
  const double hi = *it, lo = *(it - 1);
  return (v - lo <= hi - v) ? lo : hi;  // tie -> lower level
}

// Classic error diffusion in the luminance domain: raster scan, kernel
// (7,3,5,1)/16 to (E, SW, S, SE), nearest-level quantizer. Kernel weights
// falling outside the image are renormalized over the in-bounds neighbors,
// which keeps the total diffused error (and hence the mean) conserved up to
// the final pixel's residual.
inline LuminanceImage floyd_steinberg(const LuminanceImage& scene,
                                      const std::vector<double>& levels) {
  DiscreteLevelsConstraint{levels}.validate();
  const int w = scene.width(), h = scene.height();
  Image work = affine_rescale(scene, levels.front(), levels.back()).grid();
  Image out(w, h);
  struct Tap {
    int dy, dx;
    double weight;
  };
  static constexpr Tap kTaps[] = {
      {0, 1, 7.0 / 16.0}, {1, -1, 3.0 / 16.0}, {1, 0, 5.0 / 16.0}, {1, 1, 1.0 / 16.0}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double q = nearest_level(work(y, x), levels);
      out(y, x) = q;
      const double err = work(y, x) - q;
      double avail = 0.0;
      for (const Tap& t : kTaps) {
        const int ny = y + t.dy, nx = x + t.dx;
        if (ny < h && nx >= 0 && nx < w) avail += t.weight;
      }
      if (avail == 0.0) continue;  // last pixel: residual is dropped
      for (const Tap& t : kTaps) {
        const int ny = y + t.dy, nx = x + t.dx;
        if (ny < h && nx >= 0 && nx < w) work(ny, nx) += err * t.weight / avail;
      }
    }
  }
  return LuminanceImage(std::move(out));
}

namespace detail {

struct Rect {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive; empty when x1 < x0
  bool empty() const { return x1 < x0 || y1 < y0; }
  size_t area() const {
    return empty() ? 0
                   : static_cast<size_t>(x1 - x0 + 1) * static_cast<size_t>(y1 - y0 + 1);
  }
};

inline int ceil_half(int a) { return a >= 0 ? (a + 1) / 2 : 0; }
inline int floor_half(int a) { return a >= 0 ? a / 2 : 0; }

// Per-level windows affected by a change at input pixel (py, px). These are
// supersets of the exact affected sets (mirror aliases near edges land
// inside the clipped direct intervals).
struct LevelWindows {
  std::vector<Rect> gauss;    // per level
  std::vector<Rect> channel;  // per channel: raw band / lowpass residual
  std::vector<Rect> norm;     // per channel: normalized coefficients
};

inline LevelWindows compute_windows(int py, int px,
                                    const std::vector<std::pair<int, int>>& level_dims,
                                    int filter_radius, int weight_radius,
                                    bool norm_disabled) {
  const int n_levels = static_cast<int>(level_dims.size());
  LevelWindows wnd;
  wnd.gauss.resize(n_levels);
  wnd.channel.resize(n_levels);
  wnd.norm.resize(n_levels);
  wnd.gauss[0] = {px, px, py, py};
  const int rl = filter_radius;
  for (int k = 0; k + 1 < n_levels; ++k) {
    const auto [wk, hk] = level_dims[k];
    const auto [wk1, hk1] = level_dims[k + 1];
    const Rect& g = wnd.gauss[k];
    Rect& gn = wnd.gauss[k + 1];
    gn.x0 = std::max(0, ceil_half(g.x0 - rl));
    gn.x1 = std::min(wk1 - 1, floor_half(g.x1 + rl));
    gn.y0 = std::max(0, ceil_half(g.y0 - rl));
    gn.y1 = std::min(hk1 - 1, floor_half(g.y1 + rl));
    Rect& z = wnd.channel[k];
    z.x0 = std::max(0, std::min(g.x0, 2 * gn.x0 - rl));
    z.x1 = std::min(wk - 1, std::max(g.x1, 2 * gn.x1 + rl));
    z.y0 = std::max(0, std::min(g.y0, 2 * gn.y0 - rl));
    z.y1 = std::min(hk - 1, std::max(g.y1, 2 * gn.y1 + rl));
    Rect& y = wnd.norm[k];
    const int rp = norm_disabled ? 0 : weight_radius;
    y.x0 = std::max(0, z.x0 - rp);
    y.x1 = std::min(wk - 1, z.x1 + rp);
    y.y0 = std::max(0, z.y0 - rp);
    y.y1 = std::min(hk - 1, z.y1 + rp);
  }
  // Lowpass channel: pointwise normalization, so all three windows agree.
  wnd.channel[n_levels - 1] = wnd.gauss[n_levels - 1];
  wnd.norm[n_levels - 1] = wnd.gauss[n_levels - 1];
  return wnd;
}

}  // namespace detail

// Radius, in input pixels, of the set of transform coefficients that can
// change when one input pixel changes. Windowed dithering requires a
// declared window at least this large.
inline int dither_receptive_field_radius(const NlpParams& params, int width, int height,
                                         const AblationConfig& ablate = {}) {
  params.validate();
  const int n_levels =
      ablate.disable_multiscale ? 1 : params.levels_for(width, height);
  // Evaluate on a virtual grid large enough that no window is clipped.
  const int n = std::max(64, 8 << n_levels);
  std::vector<std::pair<int, int>> dims;
  int w = n, h = n;
  for (int k = 0; k < n_levels; ++k) {
    dims.emplace_back(w, h);
    w = (w + 1) / 2;
    h = (h + 1) / 2;
  }
  int radius = 0;
  for (int parity = 0; parity < 2; ++parity) {
    const int c = n / 2 + parity;
    const auto wnd = detail::compute_windows(c, c, dims, params.l_taps.radius(),
                                             params.p_band.radius,
                                             ablate.disable_normalization);
    for (int k = 0; k < n_levels; ++k) {
      const auto& r = wnd.norm[k];
      const int scale = 1 << k;
      radius = std::max({radius, c - r.x0 * scale, (r.x1 + 1) * scale - 1 - c,
                         c - r.y0 * scale, (r.y1 + 1) * scale - 1 - c});
    }
  }
  return radius;
}

namespace detail {

// Incrementally maintained transform state for windowed greedy dithering.
// Holds the Gaussian levels, raw channels, divisive denominators and
// normalized channels of the current image, plus per-channel sums of
// |y_ref - y|^alpha, so the distance after a single-pixel change costs only
// the receptive-field coefficients.
class IncrementalNlp {
 public:
  IncrementalNlp(const LuminanceImage& scene, const LuminanceImage& init,
                 const NlpParams& params, const AblationConfig& ablate)
      : params_(params) {
    TransformInternals ctx = nlp_transform_internals(init, params, ablate);
    gamma_eff_ = ctx.gamma_eff;
    norm_disabled_ = ctx.norm_disabled;
    n_levels_ = ctx.n_channels;
    dims_ = ctx.level_dims;
    reference_ = nlp_transform(scene, params, ablate);
    if (reference_.n_channels() != n_levels_)
      throw dimension_error("scene and init representations disagree");

    // Gaussian levels: rebuilt here because transform internals keep bands
    // only. g[0] is the front image.
    gauss_.resize(n_levels_);
    gauss_[0] = std::move(ctx.front);
    for (int k = 0; k + 1 < n_levels_; ++k)
      gauss_[k + 1] = downsample(filter_separable(gauss_[k], params.l_taps));
    channels_ = std::move(ctx.z);
    denom_ = std::move(ctx.denom);
    norm_ = std::move(ctx.rep.channels);
    taps2_ = params.l_taps.scaled(2.0);

    sums_.resize(n_levels_);
    for (int k = 0; k < n_levels_; ++k) {
      double s = 0.0;
      const Image& a = reference_.channels[k];
      const Image& b = norm_[k];
      for (size_t i = 0; i < a.size(); ++i)
        s += alpha_power(std::abs(a.data()[i] - b.data()[i]));
      sums_[k] = s;
    }
  }

  double gamma_eff() const { return gamma_eff_; }

  double distance() const {
    double m = 0.0;
    for (int k = 0; k < n_levels_; ++k) {
      const double a_mean = sums_[k] / static_cast<double>(norm_[k].size());
      m += std::pow(a_mean, params_.beta / params_.alpha);
    }
    m /= static_cast<double>(n_levels_);
    return std::pow(m, 1.0 / params_.beta);
  }

  // Distance if front value at (py, px) became front_value; state restored.
  double probe(int py, int px, double front_value) {
    const LevelWindows wnd = compute_windows(py, px, dims_, params_.l_taps.radius(),
                                             params_.p_band.radius, norm_disabled_);
    save(wnd);
    apply(py, px, front_value, wnd);
    const double d = distance();
    restore(wnd);
    return d;
  }

  void commit(int py, int px, double front_value) {
    const LevelWindows wnd = compute_windows(py, px, dims_, params_.l_taps.radius(),
                                             params_.p_band.radius, norm_disabled_);
    apply(py, px, front_value, wnd);
  }

 private:
  double alpha_power(double d) const {
    return params_.alpha == 2.0 ? d * d : std::pow(d, params_.alpha);
  }

  static void copy_rect_out(const Image& img, const Rect& r, std::vector<double>& buf) {
    buf.clear();
    if (r.empty()) return;
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) buf.push_back(img(y, x));
  }
  static void copy_rect_in(Image& img, const Rect& r, const std::vector<double>& buf) {
    size_t i = 0;
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) img(y, x) = buf[i++];
  }

  void save(const LevelWindows& wnd) {
    saved_gauss_.resize(n_levels_);
    saved_channel_.resize(n_levels_);
    saved_denom_.resize(n_levels_);
    saved_norm_.resize(n_levels_);
    for (int k = 0; k < n_levels_; ++k) {
      copy_rect_out(gauss_[k], wnd.gauss[k], saved_gauss_[k]);
      copy_rect_out(channels_[k], wnd.channel[k], saved_channel_[k]);
      if (!norm_disabled_) copy_rect_out(denom_[k], wnd.norm[k], saved_denom_[k]);
      copy_rect_out(norm_[k], wnd.norm[k], saved_norm_[k]);
    }
    saved_sums_ = sums_;
  }

  void restore(const LevelWindows& wnd) {
    for (int k = 0; k < n_levels_; ++k) {
      copy_rect_in(gauss_[k], wnd.gauss[k], saved_gauss_[k]);
      copy_rect_in(channels_[k], wnd.channel[k], saved_channel_[k]);
      if (!norm_disabled_) copy_rect_in(denom_[k], wnd.norm[k], saved_denom_[k]);
      copy_rect_in(norm_[k], wnd.norm[k], saved_norm_[k]);
    }
    sums_ = saved_sums_;
  }

  // Fused blur+downsample gather for one coefficient of level k+1.
  double down_gather(const Image& g, int qy, int qx) const {
    const auto& taps = params_.l_taps.taps;
    const int r = params_.l_taps.radius();
    const int w = g.width(), h = g.height();
    double acc = 0.0;
    for (int m = 0; m < static_cast<int>(taps.size()); ++m) {
      const double* row = g.data() +
                          static_cast<size_t>(mirror_index(2 * qy + m - r, h)) * w;
      double racc = 0.0;
      for (int mm = 0; mm < static_cast<int>(taps.size()); ++mm)
        racc += taps[mm] * row[mirror_index(2 * qx + mm - r, w)];
      acc += taps[m] * racc;
    }
    return acc;
  }

  // Fused zero-stuff+blur gather: value of L2(U(child)) at parent (jy, jx).
  double up_gather(const Image& child, int jy, int jx, int parent_w,
                   int parent_h) const {
    const auto& taps = taps2_.taps;
    const int r = taps2_.radius();
    double acc = 0.0;
    for (int m = 0; m < static_cast<int>(taps.size()); ++m) {
      const int sy = mirror_index(jy + m - r, parent_h);
      if (sy % 2 != 0) continue;
      const double* row = child.data() + static_cast<size_t>(sy / 2) * child.width();
      double racc = 0.0;
      for (int mm = 0; mm < static_cast<int>(taps.size()); ++mm) {
        const int sx = mirror_index(jx + mm - r, parent_w);
        if (sx % 2 == 0) racc += taps[mm] * row[sx / 2];
      }
      acc += taps[m] * racc;
    }
    return acc;
  }

  void apply(int py, int px, double front_value, const LevelWindows& wnd) {
    gauss_[0](py, px) = front_value;
    for (int k = 0; k + 1 < n_levels_; ++k) {
      const Rect& rg = wnd.gauss[k + 1];
      for (int y = rg.y0; y <= rg.y1; ++y)
        for (int x = rg.x0; x <= rg.x1; ++x)
          gauss_[k + 1](y, x) = down_gather(gauss_[k], y, x);
      const Rect& rz = wnd.channel[k];
      const auto [wk, hk] = dims_[k];
      for (int y = rz.y0; y <= rz.y1; ++y)
        for (int x = rz.x0; x <= rz.x1; ++x)
          channels_[k](y, x) = gauss_[k](y, x) - up_gather(gauss_[k + 1], y, x, wk, hk);
      update_normalized(k, wnd.norm[k]);
    }
    const int last = n_levels_ - 1;
    const Rect& rlow = wnd.channel[last];
    for (int y = rlow.y0; y <= rlow.y1; ++y)
      for (int x = rlow.x0; x <= rlow.x1; ++x)
        channels_[last](y, x) = gauss_[last](y, x);
    update_normalized(last, wnd.norm[last]);
  }

  void update_normalized(int k, const Rect& r) {
    if (r.empty()) return;
    const Image& ref = reference_.channels[k];
    const Image& z = channels_[k];
    Image& y_img = norm_[k];
    double delta = 0.0;
    if (norm_disabled_) {
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) {
          delta -= alpha_power(std::abs(ref(y, x) - y_img(y, x)));
          y_img(y, x) = z(y, x);
          delta += alpha_power(std::abs(ref(y, x) - y_img(y, x)));
        }
    } else if (k + 1 < n_levels_) {
      Image& denom = denom_[k];
      const int rp = params_.p_band.radius;
      const int w = z.width(), h = z.height();
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) {
          // Same nested accumulation order as conv2d_mirror.
          double conv = 0.0;
          for (int dy = -rp; dy <= rp; ++dy) {
            const double* row =
                z.data() + static_cast<size_t>(mirror_index(y + dy, h)) * w;
            double racc = 0.0;
            for (int dx = -rp; dx <= rp; ++dx)
              racc += params_.p_band.at(dy, dx) * std::abs(row[mirror_index(x + dx, w)]);
            conv += racc;
          }
          denom(y, x) = params_.sigma_band + conv;
          delta -= alpha_power(std::abs(ref(y, x) - y_img(y, x)));
          y_img(y, x) = z(y, x) / denom(y, x);
          delta += alpha_power(std::abs(ref(y, x) - y_img(y, x)));
        }
    } else {
      Image& denom = denom_[k];
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) {
          denom(y, x) = params_.sigma_low + params_.p_low * std::abs(z(y, x));
          delta -= alpha_power(std::abs(ref(y, x) - y_img(y, x)));
          y_img(y, x) = z(y, x) / denom(y, x);
          delta += alpha_power(std::abs(ref(y, x) - y_img(y, x)));
        }
    }
    sums_[k] += delta;
    if (sums_[k] < 0.0) sums_[k] = 0.0;  // guard accumulated rounding
  }

  NlpParams params_;
  FilterKernel taps2_;
  double gamma_eff_ = 1.0;
  bool norm_disabled_ = false;
  int n_levels_ = 0;
  std::vector<std::pair<int, int>> dims_;
  NlpRepresentation reference_;
  std::vector<Image> gauss_, channels_, denom_, norm_;
  std::vector<double> sums_;

  std::vector<std::vector<double>> saved_gauss_, saved_channel_, saved_denom_,
      saved_norm_;
  std::vector<double> saved_sums_;
};

}  // namespace detail

// Greedy raster-scan rendering onto a discrete level set. continuous_init
// should be the continuous solution under the box [levels.front(),
// levels.back()]; pixels not yet visited keep their continuous values.
inline LuminanceImage greedy_dither(const LuminanceImage& scene, const DitherConfig& cfg,
                                    const NlpParams& params, const AblationConfig& ablate,
                                    const LuminanceImage& continuous_init) {
  cfg.validate();
  params.validate();
  if (!scene.grid().same_dims(continuous_init.grid()))
    throw dimension_error("continuous init dimensions do not match the scene");
  const int w = scene.width(), h = scene.height();

  if (cfg.window_radius) {
    const int rf = dither_receptive_field_radius(params, w, h, ablate);
    if (*cfg.window_radius < rf)
      throw config_error("window radius " + std::to_string(*cfg.window_radius) +
                         " is below the pyramid receptive field radius " +
                         std::to_string(rf));
    detail::IncrementalNlp state(scene, continuous_init, params, ablate);
    std::vector<double> front_levels(cfg.levels.size());
    for (size_t i = 0; i < cfg.levels.size(); ++i)
      front_levels[i] = state.gamma_eff() == 1.0
                            ? cfg.levels[i]
                            : std::pow(cfg.levels[i], state.gamma_eff());
    Image out = continuous_init.grid();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double best_d = std::numeric_limits<double>::infinity();
        size_t best_i = 0;
        for (size_t i = 0; i < cfg.levels.size(); ++i) {
          const double d = state.probe(y, x, front_levels[i]);
          if (d < best_d) {
            best_d = d;
            best_i = i;
          }
        }
        state.commit(y, x, front_levels[best_i]);
        out(y, x) = cfg.levels[best_i];
      }
    }
    return LuminanceImage(std::move(out));
  }

  // Exact mode: full distance recomputation per candidate.
  const NlpRepresentation reference = nlp_transform(scene, params, ablate);
  Image cur = continuous_init.grid();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best_d = std::numeric_limits<double>::infinity();
      double best_level = cfg.levels.front();
      for (double v : cfg.levels) {
        cur(y, x) = v;
        const double d =
            nlpd_from_reference(reference, LuminanceImage(cur), params, ablate).total;
        if (d < best_d) {
          best_d = d;
          best_level = v;
        }
      }
      cur(y, x) = best_level;
    }
  }
  return LuminanceImage(std::move(cur));
}

}  // namespace nlpr
