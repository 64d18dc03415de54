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

// Laplacian pyramid: recursive blur/downsample decomposition into bandpass
// bands plus a lowpass residual, exactly invertible by construction.
//
// Conventions held fixed across the transform and its adjoint:
//   - boundary handling is mirror reflection without edge repetition,
//   - downsampling keeps even-indexed samples, output dims = ceil(dims / 2),
//   - upsampling zero-stuffs at even indices,
//   - the filter on the upsampling path uses taps scaled by 2 per dimension,
//     so that blur(upsample(.)) preserves the mean of a constant image.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nlpr/image.hpp"

namespace nlpr {

// Separable 1D kernel, applied along rows then columns.
struct FilterKernel {
  std::vector<double> taps;

  void validate() const {
    if (taps.empty() || taps.size() % 2 == 0)
      throw config_error("filter kernel must have odd length, got " +
                         std::to_string(taps.size()));
  }
  int radius() const { return static_cast<int>(taps.size()) / 2; }

  FilterKernel scaled(double f) const {
    FilterKernel out = *this;
    for (double& t : out.taps) t *= f;
    return out;
  }
};

// The 5-tap binomial-like kernel used for all pyramid levels.
inline const FilterKernel& laplacian_taps() {
  static const FilterKernel k{{0.05, 0.25, 0.4, 0.25, 0.05}};
  return k;
}

// Mirror reflection about the edge samples (no edge repetition):
// ..., x2, x1, [x0, x1, ..., x_{n-1}], x_{n-2}, x_{n-3}, ...
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace detail {

inline void filter_rows(const Image& src, const std::vector<double>& taps, Image& dst) {
  const int w = src.width(), h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  const int lo = std::min(r, w);
  const int hi = std::max(lo, w - r);
  for (int y = 0; y < h; ++y) {
    const double* in = src.data() + static_cast<size_t>(y) * w;
    double* out = dst.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < lo; ++x) {
      double acc = 0.0;
      for (int m = 0; m < static_cast<int>(taps.size()); ++m)
        acc += taps[m] * in[mirror_index(x + m - r, w)];
      out[x] = acc;
    }
    for (int x = lo; x < hi; ++x) {
      double acc = 0.0;
      for (int m = 0; m < static_cast<int>(taps.size()); ++m)
        acc += taps[m] * in[x + m - r];
      out[x] = acc;
    }
    for (int x = hi; x < w; ++x) {
      double acc = 0.0;
      for (int m = 0; m < static_cast<int>(taps.size()); ++m)
        acc += taps[m] * in[mirror_index(x + m - r, w)];
      out[x] = acc;
    }
  }
}

// Column pass written as row accumulation to stay cache-friendly.
inline void filter_cols(const Image& src, const std::vector<double>& taps, Image& dst) {
  const int w = src.width(), h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  std::fill(dst.values().begin(), dst.values().end(), 0.0);
  for (int y = 0; y < h; ++y) {
    double* out = dst.data() + static_cast<size_t>(y) * w;
    for (int m = 0; m < static_cast<int>(taps.size()); ++m) {
      const double t = taps[m];
      const double* in = src.data() + static_cast<size_t>(mirror_index(y + m - r, h)) * w;
      for (int x = 0; x < w; ++x) out[x] += t * in[x];
    }
  }
}

inline void filter_rows_adjoint(const Image& src, const std::vector<double>& taps,
                                Image& dst) {
  const int w = src.width(), h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  std::fill(dst.values().begin(), dst.values().end(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* in = src.data() + static_cast<size_t>(y) * w;
    double* out = dst.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const double v = in[x];
      for (int m = 0; m < static_cast<int>(taps.size()); ++m)
        out[mirror_index(x + m - r, w)] += taps[m] * v;
    }
  }
}

inline void filter_cols_adjoint(const Image& src, const std::vector<double>& taps,
                                Image& dst) {
  const int w = src.width(), h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  std::fill(dst.values().begin(), dst.values().end(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* in = src.data() + static_cast<size_t>(y) * w;
    for (int m = 0; m < static_cast<int>(taps.size()); ++m) {
      double* out = dst.data() + static_cast<size_t>(mirror_index(y + m - r, h)) * w;
      const double t = taps[m];
      for (int x = 0; x < w; ++x) out[x] += t * in[x];
    }
  }
}

}  // namespace detail

// Kernel along rows, then along columns, mirror boundaries.
inline Image filter_separable(const Image& x, const FilterKernel& k) {
  k.validate();
  Image tmp(x.width(), x.height());
  Image out(x.width(), x.height());
  detail::filter_rows(x, k.taps, tmp);
  detail::filter_cols(tmp, k.taps, out);
  return out;
}

// Exact adjoint of filter_separable: <F x, u> == <x, F^T u>. The mirror
// boundary makes F non-symmetric near edges, so this is a distinct scatter
// operation, applied in reverse pass order (columns first).
inline Image filter_separable_adjoint(const Image& u, const FilterKernel& k) {
  k.validate();
  Image tmp(u.width(), u.height());
  Image out(u.width(), u.height());
  detail::filter_cols_adjoint(u, k.taps, tmp);
  detail::filter_rows_adjoint(tmp, k.taps, out);
  return out;
}

// Keep even-indexed samples; output dims = ceil(dims / 2).
inline Image downsample(const Image& x) {
  const int ow = (x.width() + 1) / 2;
  const int oh = (x.height() + 1) / 2;
  Image out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < ow; ++xx) out(y, xx) = x(2 * y, 2 * xx);
  return out;
}

// Zero-stuff into even indices of a grid with exactly target_width x
// target_height; the target must ceil-halve back to the input dims.
inline Image upsample(const Image& x, int target_width, int target_height) {
  if ((target_width + 1) / 2 != x.width() || (target_height + 1) / 2 != x.height()) {
    throw dimension_error("upsample target " + std::to_string(target_width) + "x" +
                          std::to_string(target_height) +
                          " inconsistent with source " + std::to_string(x.width()) +
                          "x" + std::to_string(x.height()));
  }
  Image out(target_width, target_height, 0.0);
  for (int y = 0; y < x.height(); ++y)
    for (int xx = 0; xx < x.width(); ++xx) out(2 * y, 2 * xx) = x(y, xx);
  return out;
}

// Bandpass bands plus the final lowpass residual.
struct PyramidStack {
  std::vector<Image> bands;                       // fine to coarse
  Image lowpass;                                  // coarsest residual
  std::vector<std::pair<int, int>> level_dims;    // (width, height), one per level

  int n_levels() const { return static_cast<int>(level_dims.size()); }

  void validate() const {
    if (level_dims.empty() || bands.size() + 1 != level_dims.size())
      throw dimension_error("pyramid stack has inconsistent level count");
    for (size_t k = 0; k < level_dims.size(); ++k) {
      const Image& g = (k < bands.size()) ? bands[k] : lowpass;
      if (g.width() != level_dims[k].first || g.height() != level_dims[k].second)
        throw dimension_error("pyramid level " + std::to_string(k) +
                              " does not match its recorded dimensions");
      if (k > 0) {
        if (level_dims[k].first != (level_dims[k - 1].first + 1) / 2 ||
            level_dims[k].second != (level_dims[k - 1].second + 1) / 2)
          throw dimension_error("pyramid level dims violate the ceil-halving law");
      }
    }
  }
};

// Largest level count that keeps every level at >= 1 pixel.
inline void check_levels_fit(int width, int height, int n_levels) {
  if (n_levels < 1) throw dimension_error("pyramid needs at least one level");
  const int min_dim = std::min(width, height);
  if (n_levels > 1 && min_dim < (1 << (n_levels - 1))) {
    throw dimension_error("pyramid with " + std::to_string(n_levels) +
                          " levels does not fit a " + std::to_string(width) + "x" +
                          std::to_string(height) + " image");
  }
}

// Default channel count: floor(log2(min dim)) - 2, clamped to [1, 6]; keeps
// the coarsest level at >= 8 px for typical sizes.
inline int default_n_levels(int width, int height) {
  const int min_dim = std::min(width, height);
  int levels = static_cast<int>(std::floor(std::log2(static_cast<double>(min_dim)))) - 2;
  return std::clamp(levels, 1, 6);
}

// g_{k+1} = D(L(g_k)); band_k = g_k - L2(U(g_{k+1})).
inline PyramidStack build_pyramid(const Image& x, int n_levels,
                                  const FilterKernel& taps = laplacian_taps()) {
  check_levels_fit(x.width(), x.height(), n_levels);
  const FilterKernel taps2 = taps.scaled(2.0);
  PyramidStack stack;
  stack.level_dims.reserve(n_levels);
  Image g = x;
  for (int k = 0; k + 1 < n_levels; ++k) {
    stack.level_dims.emplace_back(g.width(), g.height());
    Image next = downsample(filter_separable(g, taps));
    Image up = filter_separable(upsample(next, g.width(), g.height()), taps2);
    Image band(g.width(), g.height());
    for (size_t i = 0; i < g.size(); ++i) band.data()[i] = g.data()[i] - up.data()[i];
    stack.bands.push_back(std::move(band));
    g = std::move(next);
  }
  stack.level_dims.emplace_back(g.width(), g.height());
  stack.lowpass = std::move(g);
  return stack;
}

// Inverse recursion g_k = band_k + L2(U(g_{k+1})).
inline Image collapse_pyramid(const PyramidStack& stack,
                              const FilterKernel& taps = laplacian_taps()) {
  stack.validate();
  const FilterKernel taps2 = taps.scaled(2.0);
  Image g = stack.lowpass;
  for (int k = static_cast<int>(stack.bands.size()) - 1; k >= 0; --k) {
    const auto [w, h] = stack.level_dims[k];
    Image up = filter_separable(upsample(g, w, h), taps2);
    Image next(w, h);
    const Image& band = stack.bands[k];
    for (size_t i = 0; i < next.size(); ++i)
      next.data()[i] = band.data()[i] + up.data()[i];
    g = std::move(next);
  }
  return g;
}

// Adjoint of build_pyramid as a map from (band, lowpass) cotangents to a
// cotangent on the input grid. Runs the linear recursion in reverse using
// the adjoint of each step; the dense pyramid matrix is never materialized.
inline Image pyramid_adjoint(const std::vector<Image>& band_cotangents,
                             const Image& lowpass_cotangent,
                             const std::vector<std::pair<int, int>>& level_dims,
                             const FilterKernel& taps = laplacian_taps()) {
  if (band_cotangents.size() + 1 != level_dims.size())
    throw dimension_error("pyramid adjoint: cotangent count does not match levels");
  const FilterKernel taps2 = taps.scaled(2.0);
  Image c = lowpass_cotangent;
  for (int k = static_cast<int>(band_cotangents.size()) - 1; k >= 0; --k) {
    const auto [w, h] = level_dims[k];
    // band_k = g_k - L2(U(g_{k+1})): (L2 U)^T = even-sampling after L2^T.
    Image pull = downsample(filter_separable_adjoint(band_cotangents[k], taps2));
    if (!pull.same_dims(c))
      throw dimension_error("pyramid adjoint: band cotangent dims mismatch");
    for (size_t i = 0; i < c.size(); ++i) c.data()[i] -= pull.data()[i];
    // g_{k+1} = D(L(g_k)): (D L)^T = L^T after zero-stuffing.
    Image lifted = filter_separable_adjoint(upsample(c, w, h), taps);
    for (size_t i = 0; i < lifted.size(); ++i)
      lifted.data()[i] += band_cotangents[k].data()[i];
    c = std::move(lifted);
  }
  return c;
}

}  // namespace nlpr
