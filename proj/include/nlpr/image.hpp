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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nlpr/common.hpp"

namespace nlpr {

// Row-major 2D grid of doubles: the shared container for pixel data,
// pyramid bands and normalized channels. Carries no value constraints.
class Image {
 public:
  Image() = default;

  Image(int width, int height, double fill = 0.0) {
    check_dims(width, height);
    w_ = width;
    h_ = height;
    v_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), fill);
  }

  static Image from_data(int width, int height, std::vector<double> data) {
    check_dims(width, height);
    if (data.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
      throw dimension_error("image data length " + std::to_string(data.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    Image img;
    img.w_ = width;
    img.h_ = height;
    img.v_ = std::move(data);
    return img;
  }

  int width() const { return w_; }
  int height() const { return h_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(int y, int x) { return v_[static_cast<size_t>(y) * w_ + x]; }
  double operator()(int y, int x) const { return v_[static_cast<size_t>(y) * w_ + x]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool same_dims(const Image& o) const { return w_ == o.w_ && h_ == o.h_; }

  double min_value() const {
    require_nonempty();
    return *std::min_element(v_.begin(), v_.end());
  }
  double max_value() const {
    require_nonempty();
    return *std::max_element(v_.begin(), v_.end());
  }
  double mean() const {
    require_nonempty();
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
  }

 private:
  static void check_dims(int width, int height) {
    if (width <= 0 || height <= 0)
      throw dimension_error("image dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    // Guard against absurd allocations from corrupt headers.
    if (static_cast<long long>(width) * height > (1LL << 28))
      throw dimension_error("image dimensions too large: " + std::to_string(width) +
                            "x" + std::to_string(height));
  }
  void require_nonempty() const {
    if (v_.empty()) throw dimension_error("operation on empty image");
  }

  int w_ = 0, h_ = 0;
  std::vector<double> v_;
};

// Scene or display luminances in cd/m^2. Construction validates that every
// value is finite and nonnegative; instances are immutable afterwards.
class LuminanceImage {
 public:
  explicit LuminanceImage(Image grid) : img_(std::move(grid)) {
    if (img_.empty()) throw dimension_error("luminance image must be non-empty");
    const double* p = img_.data();
    const int w = img_.width();
    for (size_t i = 0; i < img_.size(); ++i) {
      if (!std::isfinite(p[i]) || p[i] < 0.0) {
        throw domain_error("invalid luminance " + std::to_string(p[i]) +
                           " at pixel (" + std::to_string(i / w) + ", " +
                           std::to_string(i % w) + "); values must be finite and >= 0");
      }
    }
  }

  static LuminanceImage constant(int width, int height, double value) {
    return LuminanceImage(Image(width, height, value));
  }

  const Image& grid() const { return img_; }
  int width() const { return img_.width(); }
  int height() const { return img_.height(); }
  double operator()(int y, int x) const { return img_(y, x); }

 private:
  Image img_;
};

}  // namespace nlpr
