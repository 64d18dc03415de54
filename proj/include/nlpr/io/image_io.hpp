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

// Format dispatch: PFM and Radiance HDR carry linear values (treated as
// cd/m^2 when calibrated); PNG stores display-referred codes that are
// decoded through a display model. Color collapses to Rec. 709 luma on
// linear values.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/io/pfm.hpp"
#include "nlpr/io/png.hpp"
#include "nlpr/io/rgbe.hpp"

namespace nlpr::io {

enum class ImageFileFormat { Pfm, RadianceHdr, Png };

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline ImageFileFormat format_from_path(const std::string& path) {
  const size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot + 1));
  if (ext == "pfm") return ImageFileFormat::Pfm;
  if (ext == "hdr" || ext == "pic") return ImageFileFormat::RadianceHdr;
  if (ext == "png") return ImageFileFormat::Png;
  throw io_error("cannot infer image format from '" + path +
                 "' (expected .pfm, .hdr or .png)");
}

// PNG codes -> luminance: each channel is decoded through the display model,
// then collapsed to luma.
inline LuminanceImage png_to_luminance(const PngData& png, const DisplayModel& display) {
  display.validate();
  const double max_code = png.max_code();
  Image out(png.width, png.height);
  const int ch = png.channels;
  size_t si = 0;
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      double lum;
      if (ch == 1) {
        const double v = png.samples[si] / max_code;
        lum = display.i_min + display.range() * std::pow(v, display.gamma);
      } else {
        const double r = png.samples[si] / max_code;
        const double g = png.samples[si + 1] / max_code;
        const double b = png.samples[si + 2] / max_code;
        const double lr = display.i_min + display.range() * std::pow(r, display.gamma);
        const double lg = display.i_min + display.range() * std::pow(g, display.gamma);
        const double lb = display.i_min + display.range() * std::pow(b, display.gamma);
        lum = kLumaR * lr + kLumaG * lg + kLumaB * lb;
      }
      out(y, x) = lum;
      si += ch;
    }
  }
  return LuminanceImage(std::move(out));
}

inline LuminanceImage load_image(const std::string& path,
                                 const DisplayModel& display = {},
                                 std::optional<ImageFileFormat> format_hint = {}) {
  const ImageFileFormat fmt = format_hint ? *format_hint : format_from_path(path);
  switch (fmt) {
    case ImageFileFormat::Pfm:
      return LuminanceImage(read_pfm(path));
    case ImageFileFormat::RadianceHdr:
      return LuminanceImage(read_hdr(path));
    case ImageFileFormat::Png:
      return png_to_luminance(read_png(path), display);
  }
  throw io_error("unreachable image format");
}

// PFM saves luminances losslessly (32-bit float); PNG saves the
// display-encoded image quantized round-half-up, and requires the image to
// be display-feasible.
inline void save_image(const LuminanceImage& img, const std::string& path,
                       const DisplayModel& display = {}, int png_bit_depth = 8,
                       std::optional<ImageFileFormat> format_hint = {}) {
  const ImageFileFormat fmt = format_hint ? *format_hint : format_from_path(path);
  switch (fmt) {
    case ImageFileFormat::Pfm:
      write_pfm(img.grid(), path);
      return;
    case ImageFileFormat::RadianceHdr:
      throw io_error("Radiance HDR is read-only; save as .pfm or .png");
    case ImageFileFormat::Png: {
      const Image encoded = encode_for_display(img, display);
      const double max_code = png_bit_depth == 8 ? 255.0 : 65535.0;
      std::vector<uint16_t> codes(encoded.size());
      for (size_t i = 0; i < encoded.size(); ++i)
        codes[i] = static_cast<uint16_t>(
            std::min(max_code, std::floor(encoded.data()[i] * max_code + 0.5)));
      write_png_gray(path, encoded.width(), encoded.height(), png_bit_depth, codes);
      return;
    }
  }
}

}  // namespace nlpr::io
