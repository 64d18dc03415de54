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

// Portable float map reader/writer. Grayscale `Pf` and color `PF` variants,
// 32-bit samples, scanlines stored bottom-to-top, sign of the scale giving
// the byte order. Color reads collapse to Rec. 709 luma on linear values.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"

namespace nlpr::io {

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw io_error("short write to '" + path + "'");
}

namespace detail {

inline bool is_pfm_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

// Next whitespace-delimited header token starting at pos; advances pos past
// the single whitespace character that terminates it.
inline std::string pfm_token(const std::string& bytes, size_t& pos) {
  while (pos < bytes.size() && is_pfm_space(bytes[pos])) ++pos;
  const size_t start = pos;
  while (pos < bytes.size() && !is_pfm_space(bytes[pos])) ++pos;
  if (pos >= bytes.size())
    throw io_error("pfm: truncated header at byte offset " + std::to_string(start));
  std::string tok = bytes.substr(start, pos - start);
  ++pos;  // exactly one whitespace separates the header from the data
  return tok;
}

inline float load_f32(const unsigned char* p, bool little_endian) {
  uint32_t bits;
  if (little_endian)
    bits = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  else
    bits = static_cast<uint32_t>(p[3]) | (static_cast<uint32_t>(p[2]) << 8) |
           (static_cast<uint32_t>(p[1]) << 16) | (static_cast<uint32_t>(p[0]) << 24);
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

inline void store_f32_le(float v, std::string& out) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

}  // namespace detail

// Decodes a PFM byte buffer into a single grayscale grid (color inputs are
// collapsed to luma). The |scale| factor is applied to the samples.
inline Image decode_pfm(const std::string& bytes) {
  size_t pos = 0;
  const std::string magic = detail::pfm_token(bytes, pos);
  int channels;
  if (magic == "Pf")
    channels = 1;
  else if (magic == "PF")
    channels = 3;
  else
    throw io_error("pfm: bad magic '" + magic + "' at byte offset 0");

  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(detail::pfm_token(bytes, pos));
    height = std::stoi(detail::pfm_token(bytes, pos));
    scale = std::stod(detail::pfm_token(bytes, pos));
  } catch (const std::exception&) {
    throw io_error("pfm: malformed header near byte offset " + std::to_string(pos));
  }
  if (width <= 0 || height <= 0)
    throw io_error("pfm: invalid dimensions " + std::to_string(width) + "x" +
                   std::to_string(height));
  if (scale == 0.0 || !std::isfinite(scale)) throw io_error("pfm: invalid scale");
  const bool little_endian = scale < 0.0;
  const double factor = std::abs(scale);

  const size_t need =
      static_cast<size_t>(width) * height * channels * 4;
  if (bytes.size() - pos < need)
    throw io_error("pfm: truncated data at byte offset " + std::to_string(bytes.size()) +
                   " (need " + std::to_string(pos + need) + " bytes)");

  Image out(width, height);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  for (int y = 0; y < height; ++y) {
    // Scanlines are stored bottom-to-top.
    const int src_row = height - 1 - y;
    const unsigned char* row =
        data + static_cast<size_t>(src_row) * width * channels * 4;
    for (int x = 0; x < width; ++x) {
      double v;
      if (channels == 1) {
        v = detail::load_f32(row + static_cast<size_t>(x) * 4, little_endian);
      } else {
        const unsigned char* px = row + static_cast<size_t>(x) * 12;
        const double r = detail::load_f32(px, little_endian);
        const double g = detail::load_f32(px + 4, little_endian);
        const double b = detail::load_f32(px + 8, little_endian);
        v = kLumaR * r + kLumaG * g + kLumaB * b;
      }
      v *= factor;
      if (!std::isfinite(v))
        throw io_error("pfm: non-finite sample at pixel (" + std::to_string(y) + ", " +
                       std::to_string(x) + ")");
      out(y, x) = v;
    }
  }
  return out;
}

inline Image read_pfm(const std::string& path) { return decode_pfm(read_file_bytes(path)); }

// Grayscale `Pf`, little-endian, scale -1.
inline std::string encode_pfm(const Image& img) {
  std::string out = "Pf\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n-1.0\n";
  out.reserve(out.size() + img.size() * 4);
  for (int y = img.height() - 1; y >= 0; --y)
    for (int x = 0; x < img.width(); ++x)
      detail::store_f32_le(static_cast<float>(img(y, x)), out);
  return out;
}

inline void write_pfm(const Image& img, const std::string& path) {
  write_file_bytes(path, encode_pfm(img));
}

}  // namespace nlpr::io
