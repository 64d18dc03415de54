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

// Radiance RGBE (.hdr) reader. Handles the standard -Y +X orientation with
// both new-style per-component RLE scanlines and the old flat format
// (including its (1,1,1) repeat markers). Read-only: the artifact's
// lossless interchange format is PFM.
//
// Shared exponent decode: channel = (mantissa + 0.5) / 256 * 2^(e - 128).

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/io/pfm.hpp"

namespace nlpr::io {

namespace detail {

inline std::string hdr_line(const std::string& bytes, size_t& pos) {
  const size_t start = pos;
  while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
  if (pos >= bytes.size())
    throw io_error("hdr: truncated header at byte offset " + std::to_string(start));
  std::string line = bytes.substr(start, pos - start);
  ++pos;
  return line;
}

inline void decode_rgbe(const unsigned char rgbe[4], double& r, double& g, double& b) {
  if (rgbe[3] == 0) {
    r = g = b = 0.0;
    return;
  }
  const double f = std::ldexp(1.0, static_cast<int>(rgbe[3]) - 128) / 256.0;
  r = (rgbe[0] + 0.5) * f;
  g = (rgbe[1] + 0.5) * f;
  b = (rgbe[2] + 0.5) * f;
}

}  // namespace detail

// Decodes an .hdr byte buffer to linear luminance (Rec. 709 luma of the
// decoded RGB). A cumulative EXPOSURE header, when present, is divided out.
inline Image decode_hdr(const std::string& bytes) {
  size_t pos = 0;
  std::string line = detail::hdr_line(bytes, pos);
  if (line.rfind("#?", 0) != 0)
    throw io_error("hdr: bad magic at byte offset 0 (expected '#?RADIANCE')");

  double exposure = 1.0;
  bool format_ok = false;
  while (true) {
    line = detail::hdr_line(bytes, pos);
    if (line.empty()) break;  // blank line ends the header
    if (line[0] == '#') continue;
    if (line.rfind("FORMAT=", 0) == 0) {
      const std::string fmt = line.substr(7);
      if (fmt != "32-bit_rle_rgbe")
        throw io_error("hdr: unsupported format '" + fmt + "'");
      format_ok = true;
    } else if (line.rfind("EXPOSURE=", 0) == 0) {
      try {
        exposure *= std::stod(line.substr(9));
      } catch (const std::exception&) {
        throw io_error("hdr: bad EXPOSURE value");
      }
      if (!(exposure > 0.0)) throw io_error("hdr: nonpositive EXPOSURE");
    }
  }
  if (!format_ok) throw io_error("hdr: missing FORMAT=32-bit_rle_rgbe header");

  line = detail::hdr_line(bytes, pos);
  int width = 0, height = 0;
  if (std::sscanf(line.c_str(), "-Y %d +X %d", &height, &width) != 2)
    throw io_error("hdr: unsupported resolution line '" + line +
                   "' (only '-Y H +X W' is handled)");
  if (width <= 0 || height <= 0) throw io_error("hdr: invalid dimensions");

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t size = bytes.size();
  const auto need = [&](size_t n) {
    if (size - pos < n)
      throw io_error("hdr: truncated pixel data at byte offset " + std::to_string(pos));
  };

  Image out(width, height);
  std::vector<unsigned char> scanline(static_cast<size_t>(width) * 4);
  const double inv_exposure = 1.0 / exposure;

  for (int y = 0; y < height; ++y) {
    need(4);
    const unsigned char* head = data + pos;
    const bool new_rle = width >= 8 && width <= 0x7fff && head[0] == 2 && head[1] == 2 &&
                         ((head[2] << 8) | head[3]) == width;
    if (new_rle) {
      pos += 4;
      for (int comp = 0; comp < 4; ++comp) {
        int x = 0;
        while (x < width) {
          need(2);
          const int code = data[pos++];
          if (code > 128) {  // run of a single value
            const int count = code - 128;
            if (x + count > width) throw io_error("hdr: RLE run overflows scanline");
            const unsigned char v = data[pos++];
            for (int i = 0; i < count; ++i) scanline[(x + i) * 4 + comp] = v;
            x += count;
          } else {  // literal span
            const int count = code;
            if (count == 0 || x + count > width)
              throw io_error("hdr: invalid RLE literal length");
            need(static_cast<size_t>(count));
            for (int i = 0; i < count; ++i)
              scanline[(x + i) * 4 + comp] = data[pos++];
            x += count;
          }
        }
      }
    } else {
      // Old flat format; (1,1,1,n) repeats the previous pixel n<<(8*shift) times.
      int x = 0;
      int shift = 0;
      while (x < width) {
        need(4);
        const unsigned char* px = data + pos;
        pos += 4;
        if (px[0] == 1 && px[1] == 1 && px[2] == 1) {
          if (x == 0) throw io_error("hdr: repeat marker before any pixel");
          const int count = static_cast<int>(px[3]) << shift;
          if (x + count > width) throw io_error("hdr: repeat run overflows scanline");
          for (int i = 0; i < count; ++i)
            for (int c = 0; c < 4; ++c)
              scanline[(x + i) * 4 + c] = scanline[(x - 1) * 4 + c];
          x += count;
          shift += 8;
        } else {
          for (int c = 0; c < 4; ++c) scanline[x * 4 + c] = px[c];
          ++x;
          shift = 0;
        }
      }
    }
    for (int x = 0; x < width; ++x) {
      double r, g, b;
      detail::decode_rgbe(&scanline[static_cast<size_t>(x) * 4], r, g, b);
      out(y, x) = (kLumaR * r + kLumaG * g + kLumaB * b) * inv_exposure;
    }
  }
  return out;
}

inline Image read_hdr(const std::string& path) { return decode_hdr(read_file_bytes(path)); }

}  // namespace nlpr::io
