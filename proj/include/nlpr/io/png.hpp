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

// Minimal PNG codec over zlib. Reads non-interlaced gray, gray+alpha, RGB
// and RGBA at 8 or 16 bits (alpha ignored); writes grayscale at 8 or 16
// bits with filter type None. Chunk CRCs are verified on read.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <zlib.h>

#include "nlpr/common.hpp"
#include "nlpr/io/pfm.hpp"

namespace nlpr::io {

struct PngData {
  int width = 0;
  int height = 0;
  int bit_depth = 8;   // 8 or 16
  int channels = 1;    // color channels excluding alpha
  bool had_alpha = false;
  std::vector<uint16_t> samples;  // interleaved, row-major, alpha stripped

  uint16_t max_code() const { return bit_depth == 8 ? 255 : 65535; }
};

namespace detail {

inline uint32_t be32(const unsigned char* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

inline void put_be32(uint32_t v, std::string& out) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

inline void put_chunk(const char type[4], const std::string& payload, std::string& out) {
  put_be32(static_cast<uint32_t>(payload.size()), out);
  const size_t type_pos = out.size();
  out.append(type, 4);
  out.append(payload);
  const uint32_t crc = ::crc32(
      0, reinterpret_cast<const Bytef*>(out.data() + type_pos), 4 + payload.size());
  put_be32(crc, out);
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace detail

inline const unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline PngData decode_png(const std::string& bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t size = bytes.size();
  if (size < 8 || std::memcmp(data, kPngSignature, 8) != 0)
    throw io_error("png: bad signature at byte offset 0");

  size_t pos = 8;
  bool saw_ihdr = false, saw_iend = false;
  uint32_t width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::string idat;

  while (pos < size && !saw_iend) {
    if (size - pos < 12)
      throw io_error("png: truncated chunk at byte offset " + std::to_string(pos));
    const uint32_t len = detail::be32(data + pos);
    if (size - pos - 12 < len)
      throw io_error("png: chunk length overruns file at byte offset " +
                     std::to_string(pos));
    const char* type = reinterpret_cast<const char*>(data + pos + 4);
    const unsigned char* payload = data + pos + 8;
    const uint32_t stored_crc = detail::be32(payload + len);
    const uint32_t actual_crc = ::crc32(0, data + pos + 4, 4 + len);
    if (stored_crc != actual_crc)
      throw io_error("png: CRC mismatch in '" + std::string(type, 4) +
                     "' chunk at byte offset " + std::to_string(pos));

    const std::string type_s(type, 4);
    if (type_s == "IHDR") {
      if (len != 13) throw io_error("png: IHDR length must be 13");
      width = detail::be32(payload);
      height = detail::be32(payload + 4);
      bit_depth = payload[8];
      color_type = payload[9];
      if (payload[10] != 0 || payload[11] != 0)
        throw io_error("png: unsupported compression/filter method");
      if (payload[12] != 0) throw io_error("png: interlaced images are not supported");
      if (bit_depth != 8 && bit_depth != 16)
        throw io_error("png: unsupported bit depth " + std::to_string(bit_depth));
      if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6)
        throw io_error("png: unsupported color type " + std::to_string(color_type));
      if (width == 0 || height == 0 || width > (1u << 24) || height > (1u << 24) ||
          static_cast<uint64_t>(width) * height > (1ull << 28))
        throw io_error("png: invalid dimensions");
      saw_ihdr = true;
    } else if (type_s == "IDAT") {
      if (!saw_ihdr) throw io_error("png: IDAT before IHDR");
      idat.append(reinterpret_cast<const char*>(payload), len);
    } else if (type_s == "IEND") {
      saw_iend = true;
    } else if (type_s == "PLTE") {
      throw io_error("png: palette images are not supported");
    }
    pos += 12 + static_cast<size_t>(len);
  }
  if (!saw_ihdr) throw io_error("png: missing IHDR chunk");
  if (!saw_iend) throw io_error("png: missing IEND chunk (truncated file)");
  if (idat.empty()) throw io_error("png: missing IDAT data");

  const int total_channels = (color_type == 0)   ? 1
                             : (color_type == 2) ? 3
                             : (color_type == 4) ? 2
                                                 : 4;
  const int bytes_per_sample = bit_depth / 8;
  const size_t bpp = static_cast<size_t>(total_channels) * bytes_per_sample;
  const size_t stride = static_cast<size_t>(width) * bpp;
  const size_t raw_size = (stride + 1) * height;

  std::vector<unsigned char> raw(raw_size);
  {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw io_error("png: inflate init failed");
    zs.next_in = reinterpret_cast<Bytef*>(idat.data());
    zs.avail_in = static_cast<uInt>(idat.size());
    zs.next_out = raw.data();
    zs.avail_out = static_cast<uInt>(raw.size());
    const int rc = inflate(&zs, Z_FINISH);
    const size_t produced = raw.size() - zs.avail_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != raw.size())
      throw io_error("png: corrupt or truncated IDAT stream (inflate rc " +
                     std::to_string(rc) + ")");
  }

  // Undo per-row filters in place.
  std::vector<unsigned char> prev(stride, 0);
  for (uint32_t y = 0; y < height; ++y) {
    unsigned char* row = raw.data() + static_cast<size_t>(y) * (stride + 1);
    const int filter = row[0];
    unsigned char* cur = row + 1;
    switch (filter) {
      case 0:
        break;
      case 1:
        for (size_t i = bpp; i < stride; ++i) cur[i] += cur[i - bpp];
        break;
      case 2:
        for (size_t i = 0; i < stride; ++i) cur[i] += prev[i];
        break;
      case 3:
        for (size_t i = 0; i < stride; ++i) {
          const int left = i >= bpp ? cur[i - bpp] : 0;
          cur[i] += static_cast<unsigned char>((left + prev[i]) / 2);
        }
        break;
      case 4:
        for (size_t i = 0; i < stride; ++i) {
          const int left = i >= bpp ? cur[i - bpp] : 0;
          const int upleft = i >= bpp ? prev[i - bpp] : 0;
          cur[i] += static_cast<unsigned char>(detail::paeth(left, prev[i], upleft));
        }
        break;
      default:
        throw io_error("png: unknown filter type " + std::to_string(filter) +
                       " in row " + std::to_string(y));
    }
    std::memcpy(prev.data(), cur, stride);
  }

  PngData out;
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.bit_depth = bit_depth;
  out.had_alpha = (color_type == 4 || color_type == 6);
  out.channels = out.had_alpha ? total_channels - 1 : total_channels;
  out.samples.resize(static_cast<size_t>(width) * height * out.channels);

  size_t si = 0;
  for (uint32_t y = 0; y < height; ++y) {
    const unsigned char* cur = raw.data() + static_cast<size_t>(y) * (stride + 1) + 1;
    for (uint32_t x = 0; x < width; ++x) {
      const unsigned char* px = cur + static_cast<size_t>(x) * bpp;
      for (int c = 0; c < out.channels; ++c) {
        if (bit_depth == 8)
          out.samples[si++] = px[c];
        else
          out.samples[si++] = static_cast<uint16_t>((px[2 * c] << 8) | px[2 * c + 1]);
      }
    }
  }
  return out;
}

inline PngData read_png(const std::string& path) { return decode_png(read_file_bytes(path)); }

// Grayscale PNG, filter None, quantized codes supplied by the caller.
inline std::string encode_png_gray(int width, int height, int bit_depth,
                                   const std::vector<uint16_t>& codes) {
  if (bit_depth != 8 && bit_depth != 16)
    throw config_error("png writer supports bit depths 8 and 16");
  if (codes.size() != static_cast<size_t>(width) * height)
    throw dimension_error("png writer: code count does not match dimensions");

  const size_t bpp = bit_depth / 8;
  const size_t stride = static_cast<size_t>(width) * bpp;
  std::vector<unsigned char> raw((stride + 1) * height);
  size_t ci = 0;
  for (int y = 0; y < height; ++y) {
    unsigned char* row = raw.data() + static_cast<size_t>(y) * (stride + 1);
    row[0] = 0;  // filter None
    for (int x = 0; x < width; ++x) {
      const uint16_t v = codes[ci++];
      if (bit_depth == 8) {
        row[1 + x] = static_cast<unsigned char>(v & 0xff);
      } else {
        row[1 + 2 * x] = static_cast<unsigned char>(v >> 8);
        row[2 + 2 * x] = static_cast<unsigned char>(v & 0xff);
      }
    }
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK)
    throw io_error("png: deflate failed");
  compressed.resize(bound);

  std::string out(reinterpret_cast<const char*>(kPngSignature), 8);
  std::string ihdr;
  detail::put_be32(static_cast<uint32_t>(width), ihdr);
  detail::put_be32(static_cast<uint32_t>(height), ihdr);
  ihdr.push_back(static_cast<char>(bit_depth));
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::put_chunk("IHDR", ihdr, out);
  detail::put_chunk("IDAT",
                    std::string(reinterpret_cast<const char*>(compressed.data()),
                                compressed.size()),
                    out);
  detail::put_chunk("IEND", "", out);
  return out;
}

inline void write_png_gray(const std::string& path, int width, int height, int bit_depth,
                           const std::vector<uint16_t>& codes) {
  write_file_bytes(path, encode_png_gray(width, height, bit_depth, codes));
}

}  // namespace nlpr::io
