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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include <doctest.h>
#include <zlib.h>

#include "nlpr/io/image_io.hpp"
#include "oracles.hpp"

using namespace nlpr;

namespace {

std::string temp_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "nlpr_io_tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

void put_f32_le(float v, std::string& out) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

// Minimal PNG builder for decoder tests (color types our writer does not
// produce).
std::string build_png(uint32_t w, uint32_t h, int depth, int color_type,
                      const std::vector<unsigned char>& raw_scanlines) {
  std::string out(reinterpret_cast<const char*>(io::kPngSignature), 8);
  std::string ihdr;
  io::detail::put_be32(w, ihdr);
  io::detail::put_be32(h, ihdr);
  ihdr.push_back(static_cast<char>(depth));
  ihdr.push_back(static_cast<char>(color_type));
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  io::detail::put_chunk("IHDR", ihdr, out);
  uLongf bound = compressBound(static_cast<uLong>(raw_scanlines.size()));
  std::vector<unsigned char> comp(bound);
  REQUIRE(compress2(comp.data(), &bound, raw_scanlines.data(),
                    static_cast<uLong>(raw_scanlines.size()), 6) == Z_OK);
  io::detail::put_chunk(
      "IDAT", std::string(reinterpret_cast<const char*>(comp.data()), bound), out);
  io::detail::put_chunk("IEND", "", out);
  return out;
}

}  // namespace

TEST_CASE("pfm round trip is bit-exact for float-representable values") {
  Image img(2, 2);
  img(0, 0) = 1.0;
  img(0, 1) = 2.0;
  img(1, 0) = 3.0;
  img(1, 1) = 4.0;
  const std::string path = temp_path("roundtrip.pfm");
  io::write_pfm(img, path);
  const Image back = io::read_pfm(path);
  REQUIRE(back.width() == 2);
  REQUIRE(back.height() == 2);
  for (size_t i = 0; i < img.size(); ++i) CHECK(back.values()[i] == img.values()[i]);
}

TEST_CASE("pfm round trip of arbitrary values stays within float precision") {
  const Image img = oracle::uniform_random(23, 17, 130, 0.0, 16200.0);
  const std::string path = temp_path("precision.pfm");
  io::write_pfm(img, path);
  const Image back = io::read_pfm(path);
  for (size_t i = 0; i < img.size(); ++i) {
    const double rel =
        std::abs(back.values()[i] - img.values()[i]) / (std::abs(img.values()[i]) + 1e-30);
    CHECK(rel <= 1e-6);
  }
}

TEST_CASE("pfm scanlines are stored bottom-to-top") {
  // hand-crafted 1x2 grayscale map: bottom row first in the file
  std::string bytes = "Pf\n1 2\n-1.0\n";
  put_f32_le(10.0f, bytes);  // bottom row (y = 1)
  put_f32_le(20.0f, bytes);  // top row (y = 0)
  const Image img = io::decode_pfm(bytes);
  CHECK(img(0, 0) == 20.0);
  CHECK(img(1, 0) == 10.0);
}

TEST_CASE("color pfm collapses to Rec. 709 luma") {
  std::string bytes = "PF\n1 1\n-1.0\n";
  put_f32_le(1.0f, bytes);
  put_f32_le(0.5f, bytes);
  put_f32_le(0.25f, bytes);
  const Image img = io::decode_pfm(bytes);
  CHECK(img(0, 0) == doctest::Approx(0.2126 * 1.0 + 0.7152 * 0.5 + 0.0722 * 0.25)
                         .epsilon(1e-7));
}

TEST_CASE("pfm positive scale means big-endian and applies the factor") {
  std::string bytes = "Pf\n1 1\n2.0\n";
  // big-endian 1.0f
  bytes.push_back(0x3f);
  bytes.push_back(char(0x80));
  bytes.push_back(0);
  bytes.push_back(0);
  const Image img = io::decode_pfm(bytes);
  CHECK(img(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("malformed pfm headers raise structured errors") {
  CHECK_THROWS_AS(io::decode_pfm("P5\n1 1\n-1.0\n junk"), io_error);
  CHECK_THROWS_AS(io::decode_pfm("Pf\n4 4\n-1.0\nshort"), io_error);
  CHECK_THROWS_AS(io::decode_pfm("Pf\n-3 4\n-1.0\n"), io_error);
  CHECK_THROWS_AS(io::decode_pfm("Pf\n1 1\n0\nxxxx"), io_error);
  CHECK_THROWS_AS(io::decode_pfm(""), io_error);
  CHECK_THROWS_AS(io::read_pfm(temp_path("does_not_exist.pfm")), io_error);
}

TEST_CASE("rgbe flat format decodes the shared-exponent formula") {
  std::string bytes = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 2\n";
  const unsigned char px[8] = {128, 128, 128, 129, 0, 0, 0, 0};
  bytes.append(reinterpret_cast<const char*>(px), 8);
  const Image img = io::decode_hdr(bytes);
  REQUIRE(img.width() == 2);
  // (128 + 0.5) / 256 * 2^(129 - 128) = 1.00390625 for each channel
  CHECK(img(0, 0) == doctest::Approx(1.00390625).epsilon(1e-12));
  CHECK(img(0, 1) == 0.0);
}

TEST_CASE("rgbe old-format repeat markers expand the previous pixel") {
  std::string bytes = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 4\n";
  const unsigned char data[] = {128, 128, 128, 129, 1, 1, 1, 3};
  bytes.append(reinterpret_cast<const char*>(data), 8);
  const Image img = io::decode_hdr(bytes);
  for (int x = 0; x < 4; ++x) CHECK(img(0, x) == doctest::Approx(1.00390625));
}

TEST_CASE("rgbe new-style RLE scanlines decode") {
  const int w = 8;
  std::string bytes = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 8\n";
  unsigned char head[4] = {2, 2, 0, w};
  bytes.append(reinterpret_cast<const char*>(head), 4);
  // each component: one run of 8 identical bytes
  const unsigned char comp_vals[4] = {128, 128, 128, 129};
  for (int c = 0; c < 4; ++c) {
    bytes.push_back(static_cast<char>(128 + w));  // run length 8
    bytes.push_back(static_cast<char>(comp_vals[c]));
  }
  const Image img = io::decode_hdr(bytes);
  for (int x = 0; x < w; ++x) CHECK(img(0, x) == doctest::Approx(1.00390625));
}

TEST_CASE("rgbe exposure header divides out") {
  std::string bytes = "#?RADIANCE\nEXPOSURE=2.0\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 1\n";
  const unsigned char px[4] = {128, 128, 128, 129};
  bytes.append(reinterpret_cast<const char*>(px), 4);
  CHECK(io::decode_hdr(bytes)(0, 0) == doctest::Approx(1.00390625 / 2.0));
}

TEST_CASE("malformed hdr input raises structured errors") {
  CHECK_THROWS_AS(io::decode_hdr("not radiance"), io_error);
  CHECK_THROWS_AS(io::decode_hdr("#?RADIANCE\nFORMAT=rgbe8\n\n-Y 1 +X 1\n"), io_error);
  CHECK_THROWS_AS(io::decode_hdr("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n+Y 1 +X 1\n"),
                  io_error);
  CHECK_THROWS_AS(io::decode_hdr("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 2 +X 9\nxx"),
                  io_error);
}

TEST_CASE("png gray round trip preserves codes at both depths") {
  for (int depth : {8, 16}) {
    const int w = 5, h = 3;
    std::vector<uint16_t> codes(w * h);
    const uint16_t max_code = depth == 8 ? 255 : 65535;
    for (size_t i = 0; i < codes.size(); ++i)
      codes[i] = static_cast<uint16_t>((i * 37) % (max_code + 1));
    const std::string path = temp_path("codes" + std::to_string(depth) + ".png");
    io::write_png_gray(path, w, h, depth, codes);
    const io::PngData back = io::read_png(path);
    CHECK(back.width == w);
    CHECK(back.height == h);
    CHECK(back.bit_depth == depth);
    CHECK(back.channels == 1);
    for (size_t i = 0; i < codes.size(); ++i) CHECK(back.samples[i] == codes[i]);
  }
}

TEST_CASE("png decoder handles all five filter types") {
  // 3x3 gray 8-bit with rows filtered as None/Sub/Up and Average/Paeth
  const std::vector<unsigned char> raw = {
      0, 10, 20, 30,        // None
      1, 5, 5, 5,           // Sub: 5, 10, 15
      2, 1, 2, 3,           // Up: 6, 12, 18
  };
  const io::PngData a = io::decode_png(build_png(3, 3, 8, 0, raw));
  const std::vector<uint16_t> expect_a = {10, 20, 30, 5, 10, 15, 6, 12, 18};
  for (size_t i = 0; i < expect_a.size(); ++i) CHECK(a.samples[i] == expect_a[i]);

  const std::vector<unsigned char> raw2 = {
      3, 10, 20, 30,  // Average with zero prior row: 10, 25, 42
      4, 1, 1, 1,     // Paeth
  };
  const io::PngData b = io::decode_png(build_png(3, 2, 8, 0, raw2));
  CHECK(b.samples[0] == 10);
  CHECK(b.samples[1] == 25);
  CHECK(b.samples[2] == 42);
  // Paeth for the second row: left/up/upleft predictions
  CHECK(b.samples[3] == 11);  // predictor = up (10)
  CHECK(b.samples[4] == 26);  // predictor: p chooses up (25)
  CHECK(b.samples[5] == 43);
}

TEST_CASE("rgb and alpha pngs collapse to luma, alpha ignored") {
  // 1x1 RGBA8: pure green, half alpha
  const std::vector<unsigned char> raw = {0, 0, 255, 0, 128};
  const io::PngData png = io::decode_png(build_png(1, 1, 8, 6, raw));
  CHECK(png.channels == 3);
  CHECK(png.had_alpha);
  const DisplayModel d{0.0, 100.0, 1.0};
  const LuminanceImage lum = io::png_to_luminance(png, d);
  CHECK(lum(0, 0) == doctest::Approx(100.0 * 0.7152).epsilon(1e-9));
}

TEST_CASE("png code 255 decodes to the display white point") {
  const std::string path = temp_path("white.png");
  io::write_png_gray(path, 1, 1, 8, {255});
  const DisplayModel d{5.0, 300.0, 2.2};
  const LuminanceImage lum = io::load_image(path, d);
  CHECK(lum(0, 0) == doctest::Approx(300.0).epsilon(1e-12));
}

TEST_CASE("saving the black-point constant image gives all-zero codes") {
  const DisplayModel d{5.0, 300.0, 2.2};
  const std::string path = temp_path("black.png");
  io::save_image(LuminanceImage(Image(4, 3, 5.0)), path, d, 8);
  const io::PngData back = io::read_png(path);
  for (uint16_t v : back.samples) CHECK(v == 0);
}

TEST_CASE("8-bit png quantization is exact over every code") {
  const DisplayModel d{5.0, 300.0, 2.2};
  std::vector<uint16_t> codes(256);
  for (int c = 0; c < 256; ++c) codes[c] = static_cast<uint16_t>(c);
  const std::string path = temp_path("allcodes.png");
  io::write_png_gray(path, 16, 16, 8, codes);
  const LuminanceImage lum = io::load_image(path, d);
  const std::string path2 = temp_path("allcodes2.png");
  io::save_image(lum, path2, d, 8);
  const io::PngData back = io::read_png(path2);
  for (int c = 0; c < 256; ++c) {
    CHECK(back.samples[c] == codes[c]);
    // quantization error in the encoded domain is at most half a code
    const Image encoded = encode_for_display(lum, d);
    CHECK(std::abs(encoded.values()[c] * 255.0 - codes[c]) <= 0.5 + 1e-9);
  }
}

TEST_CASE("saving an infeasible image as png is a constraint violation") {
  const DisplayModel d{5.0, 300.0, 2.2};
  CHECK_THROWS_AS(
      io::save_image(LuminanceImage(Image(2, 2, 500.0)), temp_path("bad.png"), d, 8),
      domain_error);
  CHECK_THROWS_AS(
      io::save_image(LuminanceImage(Image(2, 2, 50.0)), temp_path("bad.hdr"), d, 8),
      io_error);
}

TEST_CASE("malformed pngs raise structured errors instead of crashing") {
  CHECK_THROWS_AS(io::decode_png("notapng"), io_error);
  // good file, then corrupt one byte inside IDAT (CRC catches it)
  std::string good = io::encode_png_gray(4, 4, 8, std::vector<uint16_t>(16, 128));
  std::string corrupt = good;
  corrupt[45] = static_cast<char>(corrupt[45] ^ 0x40);
  CHECK_THROWS_AS(io::decode_png(corrupt), io_error);
  // truncation
  CHECK_THROWS_AS(io::decode_png(good.substr(0, good.size() / 2)), io_error);
  CHECK_THROWS_AS(io::decode_png(good.substr(0, 16)), io_error);
  // interlace flag
  std::vector<unsigned char> raw = {0, 1};
  std::string interlaced = build_png(1, 1, 8, 0, raw);
  interlaced[8 + 4 + 4 + 12] = 1;  // IHDR interlace byte
  // fix the CRC so only the interlace rejection triggers
  {
    const size_t type_pos = 8 + 4;
    const uint32_t crc = ::crc32(
        0, reinterpret_cast<const Bytef*>(interlaced.data() + type_pos), 4 + 13);
    std::string c;
    io::detail::put_be32(crc, c);
    interlaced.replace(type_pos + 4 + 13, 4, c);
  }
  CHECK_THROWS_WITH_AS(io::decode_png(interlaced), doctest::Contains("interlaced"),
                       io_error);
}

TEST_CASE("decoders never crash on truncated or bit-flipped input") {
  std::string pfm = io::encode_pfm(oracle::uniform_random(7, 5, 140, 0.0, 10.0));
  std::string png = io::encode_png_gray(7, 5, 8, std::vector<uint16_t>(35, 77));
  std::string hdr = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 2 +X 2\n";
  const unsigned char px[4] = {128, 64, 32, 129};
  for (int i = 0; i < 4; ++i) hdr.append(reinterpret_cast<const char*>(px), 4);

  std::mt19937_64 rng(141);
  const auto hammer = [&](const std::string& bytes, auto decode) {
    for (size_t cut = 0; cut < bytes.size(); cut += 1 + cut / 7) {
      try {
        decode(bytes.substr(0, cut));
      } catch (const error&) {
      }
    }
    for (int rep = 0; rep < 200; ++rep) {
      std::string mutated = bytes;
      const size_t pos = rng() % mutated.size();
      mutated[pos] = static_cast<char>(rng());
      try {
        decode(mutated);
      } catch (const error&) {
      }
    }
  };
  hammer(pfm, [](const std::string& b) { io::decode_pfm(b); });
  hammer(png, [](const std::string& b) { io::decode_png(b); });
  hammer(hdr, [](const std::string& b) { io::decode_hdr(b); });
  CHECK(true);  // reaching here means no crash and only structured errors
}

TEST_CASE("format detection by extension") {
  CHECK(io::format_from_path("a/b/c.pfm") == io::ImageFileFormat::Pfm);
  CHECK(io::format_from_path("x.HDR") == io::ImageFileFormat::RadianceHdr);
  CHECK(io::format_from_path("x.png") == io::ImageFileFormat::Png);
  CHECK_THROWS_AS(io::format_from_path("x.exr"), io_error);
  CHECK_THROWS_AS(io::format_from_path("noext"), io_error);
}
