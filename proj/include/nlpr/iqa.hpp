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

// Image-quality-assessment harness: scores reference/distorted pairs and
// correlates the (negated) distances against mean opinion scores with
// Pearson and Spearman correlation. Also provides an offline substitute
// check (noise monotonicity) for when no rated database is available.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nlpr/display.hpp"
#include "nlpr/image.hpp"
#include "nlpr/nlpd.hpp"

namespace nlpr {

inline double pearson_correlation(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size()) throw dimension_error("correlation inputs differ in length");
  const size_t n = x.size();
  if (n < 2) throw domain_error("correlation needs at least 2 samples");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw domain_error("correlation undefined for zero-variance input");
  return sxy / std::sqrt(sxx * syy);
}

// Ranks with ties replaced by the average of the tied positions (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman_correlation(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  return pearson_correlation(average_ranks(x), average_ranks(y));
}

struct IqaEntry {
  std::string reference_path;
  std::string distorted_path;
  double mos = 0.0;
};

struct IqaManifest {
  std::vector<IqaEntry> entries;
  DisplayModel luminance_mapping{};  // maps stored pixel values to cd/m^2
};

struct IqaResult {
  double pearson = 0.0;
  double spearman = 0.0;
  int n = 0;
  int skipped = 0;
  std::vector<std::string> warnings;
  std::vector<double> scores;  // NLPD per scored pair, manifest order
  std::vector<double> mos;
};

// Scores every manifest pair with an image loader supplied by the caller
// (keeps this header free of file-format concerns). Unreadable entries are
// skipped with a warning. Correlations are computed on (-NLPD, MOS).
template <typename LoadFn>
IqaResult score_database(const IqaManifest& manifest, const NlpParams& params,
                         LoadFn&& load) {
  IqaResult out;
  std::vector<double> neg_scores;
  for (const IqaEntry& e : manifest.entries) {
    try {
      const LuminanceImage ref = load(e.reference_path, manifest.luminance_mapping);
      const LuminanceImage dist = load(e.distorted_path, manifest.luminance_mapping);
      const double d = nlpd(ref, dist, params).total;
      out.scores.push_back(d);
      out.mos.push_back(e.mos);
      neg_scores.push_back(-d);
    } catch (const error& err) {
      ++out.skipped;
      out.warnings.push_back("skipping '" + e.reference_path + "' / '" +
                             e.distorted_path + "': " + err.what());
    }
  }
  out.n = static_cast<int>(out.scores.size());
  if (out.n >= 2) {
    try {
      out.pearson = pearson_correlation(neg_scores, out.mos);
      out.spearman = spearman_correlation(neg_scores, out.mos);
    } catch (const domain_error& err) {
      out.warnings.push_back(std::string("correlation undefined: ") + err.what());
    }
  }
  return out;
}

namespace detail {

// Deterministic standard normals: xorshift-mixed counter generator with a
// Box-Muller transform, identical across platforms for a given seed.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    next_u64();
  }
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

struct NoiseMonotonicityResult {
  bool monotone = false;
  std::vector<double> distances;  // one per amplitude
};

// True iff NLPD(ref, ref + gaussian noise of amplitude a) is strictly
// increasing in a. Amplitudes are fractions of the reference dynamic range
// and must be >= 3, strictly increasing. One noise field is drawn from the
// seed and scaled per amplitude; noisy values are clipped at zero.
inline NoiseMonotonicityResult noise_monotonicity_check(
    const LuminanceImage& reference, const std::vector<double>& amplitudes,
    uint64_t seed, const NlpParams& params, const AblationConfig& ablate = {}) {
  if (amplitudes.size() < 3)
    throw domain_error("noise monotonicity check needs >= 3 amplitudes");
  for (size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] >= 0.0))
      throw domain_error("noise amplitudes must be nonnegative");
    if (i > 0 && !(amplitudes[i] > amplitudes[i - 1]))
      throw domain_error("noise amplitudes must be strictly increasing");
  }
  const Image& g = reference.grid();
  const double range = g.max_value() - g.min_value();
  detail::NormalSampler normal(seed);
  std::vector<double> noise(g.size());
  for (double& v : noise) v = normal();

  NoiseMonotonicityResult out;
  const NlpRepresentation ref_rep = nlp_transform(reference, params, ablate);
  for (double a : amplitudes) {
    Image noisy(g.width(), g.height());
    const double scale = a * range;
    for (size_t i = 0; i < g.size(); ++i)
      noisy.data()[i] = std::max(0.0, g.data()[i] + scale * noise[i]);
    out.distances.push_back(
        nlpd_from_reference(ref_rep, LuminanceImage(std::move(noisy)), params, ablate)
            .total);
  }
  out.monotone = true;
  for (size_t i = 1; i < out.distances.size(); ++i)
    if (!(out.distances[i] > out.distances[i - 1])) out.monotone = false;
  return out;
}

// Manifest CSV: header line `reference,distorted,mos`, one entry per line.
// Paths must not contain commas.
inline IqaManifest parse_iqa_manifest_csv(const std::string& text,
                                          const DisplayModel& mapping) {
  IqaManifest manifest;
  manifest.luminance_mapping = mapping;
  size_t pos = 0;
  int line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // trim
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);
    if (!saw_header) {
      if (line != "reference,distorted,mos")
        throw io_error("manifest line 1: expected header 'reference,distorted,mos'");
      saw_header = true;
      continue;
    }
    const size_t c1 = line.find(',');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw io_error("manifest line " + std::to_string(line_no) +
                     ": expected 'reference,distorted,mos'");
    IqaEntry e;
    e.reference_path = line.substr(0, c1);
    e.distorted_path = line.substr(c1 + 1, c2 - c1 - 1);
    try {
      e.mos = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw io_error("manifest line " + std::to_string(line_no) + ": bad MOS value");
    }
    if (!std::isfinite(e.mos))
      throw io_error("manifest line " + std::to_string(line_no) + ": MOS not finite");
    manifest.entries.push_back(std::move(e));
  }
  if (!saw_header) throw io_error("manifest is empty");
  return manifest;
}

}  // namespace nlpr
