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

// Command-line front end. Subcommands: render, distance, dither, energy,
// detail, iqa, ablate, transform-dump. Exit codes: 0 success, 1 usage,
// 2 data/config error, 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlpr/config_json.hpp"
#include "nlpr/io/image_io.hpp"
#include "nlpr/nlpr.hpp"

namespace {

using nlohmann::json;
using namespace nlpr;

struct GlobalOpts {
  std::optional<double> s_min, s_max;
  double i_min = 5.0;
  double i_max = 300.0;
  double display_gamma = 2.2;
  int levels_count = 2;
  std::optional<int> iters;
  std::optional<double> step;
  std::string params_json_path;
  std::string trace_csv_path;
  long seed = 0;
};

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw config_error(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) throw config_error(std::string("empty ") + what + " list");
  return out;
}

DisplayModel display_from(const GlobalOpts& g) {
  DisplayModel d{g.i_min, g.i_max, g.display_gamma};
  d.validate();
  return d;
}

struct Config {
  NlpParams params;
  OptimizerConfig optimizer;
};

// Precedence: CLI flags > JSON params file > built-in defaults.
Config resolve_config(const GlobalOpts& g) {
  Config cfg;
  if (!g.params_json_path.empty()) {
    JsonConfig jc = config_from_json_text(io::read_file_bytes(g.params_json_path));
    cfg.params = jc.params;
    if (jc.has_optimizer) cfg.optimizer = jc.optimizer;
  }
  if (g.iters) cfg.optimizer.max_iters = *g.iters;
  if (g.step) cfg.optimizer.step_size = *g.step;
  cfg.optimizer.seed = g.seed;
  cfg.optimizer.validate();
  cfg.params.validate();
  return cfg;
}

// Raw file values on the linear scale: PFM/HDR as stored, PNG decoded
// through the display model.
Image load_linear(const std::string& path, const DisplayModel& display) {
  const io::ImageFileFormat fmt = io::format_from_path(path);
  switch (fmt) {
    case io::ImageFileFormat::Pfm:
      return io::read_pfm(path);
    case io::ImageFileFormat::RadianceHdr:
      return io::read_hdr(path);
    case io::ImageFileFormat::Png:
      return io::png_to_luminance(io::read_png(path), display).grid();
  }
  throw io_error("unreachable format");
}

// Normalized values in [0, 1]: PNG codes divided by their maximum, PFM/HDR
// values min/max rescaled.
Image load_normalized(const std::string& path, const DisplayModel& display) {
  if (io::format_from_path(path) == io::ImageFileFormat::Png) {
    const io::PngData png = io::read_png(path);
    Image out(png.width, png.height);
    const double max_code = png.max_code();
    size_t si = 0;
    for (int y = 0; y < png.height; ++y)
      for (int x = 0; x < png.width; ++x) {
        double v;
        if (png.channels == 1) {
          v = png.samples[si] / max_code;
        } else {
          v = (kLumaR * png.samples[si] + kLumaG * png.samples[si + 1] +
               kLumaB * png.samples[si + 2]) /
              max_code;
        }
        out(y, x) = v;
        si += png.channels;
      }
    return out;
  }
  Image raw = load_linear(path, display);
  const double mn = raw.min_value(), mx = raw.max_value();
  if (mx > mn)
    for (auto& v : raw.values()) v = (v - mn) / (mx - mn);
  else
    for (auto& v : raw.values()) v = 0.0;
  return raw;
}

Image source_for_acquisition(const std::string& path, const AcquisitionSpec& acq,
                             const DisplayModel& display) {
  if (std::holds_alternative<CalibratedHdr>(acq)) return load_linear(path, display);
  return load_normalized(path, display);
}

void save_output(const LuminanceImage& img, const std::string& path,
                 const DisplayModel& display, int png_depth) {
  io::save_image(img, path, display, png_depth);
}

void emit_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_render(const GlobalOpts& g, const std::string& preset, const std::string& in,
               const std::string& out, const std::string& baseline_out, int png_depth) {
  const Config cfg = resolve_config(g);
  RenderTask task = preset.empty() ? make_preset("tonemap-hdr") : make_preset(preset);
  task.display = display_from(g);
  task.constraint = BoxConstraint{g.i_min, g.i_max};
  task.optimizer = cfg.optimizer;
  if (auto* ldr = std::get_if<CalibratedLdr>(&task.acquisition)) {
    // The CLI feeds the mapping normalized values; --smin/--smax set the
    // calibrated scene range, defaulting to the display range.
    ldr->mapping.r_max = 1.0;
    ldr->mapping.s_min = g.s_min.value_or(g.i_min);
    ldr->mapping.s_max = g.s_max.value_or(g.i_max);
  } else if (g.s_min || g.s_max) {
    UncalibratedLinear un;
    if (const auto* cur = std::get_if<UncalibratedLinear>(&task.acquisition)) un = *cur;
    if (g.s_min) un.s_min = *g.s_min;
    if (g.s_max) un.s_max = *g.s_max;
    task.acquisition = un;
  }

  const Image source = source_for_acquisition(in, task.acquisition, task.display);
  RenderResult result = render(source, task, cfg.params);
  save_output(result.image, out, task.display, png_depth);
  if (!baseline_out.empty())
    save_output(result.baseline, baseline_out, task.display, png_depth);
  if (!g.trace_csv_path.empty()) write_trace_csv(result.trace, g.trace_csv_path);

  json j;
  j["preset"] = task.preset_name.empty() ? "tonemap-hdr" : task.preset_name;
  j["d_optimized"] = result.d_optimized;
  j["d_baseline"] = result.d_baseline;
  j["converged"] = result.trace.converged;
  j["iterations"] = result.trace.samples.empty() ? 0 : result.trace.samples.back().iter;
  emit_json(j);
  return 0;
}

int run_distance(const GlobalOpts& g, const std::string& a, const std::string& b) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  const LuminanceImage img_a = io::load_image(a, display);
  const LuminanceImage img_b = io::load_image(b, display);
  const DistanceBreakdown d = nlpd(img_a, img_b, cfg.params);
  json j;
  j["total"] = d.total;
  j["per_channel"] = d.per_channel;
  emit_json(j);
  return 0;
}

int run_dither(const GlobalOpts& g, const std::string& in, const std::string& out,
               const std::string& level_values, const std::string& method,
               const std::string& window, const std::string& baseline_out,
               int png_depth) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  std::vector<double> levels =
      level_values.empty() ? uniform_levels(g.levels_count, g.i_min, g.i_max)
                           : parse_double_list(level_values, "level");
  DiscreteLevelsConstraint{levels}.validate();

  AcquisitionSpec acq = CalibratedHdr{};
  if (g.s_min && g.s_max) acq = UncalibratedLinear{*g.s_min, *g.s_max};
  const Image source = source_for_acquisition(in, acq, display);
  const LuminanceImage scene = apply_acquisition(source, acq);

  json j;
  j["levels"] = levels;
  j["method"] = method;
  if (method == "fs") {
    const LuminanceImage result = floyd_steinberg(scene, levels);
    save_output(result, out, display, png_depth);
    j["d"] = nlpd(scene, result, cfg.params).total;
  } else if (method == "greedy") {
    RenderTask task;
    task.display = display;
    task.constraint = DiscreteLevelsConstraint{levels};
    task.optimizer = cfg.optimizer;
    if (window == "exact") {
      task.dither_mode = {DitherMode::Kind::Exact, 0};
    } else if (!window.empty()) {
      try {
        task.dither_mode = {DitherMode::Kind::Windowed, std::stoi(window)};
      } catch (const std::exception&) {
        throw config_error("--window expects an integer radius or 'exact', got '" +
                           window + "'");
      }
    }
    RenderResult result = render(scene.grid(), task, cfg.params);
    save_output(result.image, out, display, png_depth);
    if (!baseline_out.empty())
      save_output(result.baseline, baseline_out, display, png_depth);
    if (!g.trace_csv_path.empty()) write_trace_csv(result.trace, g.trace_csv_path);
    j["d"] = result.d_optimized;
    j["d_floyd_steinberg"] = result.d_baseline;
  } else {
    throw config_error("unknown dither method '" + method + "' (greedy|fs)");
  }
  emit_json(j);
  return 0;
}

int run_energy(const GlobalOpts& g, const std::string& in, const std::string& fracs_csv,
               const std::string& out_csv) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  AcquisitionSpec acq = CalibratedHdr{};
  if (g.s_min && g.s_max) acq = UncalibratedLinear{*g.s_min, *g.s_max};
  const LuminanceImage scene =
      apply_acquisition(source_for_acquisition(in, acq, display), acq);
  const std::vector<double> fracs = parse_double_list(fracs_csv, "mean fraction");

  const EnergyCurve curve =
      energy_curve(scene, display, fracs, cfg.params, {}, cfg.optimizer);
  for (const std::string& warning : curve.warnings)
    std::cerr << "warning: " << warning << "\n";

  std::ostringstream table;
  table << "i_mean,d_optimized,d_rescaled,energy_saved_fraction\n";
  char buf[160];
  for (const EnergyPoint& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", p.i_mean, p.d_optimized,
                  p.d_rescaled, p.energy_saved_fraction);
    table << buf;
  }
  std::cout << table.str();
  if (!out_csv.empty()) io::write_file_bytes(out_csv, table.str());
  if (curve.monotonicity_violations > 0)
    std::cerr << "warning: " << curve.monotonicity_violations
              << " monotonicity violation(s) along the optimized curve\n";
  return 0;
}

int run_detail(const GlobalOpts& g, const std::string& in, const std::string& out_prefix,
               const std::string& smax_csv, double s_min, const std::string& format,
               int png_depth) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  const Image normalized = load_normalized(in, display);
  const std::vector<double> smax_list = parse_double_list(smax_csv, "s_max");

  const std::vector<RenderResult> results = detail_enhance(
      normalized, smax_list, s_min, display, cfg.params, {}, cfg.optimizer);
  json j = json::array();
  for (size_t i = 0; i < results.size(); ++i) {
    const std::string path = out_prefix + "_" + std::to_string(i + 1) + "." + format;
    save_output(results[i].image, path, display, png_depth);
    j.push_back({{"s_max", smax_list[i]},
                 {"output", path},
                 {"d_optimized", results[i].d_optimized},
                 {"d_baseline", results[i].d_baseline}});
  }
  emit_json(j);
  return 0;
}

int run_iqa(const GlobalOpts& g, const std::string& manifest_path,
            const std::string& noise_images, const std::string& amplitudes_csv) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);

  if (!noise_images.empty()) {
    std::vector<double> amplitudes = parse_double_list(amplitudes_csv, "amplitude");
    json j = json::array();
    std::stringstream ss(noise_images);
    std::string path;
    bool all_monotone = true;
    while (std::getline(ss, path, ',')) {
      const LuminanceImage img = io::load_image(path, display);
      const NoiseMonotonicityResult r = noise_monotonicity_check(
          img, amplitudes, static_cast<uint64_t>(g.seed), cfg.params);
      all_monotone = all_monotone && r.monotone;
      j.push_back({{"image", path}, {"monotone", r.monotone}, {"distances", r.distances}});
    }
    emit_json(json{{"monotone", all_monotone}, {"per_image", j}});
    return 0;
  }

  if (manifest_path.empty())
    throw config_error("iqa needs a manifest path or --noise-check");
  const IqaManifest manifest =
      parse_iqa_manifest_csv(io::read_file_bytes(manifest_path), display);
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  const auto load = [&](const std::string& rel, const DisplayModel& mapping) {
    std::filesystem::path p(rel);
    if (p.is_relative()) p = base / p;
    return io::load_image(p.string(), mapping);
  };
  const IqaResult r = score_database(manifest, cfg.params, load);
  for (const std::string& warning : r.warnings)
    std::cerr << "warning: " << warning << "\n";
  json j;
  j["pearson"] = r.pearson;
  j["spearman"] = r.spearman;
  j["n"] = r.n;
  j["skipped"] = r.skipped;
  emit_json(j);
  return 0;
}

int run_ablate(const GlobalOpts& g, const std::string& in, const std::string& out_prefix,
               const std::string& format, int png_depth) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  AcquisitionSpec acq = CalibratedHdr{};
  if (g.s_min && g.s_max) acq = UncalibratedLinear{*g.s_min, *g.s_max};
  const LuminanceImage scene =
      apply_acquisition(source_for_acquisition(in, acq, display), acq);

  const std::vector<AblationOutcome> outcomes = ablation_suite(
      scene, BoxConstraint{g.i_min, g.i_max}, cfg.params, cfg.optimizer);
  json j;
  for (const AblationOutcome& o : outcomes) {
    const std::string path = out_prefix + "_" + o.name + "." + format;
    save_output(o.image, path, display, png_depth);
    j[o.name] = {{"d_full_metric", o.d_full},
                 {"n_channels", o.n_channels},
                 {"output", path}};
  }
  emit_json(j);
  return 0;
}

int run_transform_dump(const GlobalOpts& g, const std::string& in,
                       const std::string& out_prefix) {
  const Config cfg = resolve_config(g);
  const DisplayModel display = display_from(g);
  const LuminanceImage img = io::load_image(in, display);
  const NlpRepresentation rep = nlp_transform(img, cfg.params);
  json dims = json::array();
  for (int k = 0; k < rep.n_channels(); ++k) {
    const Image& ch = rep.channels[k];
    io::write_pfm(ch, out_prefix + "_ch" + std::to_string(k) + ".pfm");
    dims.push_back({ch.width(), ch.height()});
  }
  emit_json(json{{"channels", rep.n_channels()}, {"level_dims", dims}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nlpr: perceptually optimized rendering of luminance images onto "
      "constrained displays, using the normalized Laplacian pyramid distance"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--smin", g.s_min, "Assumed minimum scene luminance (cd/m^2)");
  app.add_option("--smax", g.s_max, "Assumed maximum scene luminance (cd/m^2)");
  app.add_option("--imin", g.i_min, "Display black point (cd/m^2)")->capture_default_str();
  app.add_option("--imax", g.i_max, "Display white point (cd/m^2)")->capture_default_str();
  app.add_option("--display-gamma", g.display_gamma, "Display gamma exponent")->capture_default_str();
  app.add_option("--levels-count", g.levels_count, "Number of gray levels")->capture_default_str();
  app.add_option("--iters", g.iters, "Optimizer iteration budget");
  app.add_option("--step", g.step, "Optimizer step size");
  app.add_option("--params-json", g.params_json_path, "Transform/metric parameter file");
  app.add_option("--trace-csv", g.trace_csv_path, "Write the optimization trace here");
  app.add_option("--seed", g.seed, "Seed for randomized components")->capture_default_str();

  // render
  auto* render_cmd = app.add_subcommand("render", "Optimize an image for a display");
  std::string r_in, r_out, r_preset, r_baseline;
  int r_png_depth = 8;
  render_cmd->add_option("input", r_in, "Input image (.pfm/.hdr/.png)")->required();
  render_cmd->add_option("output", r_out, "Output image (.png/.pfm)")->required();
  render_cmd->add_option("--preset", r_preset,
                         "tonemap-hdr|tonemap-ldr|uncalibrated|haze");
  render_cmd->add_option("--baseline-out", r_baseline, "Also save the rescale baseline");
  render_cmd->add_option("--png-depth", r_png_depth, "PNG bit depth (8 or 16)")->capture_default_str();

  // distance
  auto* distance_cmd = app.add_subcommand("distance", "Perceptual distance of a pair");
  std::string d_a, d_b;
  distance_cmd->add_option("a", d_a, "Reference image")->required();
  distance_cmd->add_option("b", d_b, "Test image")->required();

  // dither
  auto* dither_cmd = app.add_subcommand("dither", "Render with discrete gray levels");
  std::string di_in, di_out, di_levels, di_method = "greedy", di_window, di_baseline;
  int di_png_depth = 8;
  dither_cmd->add_option("input", di_in, "Input image")->required();
  dither_cmd->add_option("output", di_out, "Output image")->required();
  dither_cmd->add_option("--level-values", di_levels, "Explicit levels v1,v2,...");
  dither_cmd->add_option("--method", di_method, "greedy|fs")->capture_default_str();
  dither_cmd->add_option("--window", di_window,
                         "Re-evaluation window radius R, or 'exact'");
  dither_cmd->add_option("--baseline-out", di_baseline,
                         "Save the Floyd-Steinberg baseline");
  dither_cmd->add_option("--png-depth", di_png_depth, "PNG bit depth")->capture_default_str();

  // energy
  auto* energy_cmd =
      app.add_subcommand("energy", "Distortion vs mean-luminance tradeoff curve");
  std::string e_in, e_fracs = "0.2,0.4,0.6,0.8", e_out_csv;
  energy_cmd->add_option("input", e_in, "Input image")->required();
  energy_cmd->add_option("--mean-fracs", e_fracs,
                         "Target means as fractions of the display range")->capture_default_str();
  energy_cmd->add_option("--out-csv", e_out_csv, "Also write the table here");

  // detail
  auto* detail_cmd =
      app.add_subcommand("detail", "Detail enhancement by simulated scene light");
  std::string dt_in, dt_prefix, dt_smax = "1e3,1e4,1e5", dt_format = "png";
  double dt_smin = 0.01;
  int dt_png_depth = 8;
  detail_cmd->add_option("input", dt_in, "Input image")->required();
  detail_cmd->add_option("out_prefix", dt_prefix, "Output path prefix")->required();
  detail_cmd->add_option("--smax-list", dt_smax, "Assumed maximum luminances")->capture_default_str();
  detail_cmd->add_option("--detail-smin", dt_smin, "Assumed minimum luminance")->capture_default_str();
  detail_cmd->add_option("--format", dt_format, "Output format (png|pfm)")->capture_default_str();
  detail_cmd->add_option("--png-depth", dt_png_depth, "PNG bit depth")->capture_default_str();

  // iqa
  auto* iqa_cmd = app.add_subcommand("iqa", "Correlate distances with opinion scores");
  std::string q_manifest, q_noise_images, q_amplitudes = "0.01,0.05,0.2";
  iqa_cmd->add_option("manifest", q_manifest, "CSV manifest (reference,distorted,mos)");
  iqa_cmd->add_option("--noise-check", q_noise_images,
                      "Comma-separated images for the noise monotonicity check");
  iqa_cmd->add_option("--amplitudes", q_amplitudes,
                      "Noise amplitudes as fractions of dynamic range")->capture_default_str();

  // ablate
  auto* ablate_cmd =
      app.add_subcommand("ablate", "Render with transform components removed");
  std::string ab_in, ab_prefix, ab_format = "png";
  int ab_png_depth = 8;
  ablate_cmd->add_option("input", ab_in, "Input image")->required();
  ablate_cmd->add_option("out_prefix", ab_prefix, "Output path prefix")->required();
  ablate_cmd->add_option("--format", ab_format, "Output format (png|pfm)")->capture_default_str();
  ablate_cmd->add_option("--png-depth", ab_png_depth, "PNG bit depth")->capture_default_str();

  // transform-dump
  auto* dump_cmd =
      app.add_subcommand("transform-dump", "Write the normalized channels as PFM");
  std::string td_in, td_prefix;
  dump_cmd->add_option("input", td_in, "Input image")->required();
  dump_cmd->add_option("out_prefix", td_prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*render_cmd)
      return run_render(g, r_preset, r_in, r_out, r_baseline, r_png_depth);
    if (*distance_cmd) return run_distance(g, d_a, d_b);
    if (*dither_cmd)
      return run_dither(g, di_in, di_out, di_levels, di_method, di_window, di_baseline,
                        di_png_depth);
    if (*energy_cmd) return run_energy(g, e_in, e_fracs, e_out_csv);
    if (*detail_cmd)
      return run_detail(g, dt_in, dt_prefix, dt_smax, dt_smin, dt_format, dt_png_depth);
    if (*iqa_cmd) return run_iqa(g, q_manifest, q_noise_images, q_amplitudes);
    if (*ablate_cmd) return run_ablate(g, ab_in, ab_prefix, ab_format, ab_png_depth);
    if (*dump_cmd) return run_transform_dump(g, td_in, td_prefix);
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
