// License: Apache 2.0. See LICENSE file in root directory.
//
// Command-line surface for the focus-stacking pipeline: ingest raw bursts,
// register, fuse, synthesize noise, build crop datasets, and score results.

#include "fstack/dataset.hpp"
#include "fstack/fuse.hpp"
#include "fstack/image_io.hpp"
#include "fstack/metrics.hpp"
#include "fstack/noise.hpp"
#include "fstack/parallel.hpp"
#include "fstack/raw.hpp"
#include "fstack/registration.hpp"
#include "fstack/synth.hpp"
#include "fstack/warp.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fstack;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

bool g_error_reported = false;

// Emits the machine-readable error record once, at the innermost stage.
void report_stage_error(const std::string& stage, const std::string& item,
                        const std::string& message) {
  if (g_error_reported) return;
  g_error_reported = true;
  json record;
  record["error"] = {{"stage", stage}, {"item", item}, {"message", message}};
  std::cerr << record.dump() << "\n";
}

template <typename Fn>
void stage(const std::string& name, const std::string& item, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    report_stage_error(name, item, e.what());
    throw;
  } catch (const std::exception& e) {
    report_stage_error(name, item, e.what());
    throw;
  }
}

// ---------------------------------------------------------------------------
// burst containers on disk

struct RawBurst {
  std::vector<BayerFrame> frames;          // sorted by filename
  std::vector<fs::path> payloads;          // matching source files
};

// A .json is a frame sidecar only when a payload shares its stem; stage
// manifests (ingest.json, noise.json) live in the same directories and
// must not be mistaken for frames.
fs::path sidecar_payload(const fs::path& sc) {
  fs::path payload = sc;
  payload.replace_extension(".pgm");
  if (fs::exists(payload)) return payload;
  payload.replace_extension(".png");
  if (fs::exists(payload)) return payload;
  return {};
}

bool has_sidecars(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json" &&
        !sidecar_payload(entry.path()).empty())
      return true;
  return false;
}

RawBurst load_raw_burst(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> sidecars;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json" &&
        !sidecar_payload(entry.path()).empty())
      sidecars.push_back(entry.path());
  std::sort(sidecars.begin(), sidecars.end());
  if (sidecars.empty()) throw DataError("no sidecars in " + dir.string());

  RawBurst burst;
  for (const auto& sc : sidecars) {
    const fs::path payload = sidecar_payload(sc);
    burst.frames.push_back(ingest_frame(payload, load_sidecar(sc)));
    burst.payloads.push_back(payload);
  }
  return burst;
}

Burst demosaic_burst(const RawBurst& raw, int threads) {
  Burst burst;
  burst.frames.resize(raw.frames.size());
  parallel_for(
      static_cast<Index>(raw.frames.size()),
      [&](Index i) { burst.frames[i] = demosaic(raw.frames[i]); }, threads);
  if (!raw.frames.empty()) {
    burst.lens = raw.frames[0].lens;
    burst.iso = raw.frames[0].iso;
  }
  for (const auto& f : raw.frames) burst.frame_indices.push_back(f.frame_index);
  return burst;
}

Burst load_rgb_burst(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (ext == ".png" || ext == ".pfm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no frames in " + dir.string());
  Burst burst;
  for (size_t i = 0; i < files.size(); ++i) {
    burst.frames.push_back(load_rgb(files[i]));
    burst.frame_indices.push_back(static_cast<int>(i));
  }
  return burst;
}

// Raw directories (sidecars present) are demosaiced on the fly.
Burst load_burst(const fs::path& dir, int threads) {
  if (fs::is_directory(dir) && has_sidecars(dir))
    return demosaic_burst(load_raw_burst(dir), threads);
  return load_rgb_burst(dir);
}

std::vector<PlaneF> burst_lumas(const Burst& burst) {
  std::vector<PlaneF> lumas;
  lumas.reserve(burst.frames.size());
  for (const auto& f : burst.frames) lumas.push_back(luma(f));
  return lumas;
}

void check_strict(const RegistrationResult& reg, bool strict) {
  if (!strict) return;
  for (size_t i = 0; i < reg.rhos.size(); ++i)
    if (std::isnan(reg.rhos[i]))
      throw DivergenceError("pair " + std::to_string(i) + " diverged");
}

Burst align_burst(const Burst& burst, const RegistrationResult& reg, int threads) {
  require(reg.cumulative.size() == burst.frames.size(),
          "warp count does not match burst length");
  Burst out = burst;
  parallel_for(
      static_cast<Index>(burst.frames.size()),
      [&](Index i) { out.frames[i] = warp_image(burst.frames[i], reg.cumulative[i]); },
      threads);
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string frame_name(int index, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d%s", index, suffix);
  return buf;
}

// ---------------------------------------------------------------------------
// subcommand options

struct EccOpts {
  EccConfig cfg;
  bool strict = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pyramid-levels", cfg.pyramid_levels, "ECC pyramid depth")
        ->capture_default_str();
    cmd->add_option("--max-iterations", cfg.max_iterations, "ECC iterations per level")
        ->capture_default_str();
    cmd->add_option("--epsilon", cfg.epsilon, "ECC update-norm stop threshold")
        ->capture_default_str();
    cmd->add_option("--pre-blur-sigma", cfg.pre_blur_sigma,
                    "Gaussian blur before alignment")
        ->capture_default_str();
    cmd->add_flag("--strict", strict, "fail (exit 4) if any pair diverges");
  }
};

struct FuseOpts {
  FusionConfig cfg;
  std::string method = "laplacian";

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method,
                    "pixel_contrast | pixel_variance | laplacian | wavelet")
        ->capture_default_str();
    cmd->add_option("--fusion-pyramid-levels", cfg.pyramid_levels,
                    "Laplacian fusion depth")
        ->capture_default_str();
    cmd->add_option("--variance-radius", cfg.variance_radius,
                    "window radius for the variance measure")
        ->capture_default_str();
    cmd->add_option("--smooth-radius", cfg.decision_smooth_radius,
                    "decision majority-filter radius")
        ->capture_default_str();
    cmd->add_option("--wavelet-levels", cfg.wavelet_levels, "wavelet fusion depth")
        ->capture_default_str();
  }

  FusionConfig resolved() const {
    FusionConfig out = cfg;
    out.method = parse_fusion_method(method);
    return out;
  }
};

struct NoiseOpts {
  std::string mode = "off";  // off | fixed | sample
  double lambda_shot = 0.0;
  double lambda_read = 0.0;

  void attach(CLI::App* cmd, bool with_mode) {
    if (with_mode)
      cmd->add_option("--noise", mode, "off | fixed | sample")->capture_default_str();
    cmd->add_option("--lambda-shot", lambda_shot, "shot-noise variance per intensity");
    cmd->add_option("--lambda-read", lambda_read, "read-noise variance");
  }

  NoiseParams resolve(uint64_t seed) const {
    if (mode == "sample") {
      Rng rng = make_rng(seed, 0);
      return sample_noise_params(rng);
    }
    if (mode == "fixed") {
      if (lambda_shot < 0 || lambda_read < 0)
        throw ConfigError("noise variances must be nonnegative");
      return {lambda_shot, lambda_read};
    }
    throw ConfigError("unknown noise mode: " + mode);
  }
};

// ---------------------------------------------------------------------------
// stages shared between the subcommands and `pipeline`

json run_ingest(const RawBurst& raw, const Burst& rgb, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["frames"] = json::array();
  for (size_t i = 0; i < rgb.frames.size(); ++i) {
    const std::string name = frame_name(raw.frames[i].frame_index, ".png");
    save_rgb(out_dir / name, rgb.frames[i]);
    manifest["frames"].push_back({{"index", raw.frames[i].frame_index},
                                  {"src", raw.payloads[i].filename().string()},
                                  {"out", name},
                                  {"pattern", pattern_name(raw.frames[i].pattern)},
                                  {"sha256", sha256_file(out_dir / name)}});
  }
  return manifest;
}

// Injects noise into the normalized mosaics; returns noised mosaics and
// writes the noised raw container plus its manifest.
json run_noise(RawBurst& raw, const NoiseParams& params, uint64_t seed,
               const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["seed"] = seed;
  manifest["lambda_shot"] = params.lambda_shot;
  manifest["lambda_read"] = params.lambda_read;
  manifest["frames"] = json::array();
  for (size_t i = 0; i < raw.frames.size(); ++i) {
    BayerFrame& frame = raw.frames[i];
    const uint64_t stream = 1 + static_cast<uint64_t>(frame.frame_index);
    Rng rng = make_rng(seed, stream);
    PlaneF noisy = add_noise(normalize_mosaic(frame), params, rng);
    frame = denormalize_mosaic(noisy, frame);

    const std::string name = frame_name(frame.frame_index, ".pgm");
    Gray16 payload;
    payload.width = frame.width;
    payload.height = frame.height;
    payload.data = frame.samples;
    write_pgm16(out_dir / name, payload);
    RawSidecar sc{frame.width,       frame.height, frame.pattern,
                  frame.black_level, frame.white_level,
                  frame.frame_index, frame.iso,    frame.lens};
    fs::path scpath = out_dir / frame_name(frame.frame_index, ".json");
    save_sidecar(scpath, sc);
    manifest["frames"].push_back(
        {{"index", frame.frame_index}, {"out", name}, {"stream", stream}});
  }
  return manifest;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"focus-stacking pipeline toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file (flags win)");
  app.config_formatter(std::make_shared<CLI::ConfigTOML>());

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = FSTACK_THREADS or hardware)");
  uint64_t seed = 0;
  app.add_option("--seed", seed, "root seed for every random choice");

  // ---- ingest ----
  auto* c_ingest = app.add_subcommand("ingest", "demosaic a raw burst to RGB PNGs");
  fs::path in_dir, out_path, gt_path;
  c_ingest->add_option("--burst-dir", in_dir, "raw burst directory")->required();
  c_ingest->add_option("--out", out_path, "output directory")->required();
  c_ingest->callback([&] {
    stage("ingest", in_dir.string(), [&] {
      RawBurst raw = load_raw_burst(in_dir);
      Burst rgb = demosaic_burst(raw, threads);
      json manifest = run_ingest(raw, rgb, out_path);
      write_json(out_path / "ingest.json", manifest);
      std::cout << "ingested " << rgb.frames.size() << " frames to " << out_path
                << "\n";
    });
  });

  // ---- register ----
  auto* c_register = app.add_subcommand("register", "align a burst, save warps.json");
  EccOpts ecc_reg;
  c_register->add_option("--burst-dir", in_dir, "burst directory (raw or RGB)")
      ->required();
  c_register->add_option("--out", out_path, "output warp file")->required();
  ecc_reg.attach(c_register);
  c_register->callback([&] {
    stage("register", in_dir.string(), [&] {
      Burst burst = load_burst(in_dir, threads);
      RegistrationResult reg = register_burst(burst_lumas(burst), ecc_reg.cfg, threads);
      check_strict(reg, ecc_reg.strict);
      save_warps(out_path, reg);
      std::cout << "registered " << burst.frames.size() << " frames\n";
    });
  });

  // ---- stack ----
  auto* c_stack = app.add_subcommand("stack", "register and fuse a burst");
  EccOpts ecc_stack;
  FuseOpts fuse_stack;
  fs::path warps_in, warps_out;
  bool no_register = false;
  c_stack->add_option("--burst-dir", in_dir, "burst directory (raw or RGB)")
      ->required();
  c_stack->add_option("--out", out_path, "fused image (.png or .pfm)")->required();
  c_stack->add_option("--warps", warps_in, "reuse an existing warp file");
  c_stack->add_option("--warps-out", warps_out,
                      "warp file to write (default: alongside --out)");
  c_stack->add_flag("--no-register", no_register, "treat the burst as aligned");
  ecc_stack.attach(c_stack);
  fuse_stack.attach(c_stack);
  c_stack->callback([&] {
    stage("stack", in_dir.string(), [&] {
      Burst burst = load_burst(in_dir, threads);
      RegistrationResult reg;
      if (!warps_in.empty()) {
        reg = load_warps(warps_in);
      } else if (no_register) {
        reg.pairwise.assign(burst.frames.size(), AffineWarp{});
        reg.cumulative.assign(burst.frames.size(), AffineWarp{});
        reg.rhos.assign(burst.frames.size(), 1.0);
      } else {
        reg = register_burst(burst_lumas(burst), ecc_stack.cfg, threads);
        check_strict(reg, ecc_stack.strict);
      }
      if (warps_out.empty())
        warps_out = out_path.parent_path().empty()
                        ? fs::path("warps.json")
                        : out_path.parent_path() / "warps.json";
      save_warps(warps_out, reg);
      Burst aligned = align_burst(burst, reg, threads);
      RgbImage fused = fuse(aligned, fuse_stack.resolved());
      save_rgb(out_path, fused);
      std::cout << "fused " << burst.frames.size() << " frames ("
                << fuse_stack.method << ") -> " << out_path << "\n";
    });
  });

  // ---- noise ----
  auto* c_noise = app.add_subcommand("noise", "inject shot/read noise into a raw burst");
  NoiseOpts noise_noise;
  bool sample_flag = false;
  c_noise->add_option("--burst-dir", in_dir, "raw burst directory")->required();
  c_noise->add_option("--out", out_path, "output directory")->required();
  noise_noise.attach(c_noise, false);
  c_noise->add_flag("--sample", sample_flag, "sample parameters from the prior");
  c_noise->callback([&] {
    stage("noise", in_dir.string(), [&] {
      const bool fixed_given =
          c_noise->count("--lambda-shot") || c_noise->count("--lambda-read");
      if (sample_flag && fixed_given)
        throw ConfigError("--sample conflicts with explicit --lambda-*");
      if (!sample_flag && !fixed_given)
        throw ConfigError("need --sample or --lambda-shot/--lambda-read");
      noise_noise.mode = sample_flag ? "sample" : "fixed";
      NoiseParams params = noise_noise.resolve(seed);
      RawBurst raw = load_raw_burst(in_dir);
      json manifest = run_noise(raw, params, seed, out_path);
      write_json(out_path / "noise.json", manifest);
      std::cout << "noised " << raw.frames.size() << " frames (lambda_shot="
                << params.lambda_shot << ", lambda_read=" << params.lambda_read
                << ")\n";
    });
  });

  // ---- crops ----
  auto* c_crops = app.add_subcommand("crops", "cut a registered burst into crops");
  Index crop_size = 128;
  bool raw_crops = false;
  std::string burst_id, lens_tag;
  c_crops->add_option("--burst-dir", in_dir, "burst directory")->required();
  c_crops->add_option("--gt", gt_path, "ground-truth image")->required();
  c_crops->add_option("--size", crop_size, "crop size in pixels")
      ->capture_default_str();
  c_crops->add_option("--out", out_path, "output dataset directory")->required();
  c_crops->add_flag("--raw", raw_crops, "store packed raw planes instead of RGB");
  c_crops->add_option("--warps", warps_in, "warp file to apply before cropping");
  c_crops->add_option("--id", burst_id, "burst id (default: directory name)");
  c_crops->add_option("--lens", lens_tag, "lens tag override");
  c_crops->callback([&] {
    stage("crops", in_dir.string(), [&] {
      fs::create_directories(out_path);
      if (burst_id.empty()) burst_id = fs::absolute(in_dir).filename().string();
      RgbImage gt = load_rgb(gt_path);
      std::vector<CropRect> rects = grid_crops(gt.cols(), gt.rows(), crop_size);
      if (rects.empty())
        std::cerr << "warning: crop size " << crop_size
                  << " exceeds image, writing empty manifest\n";

      RegistrationResult reg;
      const bool have_warps = !warps_in.empty();
      if (have_warps) reg = load_warps(warps_in);

      BurstManifest bm;
      if (raw_crops) {
        RawBurst raw = load_raw_burst(in_dir);
        if (lens_tag.empty()) lens_tag = raw.frames[0].lens;
        std::vector<PlanarRaw> planar(raw.frames.size());
        for (size_t i = 0; i < raw.frames.size(); ++i) {
          planar[i] = pack_planes(raw.frames[i]);
          if (have_warps) {
            const AffineWarp half = scale_warp(reg.cumulative[i], 0.5);
            for (int p = 0; p < 4; ++p)
              planar[i].planes[p] = warp_image(planar[i].planes[p], half);
          }
        }
        bm = build_crop_dataset_raw(planar, gt, rects, out_path, burst_id);
      } else {
        Burst burst = load_burst(in_dir, threads);
        if (lens_tag.empty()) lens_tag = burst.lens;
        if (have_warps) burst = align_burst(burst, reg, threads);
        bm = build_crop_dataset(burst, gt, rects, out_path, burst_id);
      }
      bm.lens = lens_tag;

      // accumulate bursts sharing the dataset directory (rerunning a burst
      // replaces its entry), so a later `split` sees the whole dataset
      CropManifest manifest;
      const fs::path manifest_path = out_path / "manifest.json";
      if (fs::exists(manifest_path)) {
        manifest = load_manifest(manifest_path);
        require(manifest.crop_size == crop_size,
                "crop size differs from the existing manifest");
        std::erase_if(manifest.bursts,
                      [&](const BurstManifest& b) { return b.id == burst_id; });
      }
      manifest.seed = seed;
      manifest.crop_size = crop_size;
      manifest.bursts.push_back(std::move(bm));
      save_manifest(manifest_path, manifest);
      std::cout << "wrote " << rects.size() << " crops for burst " << burst_id
                << "\n";
    });
  });

  // ---- split ----
  auto* c_split = app.add_subcommand("split", "assign train/test splits in a manifest");
  std::vector<std::string> count_specs;
  fs::path split_out;
  c_split->add_option("--manifest", in_dir, "manifest.json to update")->required();
  c_split
      ->add_option("--count", count_specs,
                   "per-lens counts as lens=train/test (repeatable)")
      ->required();
  c_split->add_option("--out", split_out, "output path (default: in place)");
  c_split->callback([&] {
    stage("split", in_dir.string(), [&] {
      CropManifest manifest = load_manifest(in_dir);
      std::map<std::string, SplitCounts> counts;
      for (const auto& spec : count_specs) {
        const auto eq = spec.find('=');
        const auto slash = spec.find('/', eq);
        if (eq == std::string::npos || slash == std::string::npos)
          throw ConfigError("bad --count, expected lens=train/test: " + spec);
        SplitCounts c;
        c.train = std::stoi(spec.substr(eq + 1, slash - eq - 1));
        c.test = std::stoi(spec.substr(slash + 1));
        counts[spec.substr(0, eq)] = c;
      }
      std::vector<std::pair<std::string, std::string>> ids;
      for (const auto& b : manifest.bursts) ids.emplace_back(b.id, b.lens);
      const auto assignment = split_manifest(ids, counts, seed);
      int train = 0, test = 0;
      for (auto& b : manifest.bursts) {
        auto it = assignment.find(b.id);
        if (it == assignment.end()) continue;
        b.split = it->second;
        (it->second == "train" ? train : test)++;
      }
      manifest.seed = seed;
      save_manifest(split_out.empty() ? in_dir : split_out, manifest);
      std::cout << "split: " << train << " train, " << test << " test\n";
    });
  });

  // ---- eval ----
  auto* c_eval = app.add_subcommand("eval", "score predictions against ground truth");
  fs::path pred_path, report_path = "report.json";
  int ignore_border = 4;
  c_eval->add_option("--pred", pred_path, "prediction image or directory")->required();
  c_eval->add_option("--gt", gt_path, "ground-truth image or directory")->required();
  c_eval->add_option("--out", report_path, "report path")->capture_default_str();
  c_eval->add_option("--ignore-border", ignore_border, "pixels to drop on each side")
      ->capture_default_str();
  c_eval->callback([&] {
    stage("eval", pred_path.string(), [&] {
      std::vector<std::pair<std::string, RgbImage>> preds, gts;
      if (fs::is_directory(pred_path)) {
        for (const auto& entry : fs::directory_iterator(pred_path)) {
          const auto ext = entry.path().extension();
          if (ext != ".png" && ext != ".pfm") continue;
          const fs::path other = gt_path / entry.path().filename();
          if (!fs::exists(other)) continue;
          preds.emplace_back(entry.path().stem().string(), load_rgb(entry.path()));
          gts.emplace_back(entry.path().stem().string(), load_rgb(other));
        }
      } else {
        preds.emplace_back(pred_path.stem().string(), load_rgb(pred_path));
        gts.emplace_back(pred_path.stem().string(), load_rgb(gt_path));
      }
      QualityReport report = evaluate(preds, gts, ignore_border);
      save_report(report_path, report);
      std::cout << "mean_psnr=" << report.mean_psnr
                << " mean_ssim=" << report.mean_ssim << " over "
                << report.items.size() << " item(s)\n";
    });
  });

  // ---- pipeline ----
  auto* c_pipe = app.add_subcommand("pipeline", "run every stage over one burst");
  EccOpts ecc_pipe;
  FuseOpts fuse_pipe;
  NoiseOpts noise_pipe;
  fs::path pipe_out;
  Index pipe_crop = 128;
  c_pipe->add_option("--burst-dir", in_dir, "raw burst directory")->required();
  c_pipe->add_option("--out-dir", pipe_out, "output directory")->required();
  c_pipe->add_option("--gt", gt_path, "ground truth (enables crops + eval)");
  c_pipe->add_option("--crop-size", pipe_crop, "crop size")->capture_default_str();
  ecc_pipe.attach(c_pipe);
  fuse_pipe.attach(c_pipe);
  noise_pipe.attach(c_pipe, true);
  c_pipe->callback([&] {
    fs::create_directories(pipe_out);
    json pipeline;
    pipeline["seed"] = seed;
    pipeline["burst_dir"] = in_dir.string();
    pipeline["method"] = fuse_pipe.method;
    pipeline["stages"] = json::array();

    RawBurst raw;
    Burst rgb;
    stage("ingest", in_dir.string(), [&] {
      raw = load_raw_burst(in_dir);
      rgb = demosaic_burst(raw, threads);
      write_json(pipe_out / "ingest.json", run_ingest(raw, rgb, pipe_out / "frames_rgb"));
      pipeline["stages"].push_back("ingest");
    });

    RegistrationResult reg;
    stage("register", in_dir.string(), [&] {
      reg = register_burst(burst_lumas(rgb), ecc_pipe.cfg, threads);
      check_strict(reg, ecc_pipe.strict);
      save_warps(pipe_out / "warps.json", reg);
      pipeline["stages"].push_back("register");
    });

    if (noise_pipe.mode != "off") {
      stage("noise", in_dir.string(), [&] {
        NoiseParams params = noise_pipe.resolve(seed);
        write_json(pipe_out / "noise.json",
                   run_noise(raw, params, seed, pipe_out / "frames_noised"));
        rgb = demosaic_burst(raw, threads);
        pipeline["stages"].push_back("noise");
      });
    }

    Burst aligned;
    fs::path fused_path;
    stage("fuse", in_dir.string(), [&] {
      aligned = align_burst(rgb, reg, threads);
      RgbImage fused = fuse(aligned, fuse_pipe.resolved());
      fused_path = pipe_out / ("fused_" + fuse_pipe.method + ".png");
      save_rgb(fused_path, fused);
      write_json(pipe_out / "fuse.json",
                 {{"method", fuse_pipe.method},
                  {"output", fused_path.filename().string()},
                  {"sha256", sha256_file(fused_path)}});
      pipeline["stages"].push_back("fuse");
    });

    if (!gt_path.empty()) {
      RgbImage gt;
      stage("crops", gt_path.string(), [&] {
        gt = load_rgb(gt_path);
        std::vector<CropRect> rects = grid_crops(gt.cols(), gt.rows(), pipe_crop);
        CropManifest manifest;
        manifest.seed = seed;
        manifest.crop_size = pipe_crop;
        manifest.bursts.push_back(build_crop_dataset(
            aligned, gt, rects, pipe_out / "crops",
            fs::absolute(in_dir).filename().string()));
        manifest.bursts[0].lens = rgb.lens;
        save_manifest(pipe_out / "crops" / "manifest.json", manifest);
        pipeline["stages"].push_back("crops");
      });
      stage("eval", fused_path.string(), [&] {
        QualityReport report =
            evaluate({{fuse_pipe.method, load_rgb(fused_path)}},
                     {{fuse_pipe.method, gt}}, 4);
        save_report(pipe_out / "report.json", report);
        pipeline["stages"].push_back("eval");
        std::cout << "psnr=" << report.mean_psnr << " ssim=" << report.mean_ssim
                  << "\n";
      });
    }

    stage("pipeline", pipe_out.string(),
          [&] { write_json(pipe_out / "pipeline.json", pipeline); });
    std::cout << "pipeline done: " << pipe_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success))
      return app.exit(e);  // --help and friends
    report_stage_error("cli", "", e.what());
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    report_stage_error("config", "", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    report_stage_error("divergence", "", e.what());
    return kExitDivergence;
  } catch (const DataError& e) {
    report_stage_error("data", "", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    report_stage_error("internal", "", e.what());
    return kExitData;
  }
}
