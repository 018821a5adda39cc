// License: Apache 2.0. See LICENSE file in root directory.
//
// Regenerates the miniature focus bracket committed under fixtures/.
// Fully deterministic: the same seed reproduces the shipped files bit for bit.

#include "fstack/image_io.hpp"
#include "fstack/raw.hpp"
#include "fstack/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace fstack;

int main(int argc, char** argv) {
  CLI::App app{"generate the synthetic mini focus bracket"};
  fs::path out_dir;
  int n_frames = 8;
  Index size = 512;
  uint64_t seed = 7;
  double max_sigma = 6.0;
  app.add_option("--out", out_dir, "fixture directory")->required();
  app.add_option("--frames", n_frames)->capture_default_str();
  app.add_option("--size", size)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--max-sigma", max_sigma)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir / "frames");

    RgbImage sharp = render_texture_rgb(size, size, seed);
    PlaneF depth = render_depth(size, size, seed);
    // Stretch the depth field to full range so the focus ladder sweeps the
    // whole scene; otherwise the middle frame is close to all-in-focus and
    // the bracket carries no information.
    const float lo = depth.minCoeff(), hi = depth.maxCoeff();
    if (hi > lo) depth = (depth.array() - lo) / (hi - lo);
    Burst burst = synth_depth_blur_burst(sharp, depth, n_frames, max_sigma);

    BayerFrame like;
    like.width = size;
    like.height = size;
    like.pattern = BayerPattern::RGGB;
    like.black_level = 256;
    like.white_level = 4095;
    like.iso = 100;
    like.lens = "synth-50mm";

    for (int i = 0; i < n_frames; ++i) {
      like.frame_index = i;
      BayerFrame frame =
          denormalize_mosaic(mosaic_from_rgb(burst.frames[i], like.pattern), like);
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d", i);
      Gray16 payload{frame.width, frame.height, frame.samples};
      write_png16(out_dir / "frames" / (std::string(name) + ".png"), payload);
      RawSidecar sc{frame.width,       frame.height, frame.pattern,
                    frame.black_level, frame.white_level,
                    frame.frame_index, frame.iso,    frame.lens};
      save_sidecar(out_dir / "frames" / (std::string(name) + ".json"), sc);
    }
    save_rgb(out_dir / "gt.png", sharp);
    std::cout << "wrote " << n_frames << " frames + gt to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
