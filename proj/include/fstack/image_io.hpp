// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"
#include "fstack/raw.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fstack {

/// 16-bit single-channel raster as stored on disk.
struct Gray16 {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint16_t> data;  // row-major
};

/// 16-bit interleaved RGB raster as stored on disk.
struct Rgb16 {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint16_t> data;  // row-major, r g b per pixel
};

std::uint16_t quantize16(float v);

Gray16 quantize(const PlaneF& p);
PlaneF dequantize(const Gray16& g);

Rgb16 quantize(const RgbImage& im);
RgbImage dequantize(const Rgb16& im);

// 16-bit big-endian binary PGM (P5, maxval 65535).
void write_pgm16(const std::filesystem::path& path, const Gray16& img);
Gray16 read_pgm16(const std::filesystem::path& path);

// 16-bit PNG, single channel or RGB.
void write_png16(const std::filesystem::path& path, const Gray16& img);
void write_png16(const std::filesystem::path& path, const Rgb16& img);
Gray16 read_png16_gray(const std::filesystem::path& path);
Rgb16 read_png16_rgb(const std::filesystem::path& path);

// 32-bit float PFM ("PF" color / "Pf" gray, little-endian, bottom-up rows).
void write_pfm(const std::filesystem::path& path, const RgbImage& im);
RgbImage read_pfm(const std::filesystem::path& path);

/// Reads a 16-bit single-channel payload, dispatching on extension
/// (.pgm or .png).
Gray16 read_gray16(const std::filesystem::path& path);

/// Writes an RGB image; extension selects the container (.png 16-bit,
/// .pfm 32-bit float).
void save_rgb(const std::filesystem::path& path, const RgbImage& im);
RgbImage load_rgb(const std::filesystem::path& path);

RawSidecar load_sidecar(const std::filesystem::path& path);
void save_sidecar(const std::filesystem::path& path, const RawSidecar& sidecar);

}  // namespace fstack
