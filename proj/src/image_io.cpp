// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/image_io.hpp"

#include <nlohmann/json.hpp>
#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace fstack {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint16_t quantize16(float v) {
  float scaled = std::round(v * 65535.0f);
  if (scaled < 0.0f) scaled = 0.0f;
  if (scaled > 65535.0f) scaled = 65535.0f;
  return static_cast<std::uint16_t>(scaled);
}

Gray16 quantize(const PlaneF& p) {
  Gray16 g;
  g.width = p.cols();
  g.height = p.rows();
  g.data.resize(static_cast<size_t>(g.width) * g.height);
  const float* src = p.data();
  for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = quantize16(src[i]);
  return g;
}

PlaneF dequantize(const Gray16& g) {
  PlaneF p(g.height, g.width);
  float* dst = p.data();
  for (size_t i = 0; i < g.data.size(); ++i) dst[i] = g.data[i] / 65535.0f;
  return p;
}

Rgb16 quantize(const RgbImage& im) {
  Rgb16 out;
  out.width = im.cols();
  out.height = im.rows();
  out.data.resize(static_cast<size_t>(out.width) * out.height * 3);
  for (Index y = 0; y < out.height; ++y)
    for (Index x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.data[(y * out.width + x) * 3 + c] = quantize16(im.ch[c](y, x));
  return out;
}

RgbImage dequantize(const Rgb16& im) {
  RgbImage out(im.height, im.width);
  for (Index y = 0; y < im.height; ++y)
    for (Index x = 0; x < im.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.ch[c](y, x) = im.data[(y * im.width + x) * 3 + c] / 65535.0f;
  return out;
}

void write_pgm16(const fs::path& path, const Gray16& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> row(static_cast<size_t>(img.width) * 2);
  for (Index y = 0; y < img.height; ++y) {
    const std::uint16_t* src = img.data.data() + y * img.width;
    for (Index x = 0; x < img.width; ++x) {
      row[2 * x] = static_cast<unsigned char>(src[x] >> 8);
      row[2 * x + 1] = static_cast<unsigned char>(src[x] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw DataError("short write: " + path.string());
}

namespace {

void skip_pnm_space(std::istream& in) {
  int c = in.peek();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      in.get();
    }
    c = in.peek();
  }
}

}  // namespace

Gray16 read_pgm16(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw DataError("not a binary PGM: " + path.string());
  long w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  in.get();  // single whitespace before payload
  if (!in || w <= 0 || h <= 0) throw DataError("bad PGM header: " + path.string());
  if (maxval != 65535) throw DataError("expected 16-bit PGM (maxval 65535): " + path.string());
  Gray16 img;
  img.width = w;
  img.height = h;
  img.data.resize(static_cast<size_t>(w) * h);
  std::vector<unsigned char> raw(img.data.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (static_cast<size_t>(in.gcount()) != raw.size())
    throw DataError("truncated PGM payload: " + path.string());
  for (size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return img;
}

namespace {

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png16_impl(const fs::path& path, Index width, Index height, int channels,
                      const std::uint16_t* data) {
  PngWriter w;
  w.fp = std::fopen(path.c_str(), "wb");
  if (!w.fp) throw DataError("cannot open for writing: " + path.string());
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw DataError("png_create_write_struct failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw DataError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(w.png))) throw DataError("libpng write error: " + path.string());
  png_init_io(w.png, w.fp);
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 16, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  // PNG stores 16-bit samples big-endian.
  std::vector<unsigned char> row(static_cast<size_t>(width) * channels * 2);
  for (Index y = 0; y < height; ++y) {
    const std::uint16_t* src = data + y * width * channels;
    for (Index i = 0; i < width * channels; ++i) {
      row[2 * i] = static_cast<unsigned char>(src[i] >> 8);
      row[2 * i + 1] = static_cast<unsigned char>(src[i] & 0xff);
    }
    png_write_row(w.png, row.data());
  }
  png_write_end(w.png, nullptr);
}

void read_png16_impl(const fs::path& path, int want_channels, Index* width, Index* height,
                     std::vector<std::uint16_t>* data) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw DataError("missing file: " + path.string());
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) throw DataError("libpng read error: " + path.string());
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  png_uint_32 w = png_get_image_width(r.png, r.info);
  png_uint_32 h = png_get_image_height(r.png, r.info);
  int depth = png_get_bit_depth(r.png, r.info);
  int color = png_get_color_type(r.png, r.info);
  if (depth < 16) png_set_expand_16(r.png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (want_channels == 3 && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA))
    png_set_gray_to_rgb(r.png);
  if (want_channels == 1 && (color & PNG_COLOR_MASK_COLOR))
    throw DataError("expected single-channel PNG: " + path.string());
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);
  if (png_get_channels(r.png, r.info) != static_cast<png_byte>(want_channels))
    throw DataError("unexpected channel count in PNG: " + path.string());
  *width = w;
  *height = h;
  data->resize(static_cast<size_t>(w) * h * want_channels);
  std::vector<unsigned char> row(static_cast<size_t>(w) * want_channels * 2);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    std::uint16_t* dst = data->data() + static_cast<size_t>(y) * w * want_channels;
    for (size_t i = 0; i < static_cast<size_t>(w) * want_channels; ++i)
      dst[i] = static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
  }
  png_read_end(r.png, nullptr);
}

}  // namespace

void write_png16(const fs::path& path, const Gray16& img) {
  write_png16_impl(path, img.width, img.height, 1, img.data.data());
}

void write_png16(const fs::path& path, const Rgb16& img) {
  write_png16_impl(path, img.width, img.height, 3, img.data.data());
}

Gray16 read_png16_gray(const fs::path& path) {
  Gray16 img;
  read_png16_impl(path, 1, &img.width, &img.height, &img.data);
  return img;
}

Rgb16 read_png16_rgb(const fs::path& path) {
  Rgb16 img;
  read_png16_impl(path, 3, &img.width, &img.height, &img.data);
  return img;
}

void write_pfm(const fs::path& path, const RgbImage& im) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "PF\n" << im.cols() << " " << im.rows() << "\n-1.0\n";
  // PFM rows run bottom to top.
  std::vector<float> row(static_cast<size_t>(im.cols()) * 3);
  for (Index y = im.rows() - 1; y >= 0; --y) {
    for (Index x = 0; x < im.cols(); ++x)
      for (int c = 0; c < 3; ++c) row[3 * x + c] = im.ch[c](y, x);
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  if (!out) throw DataError("short write: " + path.string());
}

RgbImage read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "PF") throw DataError("expected color PFM: " + path.string());
  long w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  in.get();
  if (!in || w <= 0 || h <= 0) throw DataError("bad PFM header: " + path.string());
  if (scale >= 0.0) throw DataError("big-endian PFM unsupported: " + path.string());
  RgbImage im(h, w);
  std::vector<float> row(static_cast<size_t>(w) * 3);
  for (Index y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (static_cast<size_t>(in.gcount()) != row.size() * sizeof(float))
      throw DataError("truncated PFM payload: " + path.string());
    for (Index x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) im.ch[c](y, x) = row[3 * x + c];
  }
  return im;
}

Gray16 read_gray16(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return read_pgm16(path);
  if (ext == ".png") return read_png16_gray(path);
  throw DataError("unsupported raw payload extension: " + path.string());
}

void save_rgb(const fs::path& path, const RgbImage& im) {
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    write_png16(path, quantize(im));
  } else if (ext == ".pfm") {
    write_pfm(path, im);
  } else {
    throw DataError("unsupported output extension: " + path.string());
  }
}

RgbImage load_rgb(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return dequantize(read_png16_rgb(path));
  if (ext == ".pfm") return read_pfm(path);
  throw DataError("unsupported image extension: " + path.string());
}

RawSidecar load_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing sidecar: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad sidecar JSON " + path.string() + ": " + e.what());
  }
  RawSidecar s;
  try {
    s.width = j.at("width").get<Index>();
    s.height = j.at("height").get<Index>();
    s.pattern = parse_pattern(j.at("pattern").get<std::string>());
    s.black_level = j.at("black_level").get<int>();
    s.white_level = j.at("white_level").get<int>();
    s.frame_index = j.value("frame_index", 0);
    s.iso = j.value("iso", 0);
    s.lens = j.value("lens", std::string());
  } catch (const json::exception& e) {
    throw DataError("bad sidecar fields " + path.string() + ": " + e.what());
  }
  return s;
}

void save_sidecar(const fs::path& path, const RawSidecar& s) {
  json j{{"width", s.width},
         {"height", s.height},
         {"pattern", pattern_name(s.pattern)},
         {"black_level", s.black_level},
         {"white_level", s.white_level},
         {"frame_index", s.frame_index},
         {"iso", s.iso},
         {"lens", s.lens}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace fstack
