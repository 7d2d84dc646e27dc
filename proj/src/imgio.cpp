#include "spoofguard/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "spoofguard/error.hpp"

namespace spoofguard::imgio {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

class PgmReader {
 public:
  explicit PgmReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  // Header integer; whitespace and '#' comments are skipped first.
  unsigned long next_uint() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError("truncated or malformed PGM header");
    }
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1u << 24) throw FormatError("PGM header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("truncated PGM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(std::span<const unsigned char> bytes) {
  PgmReader reader(bytes);
  const auto cols = reader.next_uint();
  const auto rows = reader.next_uint();
  const auto maxval = reader.next_uint();
  if (maxval == 0 || maxval > 255) {
    throw FormatError("unsupported PGM maxval " + std::to_string(maxval) + " (8-bit only)");
  }
  const std::size_t start = reader.raster_start();
  const std::size_t n = rows * cols;
  if (bytes.size() < start + n) throw FormatError("truncated PGM raster");
  if (rows < 2 || cols < 2) throw FormatError("PGM must be at least 2x2");
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes[start + i];
    if (v > maxval) throw FormatError("PGM sample exceeds maxval");
    px[i] = maxval == 255 ? v : std::floor(v * 255.0 / maxval + 0.5);
  }
  return GrayImage(rows, cols, std::move(px));
}

struct PngSource {
  std::span<const unsigned char> bytes;
  std::size_t pos = 0;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes.data() + src->pos, len);
  src->pos += len;
}

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  *what = msg;
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

GrayImage decode_png(std::span<const unsigned char> bytes) {
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_cb, png_warning_cb);
  if (!png) throw FormatError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  PngSource src{bytes, 0};
  std::vector<unsigned char> raster;
  png_uint_32 width = 0, height = 0;
  int channels = 0;

  // Only PODs live across setjmp; everything else is declared above.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decode failed: " + error);
  }
  png_set_read_fn(png, &src, png_read_cb);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG bit depth " + std::to_string(depth) + " (8-bit only)");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  channels = png_get_channels(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  raster.resize(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  if (width < 2 || height < 2) throw FormatError("PNG must be at least 2x2");
  std::vector<double> px(static_cast<std::size_t>(width) * height);
  for (png_uint_32 r = 0; r < height; ++r) {
    const unsigned char* row = raster.data() + r * rowbytes;
    for (png_uint_32 c = 0; c < width; ++c) {
      const unsigned char* p = row + c * channels;
      px[r * width + c] = channels >= 3 ? luma(p[0], p[1], p[2]) : p[0];
    }
  }
  return GrayImage(height, width, std::move(px));
}

}  // namespace

int luma(int r, int g, int b) { return (299 * r + 587 * g + 114 * b + 500) / 1000; }

GrayImage decode_image(std::span<const unsigned char> bytes) {
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kPngMagic)) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw FormatError("unrecognised image format (expected binary PGM or PNG)");
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) out.push_back(static_cast<unsigned char>(quantize_pixel(v)));
  return out;
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_rows, std::size_t out_cols) {
  if (out_rows < 2 || out_cols < 2) throw ParameterError("resize target must be at least 2x2");
  const double sr = static_cast<double>(img.rows()) / out_rows;
  const double sc = static_cast<double>(img.cols()) / out_cols;
  const double max_r = static_cast<double>(img.rows() - 1);
  const double max_c = static_cast<double>(img.cols() - 1);

  Matrix out(out_rows, out_cols);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const double y = std::clamp((r + 0.5) * sr - 0.5, 0.0, max_r);
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, img.rows() - 1);
    const double fy = y - y0;
    for (std::size_t c = 0; c < out_cols; ++c) {
      const double x = std::clamp((c + 0.5) * sc - 0.5, 0.0, max_c);
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, img.cols() - 1);
      const double fx = x - x0;
      const double top = img(y0, x0) + fx * (img(y0, x1) - img(y0, x0));
      const double bot = img(y1, x0) + fx * (img(y1, x1) - img(y1, x0));
      out(r, c) = std::clamp(top + fy * (bot - top), 0.0, 255.0);
    }
  }
  return GrayImage(std::move(out));
}

}  // namespace spoofguard::imgio
