#include "spoofguard/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spoofguard/error.hpp"

namespace spoofguard {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

namespace {

void validate_gray(const Matrix& m) {
  if (m.rows() < 2 || m.cols() < 2) {
    throw ParameterError("image must be at least 2x2, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  for (double v : m.values()) {
    if (!std::isfinite(v) || v < 0.0 || v > 255.0) {
      throw ParameterError("pixel intensity outside [0, 255]: " + std::to_string(v));
    }
  }
}

}  // namespace

GrayImage::GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels)
    : m_(rows, cols, std::move(pixels)) {
  validate_gray(m_);
}

GrayImage::GrayImage(Matrix m) : m_(std::move(m)) { validate_gray(m_); }

GrayImage GrayImage::filled(std::size_t rows, std::size_t cols, double value) {
  return GrayImage(Matrix(rows, cols, value));
}

BinaryImage::BinaryImage(std::size_t rows, std::size_t cols, bool fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void require_same_shape(const GrayImage& a, const GrayImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("image shapes differ: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

double quantize_pixel(double v) { return std::clamp(std::floor(v + 0.5), 0.0, 255.0); }

GrayImage quantize(const GrayImage& img) {
  Matrix out(img.rows(), img.cols());
  auto src = img.pixels();
  auto dst = out.values();
  std::transform(src.begin(), src.end(), dst.begin(), quantize_pixel);
  return GrayImage(std::move(out));
}

}  // namespace spoofguard
