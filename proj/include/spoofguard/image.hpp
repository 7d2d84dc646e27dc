#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spoofguard {

/// Dense row-major matrix of doubles. Used for intermediate filter outputs
/// whose range is not bounded to [0, 255] (derivatives, wavelet bands).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  /// Edge-replicated access: out-of-range coordinates are clamped.
  double clamped(std::ptrdiff_t r, std::ptrdiff_t c) const {
    const auto rr = std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(rows_) - 1);
    const auto cc = std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(cols_) - 1);
    return data_[static_cast<std::size_t>(rr) * cols_ + static_cast<std::size_t>(cc)];
  }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Grayscale image: at least 2x2, every intensity finite and in [0, 255].
/// Construction validates; a GrayImage that exists is always well formed.
class GrayImage {
 public:
  GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels);
  explicit GrayImage(Matrix m);

  static GrayImage filled(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return m_.rows(); }
  std::size_t cols() const { return m_.cols(); }
  std::size_t size() const { return m_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  double clamped(std::ptrdiff_t r, std::ptrdiff_t c) const { return m_.clamped(r, c); }
  std::span<const double> pixels() const { return m_.values(); }
  const Matrix& matrix() const { return m_; }

  bool operator==(const GrayImage&) const = default;

 private:
  Matrix m_;
};

/// Row-major boolean mask sharing the shape of the image it came from.
class BinaryImage {
 public:
  BinaryImage(std::size_t rows, std::size_t cols, bool fill = false);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return bits_.size(); }

  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const BinaryImage&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> bits_;
};

void require_same_shape(const GrayImage& a, const GrayImage& b);

/// Round half-up to integers in [0, 255]; the quantization applied by PGM output.
double quantize_pixel(double v);
GrayImage quantize(const GrayImage& img);

}  // namespace spoofguard
