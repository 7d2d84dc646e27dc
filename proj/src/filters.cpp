#include "spoofguard/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "spoofguard/error.hpp"

namespace spoofguard::filters {

namespace {

using Index = std::ptrdiff_t;

std::vector<double> gaussian_taps(double sigma, std::size_t radius) {
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable smoothing with a normalized symmetric kernel. Each output is
// written as x_c + sum w_k (x_k - x_c) so a constant neighborhood returns
// its value bit for bit.
Matrix smooth_separable(const Matrix& src, const std::vector<double>& taps) {
  const auto radius = static_cast<Index>(taps.size() / 2);
  const auto rows = static_cast<Index>(src.rows());
  const auto cols = static_cast<Index>(src.cols());

  Matrix tmp(src.rows(), src.cols());
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double center = src(r, c);
      double acc = 0.0;
      if (c >= radius && c + radius < cols) {
        const double* row = src.values().data() + r * cols + (c - radius);
        for (Index k = 0; k <= 2 * radius; ++k) acc += taps[k] * (row[k] - center);
      } else {
        for (Index k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] * (src.clamped(r, c + k) - center);
        }
      }
      tmp(r, c) = center + acc;
    }
  }
  Matrix out(src.rows(), src.cols());
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double center = tmp(r, c);
      double acc = 0.0;
      if (r >= radius && r + radius < rows) {
        for (Index k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] * (tmp(static_cast<std::size_t>(r + k), static_cast<std::size_t>(c)) - center);
        }
      } else {
        for (Index k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] * (tmp.clamped(r + k, c) - center);
        }
      }
      out(r, c) = center + acc;
    }
  }
  return out;
}

GrayImage to_gray(Matrix m) {
  for (double& v : m.values()) v = std::clamp(v, 0.0, 255.0);
  return GrayImage(std::move(m));
}

using Patch = std::array<double, 9>;

// Row-major 3x3 neighborhood with edge replication.
template <typename Src>
Patch patch3(const Src& src, Index r, Index c) {
  Patch p;
  const auto rows = static_cast<Index>(src.rows());
  const auto cols = static_cast<Index>(src.cols());
  if (r > 0 && c > 0 && r + 1 < rows && c + 1 < cols) {
    for (Index dr = -1; dr <= 1; ++dr) {
      for (Index dc = -1; dc <= 1; ++dc) {
        p[(dr + 1) * 3 + (dc + 1)] = src(static_cast<std::size_t>(r + dr), static_cast<std::size_t>(c + dc));
      }
    }
    return p;
  }
  for (Index dr = -1; dr <= 1; ++dr) {
    for (Index dc = -1; dc <= 1; ++dc) p[(dr + 1) * 3 + (dc + 1)] = src.clamped(r + dr, c + dc);
  }
  return p;
}

double correlate3(const Patch& p, const Patch& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 9; ++i) acc += k[i] * p[i];
  return acc;
}

constexpr std::array<double, 9> kSobelX = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
constexpr std::array<double, 9> kSobelY = {-1, -2, -1, 0, 0, 0, 1, 2, 1};

constexpr std::array<double, 9> kScharr0 = {3, 0, -3, 10, 0, -10, 3, 0, -3};
constexpr std::array<double, 9> kScharr90 = {3, 10, 3, 0, 0, 0, -3, -10, -3};
constexpr std::array<double, 9> kScharr45 = {10, 3, 0, 3, 0, -3, 0, -3, -10};
constexpr std::array<double, 9> kScharr135 = {0, 3, 10, -3, 0, 3, -10, -3, 0};

Matrix pad_even(const Matrix& m) {
  const std::size_t rows = m.rows() + (m.rows() % 2);
  const std::size_t cols = m.cols() + (m.cols() % 2);
  if (rows == m.rows() && cols == m.cols()) return m;
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = m.clamped(static_cast<Index>(r), static_cast<Index>(c));
    }
  }
  return out;
}

}  // namespace

std::array<double, 3> gaussian3x3_taps() {
  const auto t = gaussian_taps(0.5, 1);
  return {t[0], t[1], t[2]};
}

Matrix gaussian3x3(const Matrix& m) { return smooth_separable(m, gaussian_taps(0.5, 1)); }

GrayImage gaussian3x3(const GrayImage& img) { return to_gray(gaussian3x3(img.matrix())); }

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("gaussian blur sigma must be positive");
  }
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  return to_gray(smooth_separable(img.matrix(), gaussian_taps(sigma, radius)));
}

GradientMaps thresholded_gradients(const GrayImage& img, double th) {
  if (!(th > 0.0) || !std::isfinite(th)) throw ParameterError("gradient threshold th must be > 0");
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  GradientMaps maps{Matrix(rows, cols), Matrix(rows, cols), th};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      maps.gx(r, c) = std::abs(img(r, c) - img(r, c + 1)) / th;
    }
  }
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      maps.gy(r, c) = std::abs(img(r, c) - img(r + 1, c)) / th;
    }
  }
  return maps;
}

GrayImage gradient_sum_image(const GradientMaps& maps) {
  Matrix out(maps.gx.rows(), maps.gx.cols());
  auto gx = maps.gx.values();
  auto gy = maps.gy.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::min(gx[i] + gy[i], 255.0);
  return GrayImage(std::move(out));
}

BinaryImage binarize_gradient(const GradientMaps& maps, double cutoff) {
  if (!(cutoff >= 0.0)) throw ParameterError("binarization cutoff must be >= 0");
  BinaryImage out(maps.gx.rows(), maps.gx.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out.set(r, c, maps.gx(r, c) + maps.gy(r, c) > cutoff);
    }
  }
  return out;
}

Matrix sobel_magnitude(const GrayImage& img) {
  Matrix mag(img.rows(), img.cols());
  for (Index r = 0; r < static_cast<Index>(img.rows()); ++r) {
    for (Index c = 0; c < static_cast<Index>(img.cols()); ++c) {
      const Patch p = patch3(img, r, c);
      const double sx = correlate3(p, kSobelX);
      const double sy = correlate3(p, kSobelY);
      mag(r, c) = std::sqrt(sx * sx + sy * sy);
    }
  }
  return mag;
}

BinaryImage sobel_edges(const GrayImage& img, const SobelParams& params) {
  const Matrix mag = sobel_magnitude(img);
  double sum = 0.0;
  for (double v : mag.values()) sum += v;
  const double cutoff = params.mean_factor * sum / static_cast<double>(mag.size());
  BinaryImage edges(img.rows(), img.cols());
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) edges.set(r, c, mag(r, c) > cutoff);
  }
  return edges;
}

Matrix harris_response(const GrayImage& img, const HarrisParams& params) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  Matrix ixx(rows, cols), iyy(rows, cols), ixy(rows, cols);
  for (Index r = 0; r < static_cast<Index>(rows); ++r) {
    for (Index c = 0; c < static_cast<Index>(cols); ++c) {
      const Patch p = patch3(img, r, c);
      const double ix = correlate3(p, kSobelX);
      const double iy = correlate3(p, kSobelY);
      ixx(r, c) = ix * ix;
      iyy(r, c) = iy * iy;
      ixy(r, c) = ix * iy;
    }
  }
  ixx = gaussian3x3(ixx);
  iyy = gaussian3x3(iyy);
  ixy = gaussian3x3(ixy);
  Matrix response(rows, cols);
  for (std::size_t i = 0; i < response.size(); ++i) {
    const double a = ixx.values()[i];
    const double b = iyy.values()[i];
    const double c = ixy.values()[i];
    const double trace = a + b;
    response.values()[i] = a * b - c * c - params.k * trace * trace;
  }
  return response;
}

std::vector<Corner> harris_corner_points(const GrayImage& img, const HarrisParams& params) {
  const Matrix resp = harris_response(img, params);
  const double max_r = *std::max_element(resp.values().begin(), resp.values().end());
  std::vector<Corner> corners;
  if (!(max_r > 0.0)) return corners;
  const double threshold = params.relative_threshold * max_r;
  const auto rows = static_cast<Index>(resp.rows());
  const auto cols = static_cast<Index>(resp.cols());
  const auto rad = static_cast<Index>(params.nms_radius);

  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double v = resp(r, c);
      if (!(v > threshold)) continue;
      // Plateaus keep only their first pixel in raster order.
      bool is_max = true;
      for (Index dr = -rad; dr <= rad && is_max; ++dr) {
        for (Index dc = -rad; dc <= rad; ++dc) {
          const Index rr = r + dr;
          const Index cc = c + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
          const double n = resp(rr, cc);
          const bool earlier = dr < 0 || (dr == 0 && dc < 0);
          if (earlier ? n >= v : n > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        corners.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), v});
      }
    }
  }
  return corners;
}

std::size_t harris_corners(const GrayImage& img, const HarrisParams& params) {
  return harris_corner_points(img, params).size();
}

WaveletBands haar_decompose(const Matrix& input) {
  const Matrix m = pad_even(input);
  const std::size_t hr = m.rows() / 2;
  const std::size_t hc = m.cols() / 2;
  constexpr double kInvSqrt2 = 0.70710678118654752440;

  // Row pass: pairs of columns.
  Matrix low(m.rows(), hc), high(m.rows(), hc);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < hc; ++c) {
      const double a = m(r, 2 * c);
      const double b = m(r, 2 * c + 1);
      low(r, c) = (a + b) * kInvSqrt2;
      high(r, c) = (a - b) * kInvSqrt2;
    }
  }
  // Column pass: pairs of rows.
  WaveletBands bands{Matrix(hr, hc), Matrix(hr, hc), Matrix(hr, hc), Matrix(hr, hc)};
  for (std::size_t r = 0; r < hr; ++r) {
    for (std::size_t c = 0; c < hc; ++c) {
      const double la = low(2 * r, c), lb = low(2 * r + 1, c);
      const double ha = high(2 * r, c), hb = high(2 * r + 1, c);
      bands.ll(r, c) = (la + lb) * kInvSqrt2;
      bands.lh(r, c) = (la - lb) * kInvSqrt2;
      bands.hl(r, c) = (ha + hb) * kInvSqrt2;
      bands.hh(r, c) = (ha - hb) * kInvSqrt2;
    }
  }
  return bands;
}

WaveletBands haar_decompose(const GrayImage& img) { return haar_decompose(img.matrix()); }

Matrix scharr_edge_strength(const GrayImage& img) {
  Matrix out(img.rows(), img.cols());
  for (Index r = 0; r < static_cast<Index>(img.rows()); ++r) {
    for (Index c = 0; c < static_cast<Index>(img.cols()); ++c) {
      const Patch p = patch3(img, r, c);
      const double d0 = std::abs(correlate3(p, kScharr0));
      const double d90 = std::abs(correlate3(p, kScharr90));
      const double d45 = std::abs(correlate3(p, kScharr45));
      const double d135 = std::abs(correlate3(p, kScharr135));
      out(r, c) = std::max({d0, d90, d45, d135});
    }
  }
  return out;
}

Matrix laplacian4(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Index r = 0; r < static_cast<Index>(m.rows()); ++r) {
    for (Index c = 0; c < static_cast<Index>(m.cols()); ++c) {
      out(r, c) = m.clamped(r - 1, c) + m.clamped(r + 1, c) + m.clamped(r, c - 1) +
                  m.clamped(r, c + 1) - 4.0 * m(r, c);
    }
  }
  return out;
}

BinaryImage zero_crossings(const Matrix& m) {
  const Matrix lap = laplacian4(m);
  BinaryImage out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = lap(r, c);
      const bool right = c + 1 < m.cols() && v * lap(r, c + 1) < 0.0;
      const bool down = r + 1 < m.rows() && v * lap(r + 1, c) < 0.0;
      out.set(r, c, right || down);
    }
  }
  return out;
}

}  // namespace spoofguard::filters
