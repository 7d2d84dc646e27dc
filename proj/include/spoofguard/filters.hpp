#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "spoofguard/image.hpp"

namespace spoofguard::filters {

// Every kernel below replicates edge pixels for out-of-bound taps, and every
// output has the shape of its input unless stated otherwise.

/// Normalized 1-D taps of the sigma = 0.5 Gaussian; the 3x3 kernel is their outer product.
std::array<double, 3> gaussian3x3_taps();

/// 3x3 Gaussian low-pass (sigma = 0.5), the reference distortion of the quality features.
GrayImage gaussian3x3(const GrayImage& img);
Matrix gaussian3x3(const Matrix& m);

/// Gaussian blur with radius ceil(3 sigma). Constant images are preserved exactly.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Thresholded forward-difference gradient maps:
///   gx(i,j) = |I(i,j) - I(i,j+1)| / th, last column 0
///   gy(i,j) = |I(i,j) - I(i+1,j)| / th, last row 0
struct GradientMaps {
  Matrix gx;
  Matrix gy;
  double threshold = 1.0;
};

GradientMaps thresholded_gradients(const GrayImage& img, double th);

/// gx + gy as an image, saturated at 255 (only reachable for th < 2).
GrayImage gradient_sum_image(const GradientMaps& maps);

/// Bit set where gx + gy > cutoff.
BinaryImage binarize_gradient(const GradientMaps& maps, double cutoff = 1.0);

struct SobelParams {
  /// Binarization cutoff as a multiple of the mean gradient magnitude.
  double mean_factor = 4.0;
};

/// sqrt(sx^2 + sy^2) from the 3x3 Sobel pair.
Matrix sobel_magnitude(const GrayImage& img);
BinaryImage sobel_edges(const GrayImage& img, const SobelParams& params = {});

struct HarrisParams {
  double k = 0.04;
  /// Responses must exceed this fraction of the maximum response.
  double relative_threshold = 0.01;
  /// Non-maximum suppression half-width (1 -> 3x3 neighborhood).
  std::size_t nms_radius = 1;
};

struct Corner {
  std::size_t row;
  std::size_t col;
  double response;
};

/// R = det(M) - k trace(M)^2 with M built from Sobel derivatives and smoothed by gaussian3x3.
Matrix harris_response(const GrayImage& img, const HarrisParams& params = {});
std::vector<Corner> harris_corner_points(const GrayImage& img, const HarrisParams& params = {});
std::size_t harris_corners(const GrayImage& img, const HarrisParams& params = {});

/// Single-level orthonormal Haar decomposition, rows first then columns.
/// `lh` is low-pass along rows and high-pass along columns; `hl` the reverse.
/// Odd dimensions are padded to even by replicating the last row/column.
struct WaveletBands {
  Matrix ll;
  Matrix lh;
  Matrix hl;
  Matrix hh;
};

WaveletBands haar_decompose(const GrayImage& img);
WaveletBands haar_decompose(const Matrix& m);

/// Max absolute response of the four unnormalized 3x3 Scharr kernels
/// (0, 90, 45 and 135 degrees; center-row weights 3, 10, 3).
Matrix scharr_edge_strength(const GrayImage& img);

/// 4-neighbor Laplacian.
Matrix laplacian4(const Matrix& m);

/// Pixels whose Laplacian changes sign against the right or lower neighbor.
BinaryImage zero_crossings(const Matrix& m);

}  // namespace spoofguard::filters
