#include <cmath>
#include <random>

#include "doctest.h"
#include "spoofguard/error.hpp"
#include "spoofguard/filters.hpp"
#include "test_util.hpp"

using namespace spoofguard;
using namespace spoofguard::filters;

namespace {

GrayImage step_image(std::size_t rows, std::size_t cols, std::size_t step_col) {
  std::vector<double> px(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) px[r * cols + c] = c >= step_col ? 255.0 : 0.0;
  return GrayImage(rows, cols, std::move(px));
}

GrayImage square_image() {
  std::vector<double> px(100 * 100, 0.0);
  for (std::size_t r = 40; r < 60; ++r)
    for (std::size_t c = 40; c < 60; ++c) px[r * 100 + c] = 255.0;
  return GrayImage(100, 100, std::move(px));
}

GrayImage transpose(const GrayImage& img) {
  std::vector<double> px(img.size());
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < img.cols(); ++c) px[c * img.rows() + r] = img(r, c);
  return GrayImage(img.cols(), img.rows(), std::move(px));
}

}  // namespace

TEST_CASE("gaussian3x3 preserves constants and matches direct summation") {
  const auto flat = gaussian3x3(GrayImage::filled(6, 7, 100.0));
  for (double v : flat.pixels()) CHECK(v == 100.0);

  std::vector<double> px(25, 0.0);
  px[12] = 255.0;
  const auto out = gaussian3x3(GrayImage(5, 5, px));
  double sum = 0.0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) sum += std::exp(-(i * i + j * j) / 0.5);
  CHECK(out(2, 2) == doctest::Approx(255.0 / sum).epsilon(1e-14));

  CHECK_NOTHROW(gaussian3x3(GrayImage::filled(2, 2, 3.0)));

  std::mt19937_64 gen(11);
  const auto img = testutil::random_image(gen, 9, 6);
  const auto ref = oracle::gauss3(testutil::to_oracle(img));
  const auto got = gaussian3x3(img);
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < img.cols(); ++c) CHECK(got(r, c) == doctest::Approx(ref[r][c]).epsilon(1e-12));
}

TEST_CASE("gaussian_blur keeps constant images exactly") {
  const auto out = gaussian_blur(GrayImage::filled(12, 9, 77.0), 2.0);
  for (double v : out.pixels()) CHECK(v == 77.0);
  CHECK_THROWS_AS(gaussian_blur(GrayImage::filled(3, 3, 1.0), 0.0), ParameterError);
}

TEST_CASE("thresholded gradients") {
  const auto row = testutil::from_rows({{10, 20, 5}, {10, 20, 5}});
  const auto g1 = thresholded_gradients(row, 1.0);
  CHECK(g1.gx(0, 0) == 10.0);
  CHECK(g1.gx(0, 1) == 15.0);
  CHECK(g1.gx(0, 2) == 0.0);
  const auto g8 = thresholded_gradients(row, 8.0);
  CHECK(g8.gx(0, 0) == 1.25);
  CHECK(g8.gx(0, 1) == 1.875);
  CHECK(g8.gx(0, 2) == 0.0);
  for (double v : g8.gy.values()) CHECK(v == 0.0);

  const auto flat = thresholded_gradients(GrayImage::filled(4, 4, 9.0), 1.0);
  for (double v : flat.gx.values()) CHECK(v == 0.0);
  for (double v : flat.gy.values()) CHECK(v == 0.0);

  CHECK_THROWS_AS(thresholded_gradients(row, 0.0), ParameterError);
  CHECK_THROWS_AS(thresholded_gradients(row, -2.0), ParameterError);
}

TEST_CASE("gradient maps scale exactly with th = 2^p") {
  std::mt19937_64 gen(5);
  const auto img = testutil::random_image(gen, 16, 12);
  const auto base = thresholded_gradients(img, 1.0);
  for (int p = 0; p <= 5; ++p) {
    const double th = std::ldexp(1.0, p);
    const auto g = thresholded_gradients(img, th);
    for (std::size_t i = 0; i < g.gx.size(); ++i) {
      CHECK(g.gx.values()[i] == base.gx.values()[i] / th);
      CHECK(g.gy.values()[i] == base.gy.values()[i] / th);
      CHECK(g.gx.values()[i] <= 255.0 / th);
    }
  }
}

TEST_CASE("binarize_gradient") {
  const auto zero = binarize_gradient(thresholded_gradients(GrayImage::filled(5, 5, 0.0), 8.0));
  CHECK(zero.count() == 0);

  const auto maps = thresholded_gradients(step_image(6, 8, 4), 8.0);
  const auto bits = binarize_gradient(maps);
  CHECK(bits.count() == 6);
  for (std::size_t r = 0; r < 6; ++r) CHECK(bits(r, 3));
  CHECK(binarize_gradient(maps, 1e9).count() == 0);
  CHECK_THROWS_AS(binarize_gradient(maps, -1.0), ParameterError);

  std::mt19937_64 gen(3);
  const auto img = testutil::random_image(gen, 20, 20);
  std::size_t prev = img.size() + 1;
  for (double th : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const std::size_t n = binarize_gradient(thresholded_gradients(img, th)).count();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("sobel edges") {
  CHECK(sobel_edges(GrayImage::filled(5, 5, 40.0)).count() == 0);
  CHECK_NOTHROW(sobel_edges(GrayImage::filled(2, 2, 1.0)));

  // On the 5x5 step both edge columns hold 2/5 of the pixels, so the mean
  // magnitude rule (cutoff 4x mean = 1.6x the edge response) marks nothing.
  // The magnitude itself is confined to the two columns beside the step.
  const auto small = step_image(5, 5, 2);
  const Matrix mag = sobel_magnitude(small);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) CHECK((mag(r, c) > 0.0) == (c == 1 || c == 2));
  CHECK(sobel_edges(small).count() == 0);
  CHECK(sobel_edges(small, SobelParams{2.0}).count() == 10);

  // A wider image keeps the same two columns under the default rule.
  const auto wide = step_image(5, 20, 10);
  const auto edges = sobel_edges(wide);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 20; ++c) CHECK(edges(r, c) == (c == 9 || c == 10));
}

TEST_CASE("harris corners") {
  CHECK(harris_corners(GrayImage::filled(30, 30, 12.0)) == 0);

  const auto sq = square_image();
  const auto pts = harris_corner_points(sq);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    CHECK((p.row == 40 || p.row == 59 || p.row == 39 || p.row == 60));
    CHECK((p.col == 40 || p.col == 59 || p.col == 39 || p.col == 60));
  }
  CHECK(harris_corners(transpose(sq)) == 4);
  CHECK(harris_corners(sq) == static_cast<std::size_t>(oracle::harris_count(testutil::to_oracle(sq))));

  std::vector<double> ramp(40 * 40);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 40; ++c) ramp[r * 40 + c] = static_cast<double>(c) * 5.0;
  CHECK(harris_corners(GrayImage(40, 40, ramp)) == 0);
}

TEST_CASE("haar decomposition") {
  const auto flat = haar_decompose(GrayImage::filled(6, 4, 50.0));
  CHECK(flat.ll.rows() == 3);
  CHECK(flat.ll.cols() == 2);
  for (double v : flat.ll.values()) CHECK(v == doctest::Approx(100.0).epsilon(1e-15));
  for (const Matrix* m : {&flat.lh, &flat.hl, &flat.hh})
    for (double v : m->values()) CHECK(v == 0.0);

  const auto two = haar_decompose(testutil::from_rows({{1, 2}, {3, 4}}));
  CHECK(two.ll(0, 0) == doctest::Approx(5.0).epsilon(1e-15));

  std::mt19937_64 gen(8);
  const auto img = testutil::random_image(gen, 10, 14);
  const auto b = haar_decompose(img);
  auto energy = [](const Matrix& m) {
    double e = 0;
    for (double v : m.values()) e += v * v;
    return e;
  };
  double e_in = 0;
  for (double v : img.pixels()) e_in += v * v;
  const double e_out = energy(b.ll) + energy(b.lh) + energy(b.hl) + energy(b.hh);
  CHECK(std::abs(e_out - e_in) / e_in <= 1e-9);

  const auto odd = haar_decompose(testutil::random_image(gen, 7, 5));
  CHECK(odd.hh.rows() == 4);
  CHECK(odd.hh.cols() == 3);
}

TEST_CASE("scharr edge strength") {
  const Matrix flat = scharr_edge_strength(GrayImage::filled(5, 5, 9.0));
  for (double v : flat.values()) CHECK(v == 0.0);

  const auto e = scharr_edge_strength(step_image(5, 6, 3));
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(e(r, 2) == 4080.0);
    CHECK(e(r, 3) == 4080.0);
    CHECK(e(r, 0) == 0.0);
  }

  std::vector<double> ramp(8 * 8);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) ramp[r * 8 + c] = static_cast<double>(c);
  const auto re = scharr_edge_strength(GrayImage(8, 8, ramp));
  for (std::size_t r = 1; r < 7; ++r)
    for (std::size_t c = 1; c < 7; ++c) CHECK(re(r, c) == re(1, 1));
}
