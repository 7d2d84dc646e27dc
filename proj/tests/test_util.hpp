#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "oracle/naive_metrics.hpp"
#include "spoofguard/image.hpp"

namespace testutil {

inline spoofguard::GrayImage random_image(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                                          bool integer = false) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> px(rows * cols);
  for (double& v : px) v = integer ? std::floor(u(gen)) : u(gen);
  return spoofguard::GrayImage(rows, cols, std::move(px));
}

// Pair with a shared structure plus independent noise, so every metric sees
// both agreement and disagreement.
inline std::pair<spoofguard::GrayImage, spoofguard::GrayImage> random_pair(std::mt19937_64& gen, std::size_t n) {
  const auto a = random_image(gen, n, n);
  std::normal_distribution<double> noise(0.0, 30.0);
  std::bernoulli_distribution independent(0.3);
  std::vector<double> px(a.size());
  const bool indep = independent(gen);
  const auto other = random_image(gen, n, n);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = std::clamp(indep ? other.pixels()[i] : a.pixels()[i] + noise(gen), 0.0, 255.0);
  }
  return {a, spoofguard::GrayImage(n, n, std::move(px))};
}

inline double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

inline oracle::Img to_oracle(const spoofguard::GrayImage& img) {
  oracle::Img out(img.rows(), std::vector<double>(img.cols()));
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < img.cols(); ++c) out[r][c] = img(r, c);
  return out;
}

inline spoofguard::GrayImage from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> px;
  std::size_t cols = 0;
  for (auto& r : rows) {
    cols = r.size();
    px.insert(px.end(), r.begin(), r.end());
  }
  return spoofguard::GrayImage(rows.size(), cols, std::move(px));
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("spoofguard_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testutil
