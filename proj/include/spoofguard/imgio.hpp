#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "spoofguard/image.hpp"

namespace spoofguard::imgio {

/// Canonical working size (rows x cols) every CLI input is resized to.
inline constexpr std::size_t kWorkingRows = 400;
inline constexpr std::size_t kWorkingCols = 300;

/// Loads a binary PGM (P5, maxval <= 255) or an 8-bit PNG. Color PNGs are
/// converted with BT.601 luma weights and rounded half-up to integers.
GrayImage load_image(const std::filesystem::path& path);

/// Decodes an in-memory file image; the format is sniffed from the magic bytes.
GrayImage decode_image(std::span<const unsigned char> bytes);

/// BT.601 luma of an 8-bit RGB triple, rounded half-up.
int luma(int r, int g, int b);

/// Writes a binary PGM (P5, maxval 255), quantizing with round half-up.
void save_image(const GrayImage& img, const std::filesystem::path& path);

std::vector<unsigned char> encode_pgm(const GrayImage& img);

/// Bilinear resampling with pixel-center alignment:
/// src = (dst + 0.5) * (in / out) - 0.5, clamped to the source grid.
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_rows, std::size_t out_cols);

}  // namespace spoofguard::imgio
