#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

#include "spoofguard/image.hpp"
#include "spoofguard/manifest.hpp"

namespace spoofguard::degrade {

enum class DegradeKind { ReferenceGaussian, GaussianBlur, SaltPepper, Speckle };

std::string_view kind_name(DegradeKind k);
std::optional<DegradeKind> parse_kind(std::string_view s);
/// Manifest label of an attack kind; ReferenceGaussian has none.
std::optional<Degradation> as_degradation(DegradeKind k);

inline constexpr double kDefaultBlurSigma = 2.0;
inline constexpr double kDefaultSaltPepperDensity = 0.05;
inline constexpr double kDefaultSpeckleVariance = 0.04;

struct DegradeSpec {
  DegradeKind kind = DegradeKind::SaltPepper;
  /// Blur sigma, flip density, or speckle variance depending on `kind`.
  double strength = kDefaultSaltPepperDensity;
  std::uint64_t seed = 0;

  static DegradeSpec with_defaults(DegradeKind kind, std::uint64_t seed = 0);
  void validate() const;
};

/// Pure function of (img, spec). Outputs are not quantized.
///  reference-gaussian: filters::gaussian3x3
///  gaussian-blur:      Gaussian of sigma = strength, radius ceil(3 sigma)
///  salt-pepper:        per pixel u ~ U[0,1): u < d/2 -> 0, u < d -> 255
///  speckle:            x (1 + sqrt(strength) z), z ~ N(0,1), clamped
GrayImage degrade(const GrayImage& img, const DegradeSpec& spec);

/// Seed of the fake generated from one real sample; keyed by identity so the
/// result does not depend on generation order.
std::uint64_t sample_seed(std::uint64_t base, std::string_view subject, int sample, DegradeKind kind);

/// Procedural stand-in for a hand scan: 400x300, palm plus five fingers on a
/// textured background, integer intensities. Shape is fixed per subject with
/// small per-sample pose jitter and fresh sensor noise.
GrayImage synth_hand(std::uint64_t subject_seed, int sample_index);

/// Seed of subject `index` in a synthetic corpus generated from `corpus_seed`.
std::uint64_t subject_seed(std::uint64_t corpus_seed, std::size_t index);
std::string subject_id(std::size_t index);

/// Writes one fake PGM per (real entry x spec) under out_dir/fakes/<kind>/ and
/// the augmented manifest to out_dir/manifest.csv. Returns that manifest.
DatasetManifest build_fake_dataset(const DatasetManifest& reals, std::span<const DegradeSpec> kinds,
                                   const std::filesystem::path& out_dir);

}  // namespace spoofguard::degrade
