#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "spoofguard/filters.hpp"
#include "spoofguard/image.hpp"

namespace spoofguard::iqm {

/// The ten full-reference metrics, in feature order (a) .. (j).
enum class MetricId { Mse, Psnr, Sc, Ed, Cd, Eyd, Ssim, Essim, Wash, Gms };

inline constexpr std::size_t kMetricCount = 10;
inline constexpr std::array<MetricId, kMetricCount> kAllMetrics = {
    MetricId::Mse,  MetricId::Psnr,  MetricId::Sc,   MetricId::Ed,  MetricId::Cd,
    MetricId::Eyd,  MetricId::Ssim,  MetricId::Essim, MetricId::Wash, MetricId::Gms};

std::size_t metric_index(MetricId id);
std::string_view metric_name(MetricId id);  // "mse", "psnr", ...
char metric_letter(MetricId id);            // 'a' .. 'j'
std::string metric_column(MetricId id);     // "a_mse", ...

/// Accepts a letter ("c"), a name ("sc", case-insensitive) or a column ("c_sc").
std::optional<MetricId> parse_metric(std::string_view token);

/// Value reported by PSNR when the two images are identical.
inline constexpr double kPsnrCap = 100.0;
/// Stabilizer used by ESSIM, WASH and the similarity-ratio GMS.
inline constexpr double kEpsilon = 1e-5;
/// Sharpness weight of WASH.
inline constexpr double kWashGamma = 0.8;
/// Default gradient control parameter.
inline constexpr double kDefaultTh = 8.0;

struct SsimParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double c3 = (0.03 * 255.0) * (0.03 * 255.0) / 2.0;
  std::size_t window = 8;
};

enum class GmsVariant {
  /// (1/NM) sqrt(dGx + dGy) with dGx, dGy the summed squared map differences.
  MeanRoot,
  /// (1/NM) sum over pixels of sqrt(dgx(i,j)^2 + dgy(i,j)^2).
  MeanRootPixelwise,
  /// (2 dGx dGy + eps) / (NM (dGx^2 + dGy^2 + eps)).
  SimilarityRatio,
};

std::string_view gms_variant_name(GmsVariant v);
std::optional<GmsVariant> parse_gms_variant(std::string_view token);

struct MetricConfig {
  double th = kDefaultTh;
  GmsVariant gms_variant = GmsVariant::MeanRoot;
  SsimParams ssim;
  filters::SobelParams sobel;
  filters::HarrisParams harris;
};

using MetricValues = std::array<double, kMetricCount>;

/// Sum of squared differences (no 1/NM factor).
double mse(const GrayImage& ref, const GrayImage& dist);
/// 10 log10(max(ref^2) / mse); kPsnrCap when mse is 0, -kPsnrCap when ref is all zero.
double psnr(const GrayImage& ref, const GrayImage& dist);
/// sum ref^2 / sum dist^2. Throws DegenerateInputError for an all-zero dist.
double sc(const GrayImage& ref, const GrayImage& dist);
/// Fraction of pixels where the Sobel edge maps disagree.
double ed(const GrayImage& ref, const GrayImage& dist, const filters::SobelParams& p = {});
double corner_difference(std::size_t n_ref, std::size_t n_dist);
double cd(const GrayImage& ref, const GrayImage& dist, const filters::HarrisParams& p = {});
/// Shannon entropy (bits) of the 256-bin histogram of rounded intensities.
double entropy(const GrayImage& img);
double eyd(const GrayImage& ref, const GrayImage& dist);
double ssim(const GrayImage& ref, const GrayImage& dist, const SsimParams& params = {});
double essim(const GrayImage& ref, const GrayImage& dist);

struct WashComponents {
  double sharpness_ref = 0.0;
  double sharpness_dist = 0.0;
  double sharpness_sim = 1.0;
  double zero_crossing_sim = 1.0;
  double value = 2.0;
};

/// Ratio of detail-band energy to total band energy (0 for an all-zero image).
double wavelet_sharpness(const filters::WaveletBands& bands);
/// |A and B| / sqrt(|A| |B|); 1 when both masks are empty, 0 when exactly one is.
double edge_structure_similarity(const BinaryImage& a, const BinaryImage& b);
WashComponents wash_components(const GrayImage& ref, const GrayImage& dist);
double wash(const GrayImage& ref, const GrayImage& dist);

struct GmsDeltas {
  double dgx = 0.0;
  double dgy = 0.0;
};
GmsDeltas gms_deltas(const GrayImage& ref, const GrayImage& dist, double th);
double gms(const GrayImage& ref, const GrayImage& dist, double th = kDefaultTh,
           GmsVariant variant = GmsVariant::MeanRoot);

double compute_metric(MetricId id, const GrayImage& ref, const GrayImage& dist,
                      const MetricConfig& config = {});

/// All ten metrics in order (a) .. (j). Deterministic.
MetricValues compute_all(const GrayImage& ref, const GrayImage& dist,
                         const MetricConfig& config = {});

}  // namespace spoofguard::iqm
