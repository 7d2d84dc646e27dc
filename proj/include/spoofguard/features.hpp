#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofguard/image.hpp"
#include "spoofguard/iqm.hpp"
#include "spoofguard/manifest.hpp"

namespace spoofguard::features {

enum class Preproc { Plain, GradientDomain };

std::string_view preproc_name(Preproc p);
std::optional<Preproc> parse_preproc(std::string_view s);

/// The six metrics recomputed on gradient images in the gradient-domain variant.
inline constexpr std::array<iqm::MetricId, 6> kGradientDomainMetrics = {
    iqm::MetricId::Mse, iqm::MetricId::Psnr, iqm::MetricId::Sc,
    iqm::MetricId::Ed,  iqm::MetricId::Cd,   iqm::MetricId::Eyd};

struct QualityVector {
  iqm::MetricValues values{};
  double th_used = iqm::kDefaultTh;
  Preproc preproc = Preproc::Plain;

  double operator[](iqm::MetricId id) const { return values[iqm::metric_index(id)]; }
  bool operator==(const QualityVector&) const = default;
};

/// Quality-difference features of one image against its own 3x3 Gaussian blur.
/// In the gradient-domain variant the six pixel/edge/entropy metrics are taken
/// between the thresholded gradient-sum images of the two; the rest stay plain.
/// `config.th` is overridden by `th`.
QualityVector quality_features(const GrayImage& img, double th, Preproc preproc = Preproc::Plain,
                               const iqm::MetricConfig& config = {});

/// Replaces the six gradient-domain metrics of a plain vector `q` (computed
/// between ref and dist at q.th_used) and marks it gradient-domain.
void apply_gradient_domain(QualityVector& q, const GrayImage& ref, const GrayImage& dist,
                           const iqm::MetricConfig& config = {});

/// Paired mode: metrics taken directly between an enrolled reference and a probe.
QualityVector paired_features(const GrayImage& ref, const GrayImage& probe, double th,
                              Preproc preproc = Preproc::Plain, const iqm::MetricConfig& config = {});

/// Per-column min-max scaling fitted on training rows. Degenerate columns
/// (max == min) map to 0; values outside the fitted range clamp to [0, 1].
struct MinMax {
  std::vector<double> min;
  std::vector<double> max;

  double apply(std::size_t column, double v) const;
  std::vector<double> apply(std::span<const double> row) const;
};

struct FeatureRow {
  std::vector<double> values;
  Label label = Label::Real;
  std::string subject;
  int sample = 1;
};

/// Rows of feature values whose columns are `columns`, in that order.
struct FeatureMatrix {
  std::vector<iqm::MetricId> columns;
  std::vector<FeatureRow> rows;

  std::size_t width() const { return columns.size(); }
};

/// One extracted record as stored in the features CSV.
struct FeatureRecord {
  std::string subject;
  int sample = 1;
  Label label = Label::Real;
  QualityVector q;
};

FeatureMatrix to_matrix(std::span<const FeatureRecord> records);

MinMax fit_minmax(const FeatureMatrix& train);
FeatureMatrix normalize(const FeatureMatrix& m, const MinMax& norm);

/// Column projection in the order given. Throws ValidationError for an empty
/// subset or a metric the matrix does not carry.
FeatureMatrix select_metrics(const FeatureMatrix& m, std::span<const iqm::MetricId> subset);

/// Parses "c,i,j" / "sc,wash,gms" / "all". Throws ValidationError on unknown ids.
std::vector<iqm::MetricId> parse_subset(std::string_view list);
std::string format_subset(std::span<const iqm::MetricId> subset);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::string features_header();
std::string format_features_csv(std::span<const FeatureRecord> records);
std::vector<FeatureRecord> parse_features_csv(std::string_view text);
void save_features_csv(std::span<const FeatureRecord> records, const std::filesystem::path& path);
std::vector<FeatureRecord> load_features_csv(const std::filesystem::path& path);

}  // namespace spoofguard::features
