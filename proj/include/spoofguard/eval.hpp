#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spoofguard/classify.hpp"
#include "spoofguard/features.hpp"
#include "spoofguard/manifest.hpp"

namespace spoofguard::eval {

// ---------------------------------------------------------------------------
// Protocol

/// One rotation of the leave-one-of-three protocol; indices refer to
/// manifest entries.
struct Partition {
  int held_out = 1;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

using Rotation = std::array<Partition, 3>;

/// Entries taking part in an experiment: all reals plus the fakes of `kind`.
/// Without `kind` the manifest must carry exactly one fake degradation.
Degradation protocol_degradation(const DatasetManifest& m, std::optional<Degradation> kind);

/// Fold r holds out sample r of both labels. Every subject must have samples
/// 1..3 of each label; otherwise ValidationError names the offenders.
Rotation split_rotation(const DatasetManifest& m, std::optional<Degradation> kind = std::nullopt);

struct EvalCounts {
  std::size_t ffr_numerator = 0;    // reals classified as fake
  std::size_t ffr_denominator = 0;  // reals tested
  std::size_t fgr_numerator = 0;    // fakes classified as real
  std::size_t fgr_denominator = 0;  // fakes tested

  double ffr() const;   // percent
  double fgr() const;   // percent
  double hter() const;  // (ffr + fgr) / 2, percent

  void add(Label truth, Label predicted);
  EvalCounts& operator+=(const EvalCounts& o);
  bool operator==(const EvalCounts&) const = default;
};

/// A fitted decision rule over raw (unnormalized) feature rows.
using Predictor = std::function<Label(std::span<const double>)>;
/// Fits a predictor on one fold's training rows; the second argument is the fold index.
using Fitter = std::function<Predictor(const features::FeatureMatrix&, int)>;

Fitter model_fitter(const classify::ModelConfig& config);
Fitter constant_fitter(Label label);

struct FoldResult {
  EvalCounts counts;
  /// Filled for forest models.
  std::vector<classify::OobPoint> oob;
};

/// Runs the three folds over `data`, whose rows are aligned with the manifest
/// entries the rotation indexes. Counts are pooled across folds.
EvalCounts cross_validate(const features::FeatureMatrix& data, const Rotation& rotation, const Fitter& fit,
                          std::size_t threads = 1);

/// Like cross_validate with a model, keeping per-fold OOB curves.
std::array<FoldResult, 3> cross_validate_model(const features::FeatureMatrix& data, const Rotation& rotation,
                                               const classify::ModelConfig& config, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Verification score

/// Per-metric template: the mean of a subject's enrolled samples and the
/// population standard deviation of each metric.
struct VerificationTemplate {
  std::vector<iqm::MetricId> metrics;
  std::vector<double> mean;
  std::vector<double> sigma;
};

/// t_v = sqrt(sum_f (U_f - V_f)^2 / sigma_f^2). `probe` is in template metric
/// order. Throws DegenerateInputError if any sigma_f is 0.
double verify_score(const VerificationTemplate& tmpl, std::span<const double> probe);
double verify_score(const VerificationTemplate& tmpl, const features::QualityVector& probe);

/// Sample standard deviation (n - 1 denominator) of each column.
std::vector<double> column_sigma(const std::vector<std::vector<double>>& rows);

enum class GarConvention {
  /// GAR = 1 - FAR.
  Paper,
  /// GAR = 1 - FRR.
  Standard,
};

std::string_view gar_convention_name(GarConvention c);
std::optional<GarConvention> parse_gar_convention(std::string_view s);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // fraction of spoof scores < threshold
  double frr = 0.0;  // fraction of genuine scores > threshold
  double gar = 0.0;  // per the active convention
};

inline constexpr std::size_t kHistogramBins = 100;

/// Equal-width bins over [0, upper]; right-open except the last.
struct Histogram {
  double upper = 0.0;
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

struct RocResult {
  GarConvention convention = GarConvention::Paper;
  std::vector<RocPoint> points;  // thresholds ascending
  Histogram genuine;
  Histogram spoof;
};

/// Thresholds are the sorted distinct union of both score lists. Both
/// histograms share the range [0, max score]. Throws ValidationError on an
/// empty list.
RocResult roc_and_histograms(std::span<const double> genuine, std::span<const double> spoof,
                             GarConvention convention = GarConvention::Paper);

struct VerificationScores {
  std::vector<double> genuine;
  std::vector<double> spoof;
  /// Metrics left out because their training spread was zero in some fold.
  std::vector<iqm::MetricId> dropped;
};

/// For each fold, every subject enrolls its two training reals (template mean)
/// against a sigma taken over all training reals of the fold. The held-out
/// real is the genuine probe and the held-out fake the spoof probe.
VerificationScores verification_scores(const features::FeatureMatrix& data, const Rotation& rotation);

// ---------------------------------------------------------------------------
// Dataset driver and report

struct ExtractConfig {
  double th = iqm::kDefaultTh;
  features::Preproc preproc = features::Preproc::Plain;
  iqm::MetricConfig metrics;
  /// Resize inputs to the working size.
  bool resize = true;
  std::size_t threads = 1;
};

/// Loads every manifest entry selected by `include` and extracts its quality
/// vector. Records align with manifest.entries; entries that were not
/// selected keep identity fields but zero values.
std::vector<features::FeatureRecord> extract_manifest(const DatasetManifest& manifest, const ExtractConfig& config,
                                                      const std::function<bool(const ManifestEntry&)>& include = {});

struct EvalConfig {
  std::vector<classify::ModelKind> models = {classify::ModelKind::Knn};
  classify::ModelConfig model;  // kind is overridden per entry of `models`
  std::vector<iqm::MetricId> subset{iqm::kAllMetrics.begin(), iqm::kAllMetrics.end()};
  ExtractConfig extract;
  std::optional<Degradation> degradation;
  bool verification = true;
  GarConvention gar = GarConvention::Paper;
};

struct ClassifierResult {
  classify::ModelKind kind = classify::ModelKind::Knn;
  EvalCounts counts;
  std::array<EvalCounts, 3> folds;
};

struct EvalReport {
  /// Ordered key/value echo of the effective configuration.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ClassifierResult> classifiers;
  std::optional<RocResult> roc;
  std::vector<iqm::MetricId> dropped_metrics;
  std::size_t genuine_count = 0;
  std::size_t spoof_count = 0;
  /// Per-fold OOB curves of the first forest model, if any.
  std::vector<std::vector<classify::OobPoint>> oob;
};

EvalReport evaluate(const DatasetManifest& manifest, const EvalConfig& config);

/// Evaluation over already extracted rows aligned with manifest entries.
EvalReport evaluate_features(const DatasetManifest& manifest, const features::FeatureMatrix& data,
                             const EvalConfig& config);

std::vector<std::pair<std::string, std::string>> config_echo(const EvalConfig& config, Degradation kind);

/// Writes report.json, roc.csv, hist_genuine.csv, hist_spoof.csv and oob.csv
/// into `dir` (created if needed). Output is a pure function of the report.
void emit_report(const EvalReport& report, const std::filesystem::path& dir);

/// Reads back report.json (config echo, counts and verification summary).
EvalReport load_report(const std::filesystem::path& dir);

std::string format_report_json(const EvalReport& report);

}  // namespace spoofguard::eval
