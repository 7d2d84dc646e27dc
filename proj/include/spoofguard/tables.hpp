#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spoofguard/classify.hpp"
#include "spoofguard/degrade.hpp"
#include "spoofguard/eval.hpp"
#include "spoofguard/features.hpp"

namespace spoofguard::tables {

inline constexpr std::array<double, 6> kThSweep = {1, 2, 4, 8, 16, 32};

/// The two GMS definitions compared in the threshold sweep.
inline constexpr std::array<iqm::GmsVariant, 2> kSweepVariants = {iqm::GmsVariant::MeanRoot,
                                                                  iqm::GmsVariant::SimilarityRatio};

struct CorpusSpec {
  std::size_t subjects = 150;
  std::uint64_t seed = 7;
  /// Attack kinds; each spec's seed is replaced by per-sample seeds derived
  /// from `seed`, matching what build-fakes writes for the same seed.
  std::vector<degrade::DegradeSpec> kinds;
  double th = iqm::kDefaultTh;
  iqm::MetricConfig metrics;
  bool gradient_domain = false;
  bool gms_sweep = false;
  std::size_t threads = 1;
};

/// Synthetic corpus held in memory. Fakes are quantized to integers, so the
/// features equal those of the same corpus written to PGM files.
struct SyntheticCorpus {
  /// Paths are placeholders; no files exist.
  DatasetManifest manifest;
  /// Rows aligned with manifest.entries, all ten metrics.
  features::FeatureMatrix plain;
  /// Same rows with gradient-domain preprocessing; empty unless requested.
  features::FeatureMatrix gradient;
  /// Per entry: GMS at kThSweep for each of kSweepVariants; empty unless requested.
  std::vector<std::array<std::array<double, kThSweep.size()>, kSweepVariants.size()>> gms_sweep;
};

SyntheticCorpus synthesize_corpus(const CorpusSpec& spec);

/// k-NN, RF, linear SVM and RBF SVM, in table column order.
inline constexpr std::array<classify::ModelKind, 4> kTableModels = {
    classify::ModelKind::Knn, classify::ModelKind::Forest, classify::ModelKind::SvmLinear,
    classify::ModelKind::SvmRbf};

using TableRow = std::array<eval::EvalCounts, kTableModels.size()>;

/// Cross-validates every table model on `columns` of `data`.
TableRow run_models(const SyntheticCorpus& corpus, const features::FeatureMatrix& data,
                    std::span<const iqm::MetricId> columns, Degradation kind, const classify::ModelConfig& base,
                    std::size_t threads = 1);

struct ReproduceConfig {
  std::uint64_t seed = 7;
  /// Corpus size of the per-metric, threshold, combination and preprocessing tables.
  std::size_t subjects = 150;
  /// Corpus size of the per-noise table.
  std::size_t noise_subjects = 255;
  /// Attack used for the 150-subject tables.
  degrade::DegradeKind kind = degrade::DegradeKind::GaussianBlur;
  /// Attack strength; 0 selects the kind's default.
  double strength = 0.0;
  classify::ModelConfig model;
  std::size_t threads = 1;
};

/// Writes table3_metrics.csv, table4_th_sweep.csv, table4_combinations.csv,
/// table5_preproc.csv and table6_noise.csv under `out_dir`. Each file starts
/// with a `#` line echoing the configuration.
void reproduce_tables(const ReproduceConfig& config, const std::filesystem::path& out_dir);

std::string config_line(const ReproduceConfig& config);

}  // namespace spoofguard::tables
