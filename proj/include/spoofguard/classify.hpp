#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spoofguard/features.hpp"
#include "spoofguard/manifest.hpp"

namespace spoofguard::classify {

enum class ModelKind { Knn, Forest, SvmLinear, SvmRbf };

std::string_view model_kind_name(ModelKind k);  // knn, rf, svm-linear, svm-rbf
std::optional<ModelKind> parse_model_kind(std::string_view s);

using Row = std::vector<double>;

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnModel {
  int k = 3;
  std::vector<Row> rows;
  std::vector<Label> labels;

  /// Majority of the k nearest rows by Euclidean distance; equal distances
  /// prefer the lower row index.
  Label predict(std::span<const double> x) const;
};

KnnModel fit_knn(std::vector<Row> rows, std::vector<Label> labels, int k);

// ---------------------------------------------------------------------------
// Random forest

/// Flat tree node. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint32_t real_count = 0;
  std::uint32_t fake_count = 0;

  bool is_leaf() const { return feature < 0; }
  /// Majority label; ties go to fake.
  Label label() const { return real_count > fake_count ? Label::Real : Label::Fake; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  /// Times each training row was drawn into this tree's bootstrap sample.
  std::vector<std::uint32_t> inbag;

  Label predict(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
  int n_trees = 50;
  /// Features examined per split; 0 selects floor(sqrt(d)) (at least 1).
  int max_features = 0;
  std::uint64_t seed = 0;
};

struct Votes {
  int real = 0;
  int fake = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;

  Votes votes(std::span<const double> x) const;
  /// Majority vote; ties go to fake.
  Label predict(std::span<const double> x) const;
};

/// Tree t draws its bootstrap and split candidates from derive_seed(seed, t),
/// so trees are independent of build order. Splits minimise weighted Gini
/// impurity (compared exactly in integer arithmetic), ties broken by lower
/// feature index then lower threshold; thresholds are midpoints between
/// consecutive distinct values and `x <= threshold` goes left. Nodes split
/// until pure, smaller than 2 rows, or unsplittable.
ForestModel fit_forest(const std::vector<Row>& rows, const std::vector<Label>& labels,
                       const ForestParams& params);

DecisionTree fit_tree(const std::vector<Row>& rows, const std::vector<Label>& labels,
                      std::vector<std::uint32_t> inbag, int max_features, std::uint64_t seed);

struct OobPoint {
  int n_trees = 0;
  double error = 0.0;
  /// Rows with at least one out-of-bag vote among the first n_trees trees.
  std::size_t evaluated = 0;
};

std::vector<OobPoint> oob_curve(const ForestModel& forest, const std::vector<Row>& rows,
                                const std::vector<Label>& labels);

// ---------------------------------------------------------------------------
// Support vector machine

enum class Kernel { Linear, Rbf };

struct SvmParams {
  Kernel kernel = Kernel::Linear;
  double c = 1.0;
  /// RBF width: exp(-gamma |x - y|^2). 0.5 corresponds to sigma = 1.
  double gamma = 0.5;
  double tolerance = 1e-3;
  int max_epochs = 10000;
  std::uint64_t seed = 0;
};

double kernel_value(const SvmParams& p, std::span<const double> a, std::span<const double> b);

/// Solution of the soft-margin dual
///   max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij,  0 <= a_i <= C,  sum a_i y_i = 0
/// by SMO with maximal-violating-pair selection. Ties in pair selection follow
/// a seed-derived permutation of the rows.
struct SvmSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

SvmSolution solve_svm_dual(const std::vector<Row>& rows, std::span<const int> y, const SvmParams& params);

struct SvmModel {
  SvmParams params;
  double bias = 0.0;
  /// Linear kernel: primal weights.
  std::vector<double> weights;
  /// RBF kernel: support vectors with coefficients alpha_i y_i.
  std::vector<Row> support;
  std::vector<double> coef;
  double dual_objective = 0.0;

  double decision(std::span<const double> x) const;
  Label predict(std::span<const double> x) const { return decision(x) > 0.0 ? Label::Real : Label::Fake; }
};

SvmModel fit_svm(const std::vector<Row>& rows, const std::vector<Label>& labels, const SvmParams& params);

// ---------------------------------------------------------------------------
// Trained model with its feature projection and normalization

struct TrainedModel {
  ModelKind kind = ModelKind::Knn;
  std::vector<iqm::MetricId> feature_subset;
  features::MinMax normalization;
  std::variant<KnnModel, ForestModel, SvmModel> payload;

  /// `raw` holds unnormalized values in feature_subset order.
  Label predict_raw(std::span<const double> raw) const;
  /// Projects a full quality vector onto the subset first.
  Label predict(const features::QualityVector& q) const;
};

/// Each trainer fits min-max scaling on `data` and trains on the scaled rows.
TrainedModel train_knn(const features::FeatureMatrix& data, int k = 3);
TrainedModel train_forest(const features::FeatureMatrix& data, int n_trees = 50, std::uint64_t seed = 0,
                          int max_features = 0);
TrainedModel train_svm(const features::FeatureMatrix& data, Kernel kernel, double c = 1.0,
                       double gamma = 0.5, std::uint64_t seed = 0);

struct ModelConfig {
  ModelKind kind = ModelKind::Knn;
  int k = 3;
  int n_trees = 50;
  int max_features = 0;
  double c = 1.0;
  double gamma = 0.5;
  std::uint64_t seed = 0;
};

TrainedModel train(const features::FeatureMatrix& data, const ModelConfig& config);

/// OOB curve of a forest model over the rows it was trained on.
std::vector<OobPoint> oob_error_curve(const TrainedModel& model, const features::FeatureMatrix& data);

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace spoofguard::classify
