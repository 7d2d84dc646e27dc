#include "spoofguard/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "spoofguard/error.hpp"
#include "spoofguard/rng.hpp"

namespace spoofguard::classify {

namespace {

using features::FeatureMatrix;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

void check_rows(const std::vector<Row>& rows, const std::vector<Label>& labels) {
  if (rows.size() != labels.size()) throw DimensionError("row and label counts differ");
  if (rows.empty()) throw ValidationError("training set is empty");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) throw DimensionError("ragged training rows");
  }
}

// Split quality as an exact fraction: maximising
//   (a^2 + b^2) / nL + (c^2 + d^2) / nR
// minimises weighted Gini impurity.
struct SplitScore {
  __int128 num = -1;
  __int128 den = 1;

  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
  bool equals(const SplitScore& o) const { return num * o.den == o.num * den; }
};

double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2.0;
  return m < hi ? m : lo;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Row>& rows, const std::vector<Label>& labels, int max_features,
              std::uint64_t seed)
      : rows_(rows), labels_(labels), rng_(seed) {
    dims_ = rows.front().size();
    const auto auto_m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(dims_))));
    max_features_ = max_features <= 0 ? auto_m : std::min<std::size_t>(max_features, dims_);
  }

  int build(std::vector<std::size_t>& idx) {
    TreeNode node;
    for (std::size_t i : idx) (labels_[i] == Label::Real ? node.real_count : node.fake_count)++;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (node.real_count == 0 || node.fake_count == 0 || idx.size() < 2) return id;

    std::vector<std::size_t> order(dims_);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = dims_; i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);

    bool found = false;
    SplitScore best;
    std::size_t best_f = 0;
    double best_thr = 0.0;
    std::size_t examined = 0;
    for (std::size_t f : order) {
      if (examined >= max_features_ && found) break;
      ++examined;
      std::vector<std::size_t> sorted = idx;
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = rows_[a][f], vb = rows_[b][f];
        return va < vb || (va == vb && a < b);
      });
      const std::int64_t total_real = node.real_count, total_fake = node.fake_count;
      std::int64_t lr = 0, lf = 0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        (labels_[sorted[k]] == Label::Real ? lr : lf)++;
        const double here = rows_[sorted[k]][f], next = rows_[sorted[k + 1]][f];
        if (!(here < next)) continue;
        const std::int64_t nl = lr + lf;
        const std::int64_t nr = static_cast<std::int64_t>(sorted.size()) - nl;
        const std::int64_t rr = total_real - lr, rf = total_fake - lf;
        SplitScore s;
        s.num = static_cast<__int128>(lr * lr + lf * lf) * nr + static_cast<__int128>(rr * rr + rf * rf) * nl;
        s.den = static_cast<__int128>(nl) * nr;
        const double thr = midpoint(here, next);
        if (!found || s.better_than(best) ||
            (s.equals(best) && (f < best_f || (f == best_f && thr < best_thr)))) {
          found = true;
          best = s;
          best_f = f;
          best_thr = thr;
        }
      }
    }
    if (!found) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (rows_[i][best_f] <= best_thr ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(left);
    const int r = build(right);
    nodes_[id].feature = static_cast<int>(best_f);
    nodes_[id].threshold = best_thr;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  const std::vector<Row>& rows_;
  const std::vector<Label>& labels_;
  SplitMix64 rng_;
  std::size_t dims_ = 0;
  std::size_t max_features_ = 1;
  std::vector<TreeNode> nodes_;
};

std::vector<Row> rows_of(const FeatureMatrix& m) {
  std::vector<Row> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) out.push_back(r.values);
  return out;
}

std::vector<Label> labels_of(const FeatureMatrix& m) {
  std::vector<Label> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) out.push_back(r.label);
  return out;
}

TrainedModel make_model(ModelKind kind, const FeatureMatrix& data, features::MinMax norm) {
  TrainedModel m;
  m.kind = kind;
  m.feature_subset = data.columns;
  m.normalization = std::move(norm);
  return m;
}

}  // namespace

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Knn: return "knn";
    case ModelKind::Forest: return "rf";
    case ModelKind::SvmLinear: return "svm-linear";
    case ModelKind::SvmRbf: return "svm-rbf";
  }
  return "knn";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "knn") return ModelKind::Knn;
  if (s == "rf" || s == "forest") return ModelKind::Forest;
  if (s == "svm-linear") return ModelKind::SvmLinear;
  if (s == "svm-rbf") return ModelKind::SvmRbf;
  return std::nullopt;
}

// --- k-NN ------------------------------------------------------------------

KnnModel fit_knn(std::vector<Row> rows, std::vector<Label> labels, int k) {
  check_rows(rows, labels);
  if (k < 1 || k % 2 == 0) throw ParameterError("k must be a positive odd integer");
  if (static_cast<std::size_t>(k) > rows.size()) {
    throw ValidationError("k = " + std::to_string(k) + " exceeds the " + std::to_string(rows.size()) +
                          " training rows");
  }
  return KnnModel{k, std::move(rows), std::move(labels)};
}

Label KnnModel::predict(std::span<const double> x) const {
  std::vector<std::pair<double, std::size_t>> dist(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) dist[i] = {squared_distance(rows[i], x), i};
  const auto kk = static_cast<std::size_t>(k);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  int real = 0;
  for (std::size_t i = 0; i < kk; ++i) real += labels[dist[i].second] == Label::Real ? 1 : 0;
  return 2 * real > k ? Label::Real : Label::Fake;
}

// --- forest ----------------------------------------------------------------

Label DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].label();
}

DecisionTree fit_tree(const std::vector<Row>& rows, const std::vector<Label>& labels,
                      std::vector<std::uint32_t> inbag, int max_features, std::uint64_t seed) {
  check_rows(rows, labels);
  if (inbag.size() != rows.size()) throw DimensionError("in-bag counts do not match rows");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < inbag.size(); ++i) idx.insert(idx.end(), inbag[i], i);
  if (idx.empty()) throw ValidationError("empty bootstrap sample");
  TreeBuilder builder(rows, labels, max_features, seed);
  builder.build(idx);
  return DecisionTree{builder.take(), std::move(inbag)};
}

ForestModel fit_forest(const std::vector<Row>& rows, const std::vector<Label>& labels,
                       const ForestParams& params) {
  check_rows(rows, labels);
  if (rows.size() < 2) throw ValidationError("random forest needs at least 2 rows");
  if (params.n_trees < 1) throw ParameterError("n_trees must be >= 1");
  ForestModel forest;
  forest.params = params;
  forest.trees.reserve(static_cast<std::size_t>(params.n_trees));
  const std::size_t n = rows.size();
  for (int t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
    SplitMix64 draw(derive_seed(tree_seed, 0));
    std::vector<std::uint32_t> inbag(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++inbag[draw.below(n)];
    forest.trees.push_back(fit_tree(rows, labels, std::move(inbag), params.max_features,
                                    derive_seed(tree_seed, 1)));
  }
  return forest;
}

Votes ForestModel::votes(std::span<const double> x) const {
  Votes v;
  for (const auto& t : trees) (t.predict(x) == Label::Real ? v.real : v.fake)++;
  return v;
}

Label ForestModel::predict(std::span<const double> x) const {
  const Votes v = votes(x);
  return v.real > v.fake ? Label::Real : Label::Fake;
}

std::vector<OobPoint> oob_curve(const ForestModel& forest, const std::vector<Row>& rows,
                                const std::vector<Label>& labels) {
  check_rows(rows, labels);
  for (const auto& t : forest.trees) {
    if (t.inbag.size() != rows.size()) {
      throw DimensionError("OOB rows do not match the forest's training rows");
    }
  }
  std::vector<Votes> votes(rows.size());
  std::vector<OobPoint> curve;
  curve.reserve(forest.trees.size());
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (tree.inbag[i] != 0) continue;
      (tree.predict(rows[i]) == Label::Real ? votes[i].real : votes[i].fake)++;
    }
    OobPoint p;
    p.n_trees = static_cast<int>(t + 1);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (votes[i].real + votes[i].fake == 0) continue;
      ++p.evaluated;
      const Label pred = votes[i].real > votes[i].fake ? Label::Real : Label::Fake;
      wrong += pred != labels[i] ? 1 : 0;
    }
    p.error = p.evaluated == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(p.evaluated);
    curve.push_back(p);
  }
  return curve;
}

// --- SVM -------------------------------------------------------------------

double kernel_value(const SvmParams& p, std::span<const double> a, std::span<const double> b) {
  if (p.kernel == Kernel::Linear) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  }
  return std::exp(-p.gamma * squared_distance(a, b));
}

SvmSolution solve_svm_dual(const std::vector<Row>& rows, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = rows.size();
  if (y.size() != n) throw DimensionError("label count differs from row count");
  if (!(params.c > 0.0)) throw ParameterError("SVM C must be > 0");
  if (params.kernel == Kernel::Rbf && !(params.gamma > 0.0)) throw ParameterError("RBF gamma must be > 0");
  const double c = params.c;

  // Q_ij = y_i y_j K_ij, held in full; training sets here are a few thousand rows at most.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = y[i] * y[j] * kernel_value(params, rows[i], rows[j]);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(params.seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  SvmSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& a = sol.alpha;
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? a[t] < c : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? a[t] > 0.0 : a[t] < c; };

  const std::size_t max_iter =
      static_cast<std::size_t>(std::max(1, params.max_epochs)) * std::max<std::size_t>(n, 1);
  constexpr double kTau = 1e-12;
  while (sol.iterations < max_iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t : order) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < params.tolerance) {
      sol.converged = true;
      break;
    }
    ++sol.iterations;

    const double old_ai = a[i], old_aj = a[j];
    const double qii = q[i * n + i], qjj = q[j * n + j], qij = q[i * n + j];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_ai, dj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
  }

  // Bias: mean of -y G over free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (a[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;

  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += a[t] * (1.0 - grad[t]);
  sol.objective = obj / 2.0;
  return sol;
}

SvmModel fit_svm(const std::vector<Row>& rows, const std::vector<Label>& labels, const SvmParams& params) {
  check_rows(rows, labels);
  if (rows.size() < 2) throw ValidationError("SVM needs at least 2 rows");
  std::vector<int> y(labels.size());
  std::transform(labels.begin(), labels.end(), y.begin(), label_sign);
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw ValidationError("SVM training data must contain both labels");

  const SvmSolution sol = solve_svm_dual(rows, y, params);
  SvmModel m;
  m.params = params;
  m.bias = sol.bias;
  m.dual_objective = sol.objective;
  if (params.kernel == Kernel::Linear) {
    m.weights.assign(rows.front().size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (sol.alpha[i] == 0.0) continue;
      for (std::size_t d = 0; d < m.weights.size(); ++d) m.weights[d] += sol.alpha[i] * y[i] * rows[i][d];
    }
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (sol.alpha[i] == 0.0) continue;
      m.support.push_back(rows[i]);
      m.coef.push_back(sol.alpha[i] * y[i]);
    }
  }
  return m;
}

double SvmModel::decision(std::span<const double> x) const {
  double f = bias;
  if (params.kernel == Kernel::Linear) {
    for (std::size_t d = 0; d < weights.size(); ++d) f += weights[d] * x[d];
  } else {
    for (std::size_t s = 0; s < support.size(); ++s) f += coef[s] * kernel_value(params, support[s], x);
  }
  return f;
}

// --- trained model -----------------------------------------------------------

Label TrainedModel::predict_raw(std::span<const double> raw) const {
  const std::vector<double> x = normalization.apply(raw);
  return std::visit([&](const auto& m) { return m.predict(x); }, payload);
}

Label TrainedModel::predict(const features::QualityVector& q) const {
  std::vector<double> raw;
  raw.reserve(feature_subset.size());
  for (iqm::MetricId id : feature_subset) raw.push_back(q[id]);
  return predict_raw(raw);
}

TrainedModel train_knn(const FeatureMatrix& data, int k) {
  auto norm = features::fit_minmax(data);
  const FeatureMatrix scaled = features::normalize(data, norm);
  TrainedModel m = make_model(ModelKind::Knn, data, std::move(norm));
  m.payload = fit_knn(rows_of(scaled), labels_of(scaled), k);
  return m;
}

TrainedModel train_forest(const FeatureMatrix& data, int n_trees, std::uint64_t seed, int max_features) {
  auto norm = features::fit_minmax(data);
  const FeatureMatrix scaled = features::normalize(data, norm);
  TrainedModel m = make_model(ModelKind::Forest, data, std::move(norm));
  m.payload = fit_forest(rows_of(scaled), labels_of(scaled), {n_trees, max_features, seed});
  return m;
}

TrainedModel train_svm(const FeatureMatrix& data, Kernel kernel, double c, double gamma, std::uint64_t seed) {
  auto norm = features::fit_minmax(data);
  const FeatureMatrix scaled = features::normalize(data, norm);
  TrainedModel m = make_model(kernel == Kernel::Linear ? ModelKind::SvmLinear : ModelKind::SvmRbf, data,
                              std::move(norm));
  SvmParams p;
  p.kernel = kernel;
  p.c = c;
  p.gamma = gamma;
  p.seed = seed;
  m.payload = fit_svm(rows_of(scaled), labels_of(scaled), p);
  return m;
}

TrainedModel train(const FeatureMatrix& data, const ModelConfig& config) {
  switch (config.kind) {
    case ModelKind::Knn: return train_knn(data, config.k);
    case ModelKind::Forest: return train_forest(data, config.n_trees, config.seed, config.max_features);
    case ModelKind::SvmLinear: return train_svm(data, Kernel::Linear, config.c, config.gamma, config.seed);
    case ModelKind::SvmRbf: return train_svm(data, Kernel::Rbf, config.c, config.gamma, config.seed);
  }
  throw ParameterError("unknown model kind");
}

std::vector<OobPoint> oob_error_curve(const TrainedModel& model, const FeatureMatrix& data) {
  const auto* forest = std::get_if<ForestModel>(&model.payload);
  if (!forest) throw ValidationError("OOB curve requires a random forest model");
  const FeatureMatrix projected = features::select_metrics(data, model.feature_subset);
  const FeatureMatrix scaled = features::normalize(projected, model.normalization);
  return oob_curve(*forest, rows_of(scaled), labels_of(scaled));
}

// --- persistence -------------------------------------------------------------

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

std::string label_str(Label l) { return std::string(label_name(l)); }

Label label_from(const json& j) {
  const auto l = parse_label(j.get<std::string>());
  if (!l) throw FormatError("bad label in model file");
  return *l;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  json j;
  j["format"] = "spoofguard-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(model_kind_name(model.kind));
  json subset = json::array();
  for (iqm::MetricId id : model.feature_subset) subset.push_back(iqm::metric_column(id));
  j["feature_subset"] = subset;
  j["normalization"] = {{"min", model.normalization.min}, {"max", model.normalization.max}};

  if (const auto* knn = std::get_if<KnnModel>(&model.payload)) {
    json labels = json::array();
    for (Label l : knn->labels) labels.push_back(label_str(l));
    j["knn"] = {{"k", knn->k}, {"rows", knn->rows}, {"labels", labels}};
  } else if (const auto* rf = std::get_if<ForestModel>(&model.payload)) {
    json trees = json::array();
    for (const auto& t : rf->trees) {
      json nodes = json::array();
      for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.real_count, n.fake_count});
      }
      trees.push_back({{"inbag", t.inbag}, {"nodes", nodes}});
    }
    j["forest"] = {{"n_trees", rf->params.n_trees},
                   {"max_features", rf->params.max_features},
                   {"seed", rf->params.seed},
                   {"trees", trees}};
  } else if (const auto* svm = std::get_if<SvmModel>(&model.payload)) {
    j["svm"] = {{"kernel", svm->params.kernel == Kernel::Linear ? "linear" : "rbf"},
                {"c", svm->params.c},
                {"gamma", svm->params.gamma},
                {"tolerance", svm->params.tolerance},
                {"max_epochs", svm->params.max_epochs},
                {"seed", svm->params.seed},
                {"bias", svm->bias},
                {"weights", svm->weights},
                {"support", svm->support},
                {"coef", svm->coef},
                {"dual_objective", svm->dual_objective}};
  }
  return j.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "spoofguard-model") throw FormatError("not a spoofguard model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw FormatError("unsupported model format version");
    }
    TrainedModel m;
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw FormatError("unknown model kind");
    m.kind = *kind;
    for (const auto& s : j.at("feature_subset")) {
      const auto id = iqm::parse_metric(s.get<std::string>());
      if (!id) throw FormatError("unknown metric in model file");
      m.feature_subset.push_back(*id);
    }
    m.normalization.min = j.at("normalization").at("min").get<std::vector<double>>();
    m.normalization.max = j.at("normalization").at("max").get<std::vector<double>>();
    if (m.normalization.min.size() != m.feature_subset.size() ||
        m.normalization.max.size() != m.feature_subset.size()) {
      throw FormatError("normalization width does not match feature subset");
    }

    switch (m.kind) {
      case ModelKind::Knn: {
        const auto& k = j.at("knn");
        KnnModel knn;
        knn.k = k.at("k").get<int>();
        knn.rows = k.at("rows").get<std::vector<Row>>();
        for (const auto& l : k.at("labels")) knn.labels.push_back(label_from(l));
        m.payload = std::move(knn);
        break;
      }
      case ModelKind::Forest: {
        const auto& f = j.at("forest");
        ForestModel rf;
        rf.params.n_trees = f.at("n_trees").get<int>();
        rf.params.max_features = f.at("max_features").get<int>();
        rf.params.seed = f.at("seed").get<std::uint64_t>();
        for (const auto& t : f.at("trees")) {
          DecisionTree tree;
          tree.inbag = t.at("inbag").get<std::vector<std::uint32_t>>();
          for (const auto& n : t.at("nodes")) {
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.real_count = n.at(4).get<std::uint32_t>();
            node.fake_count = n.at(5).get<std::uint32_t>();
            tree.nodes.push_back(node);
          }
          rf.trees.push_back(std::move(tree));
        }
        m.payload = std::move(rf);
        break;
      }
      case ModelKind::SvmLinear:
      case ModelKind::SvmRbf: {
        const auto& s = j.at("svm");
        SvmModel svm;
        svm.params.kernel = s.at("kernel") == "linear" ? Kernel::Linear : Kernel::Rbf;
        svm.params.c = s.at("c").get<double>();
        svm.params.gamma = s.at("gamma").get<double>();
        svm.params.tolerance = s.at("tolerance").get<double>();
        svm.params.max_epochs = s.at("max_epochs").get<int>();
        svm.params.seed = s.at("seed").get<std::uint64_t>();
        svm.bias = s.at("bias").get<double>();
        svm.weights = s.at("weights").get<std::vector<double>>();
        svm.support = s.at("support").get<std::vector<Row>>();
        svm.coef = s.at("coef").get<std::vector<double>>();
        svm.dual_objective = s.at("dual_objective").get<double>();
        m.payload = std::move(svm);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw IoError("write failed: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace spoofguard::classify
