#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "spoofguard/classify.hpp"
#include "spoofguard/error.hpp"
#include "test_util.hpp"

using namespace spoofguard;
using namespace spoofguard::classify;

namespace {

constexpr Label R = Label::Real;
constexpr Label F = Label::Fake;

struct Toy {
  std::vector<Row> rows;
  std::vector<Label> labels;
};

Toy separable_2d(std::uint64_t seed, std::size_t n, double gap = 0.3) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Toy t;
  while (t.rows.size() < n) {
    const double x = u(gen), y = u(gen);
    const double s = x + y - 1.0;
    if (std::abs(s) < gap / 2) continue;
    t.rows.push_back({x, y});
    t.labels.push_back(s > 0 ? R : F);
  }
  return t;
}

Toy xor_set() { return {{{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {F, F, R, R}}; }

features::FeatureMatrix to_matrix(const Toy& t) {
  features::FeatureMatrix m;
  for (std::size_t c = 0; c < t.rows[0].size(); ++c) m.columns.push_back(iqm::kAllMetrics[c]);
  for (std::size_t i = 0; i < t.rows.size(); ++i) m.rows.push_back({t.rows[i], t.labels[i], "s", 1});
  return m;
}

double accuracy(const std::function<Label(const Row&)>& f, const Toy& t) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) ok += f(t.rows[i]) == t.labels[i];
  return static_cast<double>(ok) / static_cast<double>(t.rows.size());
}

// Recursive partition over the bootstrap multiset, every feature examined,
// weighted Gini in floating point. Returns the predicted label of `x`.
Label replay_tree(const Toy& t, const std::vector<std::size_t>& idx, const Row& x) {
  std::size_t nr = 0, nf = 0;
  for (std::size_t i : idx) (t.labels[i] == R ? nr : nf)++;
  auto leaf = [&] { return nr > nf ? R : F; };
  if (nr == 0 || nf == 0 || idx.size() < 2) return leaf();

  double best = INFINITY, best_thr = 0;
  int best_f = -1;
  for (std::size_t f = 0; f < t.rows[0].size(); ++f) {
    std::vector<double> vals;
    for (std::size_t i : idx) vals.push_back(t.rows[i][f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = vals[k] + (vals[k + 1] - vals[k]) / 2;
      double lr = 0, lf = 0, rr = 0, rf = 0;
      for (std::size_t i : idx) {
        const bool left = t.rows[i][f] <= thr;
        (t.labels[i] == R ? (left ? lr : rr) : (left ? lf : rf)) += 1;
      }
      const double nl = lr + lf, nrr = rr + rf;
      const double g = nl * (1 - (lr * lr + lf * lf) / (nl * nl)) + nrr * (1 - (rr * rr + rf * rf) / (nrr * nrr));
      if (g < best - 1e-12) {
        best = g;
        best_f = static_cast<int>(f);
        best_thr = thr;
      }
    }
  }
  if (best_f < 0) return leaf();
  std::vector<std::size_t> side;
  const bool go_left = x[best_f] <= best_thr;
  for (std::size_t i : idx)
    if ((t.rows[i][best_f] <= best_thr) == go_left) side.push_back(i);
  return replay_tree(t, side, x);
}

double dual_objective(const std::vector<Row>& rows, const std::vector<int>& y, const std::vector<double>& a,
                      const SvmParams& p) {
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < rows.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * kernel_value(p, rows[i], rows[j]);
  }
  return lin - 0.5 * quad;
}

// Pairwise ascent: each two-variable subproblem is solved by scanning a dense
// grid along its feasible segment.
double grid_pair_oracle(const std::vector<Row>& rows, const std::vector<int>& y, const SvmParams& p) {
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) K[i][j] = y[i] * y[j] * kernel_value(p, rows[i], rows[j]);
  auto objective = [&](const std::vector<double>& b) {
    double lin = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += b[i];
      for (std::size_t j = 0; j < n; ++j) quad += b[i] * b[j] * K[i][j];
    }
    return lin - 0.5 * quad;
  };
  std::vector<double> a(n, 0.0);
  double obj = 0.0;
  for (int sweep = 0; sweep < 60; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // Moving a_i by t forces a_j by -y_i y_j t to keep sum a y fixed.
        const double s = -static_cast<double>(y[i] * y[j]);
        double lo = -a[i], hi = p.c - a[i];
        const double jl = s > 0 ? -a[j] / s : (p.c - a[j]) / s;
        const double jh = s > 0 ? (p.c - a[j]) / s : -a[j] / s;
        lo = std::max(lo, jl);
        hi = std::min(hi, jh);
        if (!(hi > lo)) continue;
        const int steps = 400;
        double best_t = 0.0, best = obj;
        for (int k = 0; k <= steps; ++k) {
          const double t = lo + (hi - lo) * k / steps;
          auto b = a;
          b[i] += t;
          b[j] += s * t;
          const double v = objective(b);
          if (v > best) {
            best = v;
            best_t = t;
          }
        }
        a[i] += best_t;
        a[j] += s * best_t;
        obj = best;
      }
    }
  }
  return obj;
}

}  // namespace

TEST_CASE("knn examples") {
  const auto m = fit_knn({{0.0}, {1.0}}, {R, F}, 1);
  CHECK(m.predict(std::vector<double>{0.1}) == R);
  CHECK(m.predict(std::vector<double>{0.5}) == R);
  const auto m2 = fit_knn({{1.0}, {0.0}}, {F, R}, 1);
  CHECK(m2.predict(std::vector<double>{0.5}) == F);
  const auto dup = fit_knn({{0.3}, {0.3}, {0.3}}, {F, F, F}, 3);
  CHECK(dup.predict(std::vector<double>{0.9}) == F);

  // Exhaustive oracle on a 2-D XOR-like set.
  const Toy t{{{0, 0}, {1, 1}, {0, 1}, {1, 0}, {0.1, 0.1}}, {F, F, R, R, R}};
  const auto k3 = fit_knn(t.rows, t.labels, 3);
  for (const Row& q : std::vector<Row>{{0, 0}, {1, 1}, {0.9, 0.05}, {0.2, 0.8}}) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      d.push_back({std::hypot(q[0] - t.rows[i][0], q[1] - t.rows[i][1]), i});
    }
    std::sort(d.begin(), d.end());
    int real = 0;
    for (int i = 0; i < 3; ++i) real += t.labels[d[i].second] == R;
    CHECK(k3.predict(q) == (real >= 2 ? R : F));
  }
  CHECK_THROWS_AS(fit_knn({{0.0}, {1.0}}, {R, F}, 2), ParameterError);
  CHECK_THROWS_AS(fit_knn({{0.0}, {1.0}}, {R, F}, 3), ValidationError);
}

TEST_CASE("forest: separable data, determinism, replay oracle") {
  const Toy line{{{0.1}, {0.2}, {0.3}, {0.7}, {0.8}, {0.9}}, {F, F, F, R, R, R}};
  const auto f = fit_forest(line.rows, line.labels, {25, 0, 3});
  CHECK(accuracy([&](const Row& x) { return f.predict(x); }, line) == 1.0);
  const auto g = fit_forest(line.rows, line.labels, {25, 0, 3});
  CHECK(f.trees == g.trees);

  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0, 1);
  Toy t;
  for (int i = 0; i < 20; ++i) {
    t.rows.push_back({u(gen), u(gen)});
    t.labels.push_back(t.rows.back()[0] + 0.3 * u(gen) > 0.6 ? R : F);
  }
  const auto forest = fit_forest(t.rows, t.labels, {15, 2, 99});
  std::vector<Row> queries = t.rows;
  for (int i = 0; i < 200; ++i) queries.push_back({u(gen), u(gen)});
  for (const auto& tree : forest.trees) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < tree.inbag.size(); ++i)
      for (std::uint32_t k = 0; k < tree.inbag[i]; ++k) idx.push_back(i);
    for (const auto& q : queries) CHECK(tree.predict(q) == replay_tree(t, idx, q));
  }
}

TEST_CASE("forest OOB curve") {
  const auto sep = separable_2d(4, 200);
  const auto f = fit_forest(sep.rows, sep.labels, {50, 0, 1});
  const auto curve = oob_curve(f, sep.rows, sep.labels);
  REQUIRE(curve.size() == 50);
  CHECK(curve.back().error <= 0.02);
  CHECK(curve[49].error <= curve[4].error);

  std::mt19937_64 gen(8);
  std::bernoulli_distribution coin(0.5);
  Toy noise = separable_2d(5, 200);
  for (auto& l : noise.labels) l = coin(gen) ? R : F;
  const auto nf = fit_forest(noise.rows, noise.labels, {100, 0, 2});
  const double err = oob_curve(nf, noise.rows, noise.labels).back().error;
  CHECK(err >= 0.35);
  CHECK(err <= 0.65);
}

TEST_CASE("svm: separable 1-D, xor, dual against the grid oracle") {
  const SvmModel lin = fit_svm({{-1.0}, {1.0}}, {F, R}, {});
  CHECK(lin.decision(std::vector<double>{-1.0}) < 0);
  CHECK(lin.decision(std::vector<double>{1.0}) > 0);
  const double boundary = -lin.bias / lin.weights[0];
  CHECK(boundary > -1.0);
  CHECK(boundary < 1.0);

  const Toy x = xor_set();
  SvmParams lp;
  const auto xl = fit_svm(x.rows, x.labels, lp);
  CHECK(accuracy([&](const Row& r) { return xl.predict(r); }, x) <= 0.75);
  SvmParams rp;
  rp.kernel = Kernel::Rbf;
  rp.c = 10.0;
  const auto xr = fit_svm(x.rows, x.labels, rp);
  CHECK(accuracy([&](const Row& r) { return xr.predict(r); }, x) == 1.0);

  const auto t = separable_2d(3, 10);
  std::vector<int> y;
  for (auto l : t.labels) y.push_back(label_sign(l));
  for (Kernel k : {Kernel::Linear, Kernel::Rbf}) {
    SvmParams p;
    p.kernel = k;
    const auto sol = solve_svm_dual(t.rows, y, p);
    CHECK(sol.converged);
    const double smo = dual_objective(t.rows, y, sol.alpha, p);
    CHECK(smo == doctest::Approx(sol.objective).epsilon(1e-9));
    const double grid = grid_pair_oracle(t.rows, y, p);
    MESSAGE("dual objective smo " << smo << " grid " << grid);
    CHECK(std::abs(smo - grid) <= 1e-3);
    double balance = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(sol.alpha[i] >= 0.0);
      CHECK(sol.alpha[i] <= p.c + 1e-12);
      balance += sol.alpha[i] * y[i];
    }
    CHECK(std::abs(balance) <= 1e-9);
  }
  CHECK_THROWS_AS(fit_svm({{0.0}, {1.0}}, {R, R}, {}), ValidationError);
}

TEST_CASE("trained models: pure leaves, persistence round trip") {
  const auto sep = separable_2d(9, 60);
  const auto data = to_matrix(sep);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  testutil::TempDir dir("model");
  for (ModelKind kind : {ModelKind::Knn, ModelKind::Forest, ModelKind::SvmLinear, ModelKind::SvmRbf}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.seed = 5;
    const auto model = train(data, cfg);
    if (kind == ModelKind::Forest || kind == ModelKind::Knn) {
      for (const auto& r : data.rows) CHECK(model.predict_raw(r.values) == r.label);
    }
    const auto path = dir.path / (std::string(model_kind_name(kind)) + ".json");
    save_model(model, path);
    const auto back = load_model(path);
    CHECK(back.kind == kind);
    CHECK(serialize_model(back) == serialize_model(model));
    for (int i = 0; i < 1000; ++i) {
      const Row q = {u(gen), u(gen)};
      CHECK(back.predict_raw(q) == model.predict_raw(q));
    }
  }
  CHECK_THROWS_AS(load_model(dir.path / "absent.json"), IoError);
  CHECK_THROWS_AS(deserialize_model("{\"format\":\"other\"}"), FormatError);
  CHECK_THROWS_AS(deserialize_model("not json"), FormatError);
}
