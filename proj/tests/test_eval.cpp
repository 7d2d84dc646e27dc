#include <fstream>
#include <random>

#include "doctest.h"
#include "spoofguard/error.hpp"
#include "spoofguard/eval.hpp"
#include "spoofguard/tables.hpp"
#include "test_util.hpp"

using namespace spoofguard;
using namespace spoofguard::eval;

namespace {

DatasetManifest fake_manifest(std::size_t subjects, Degradation kind = Degradation::SaltPepper) {
  DatasetManifest m;
  for (std::size_t i = 0; i < subjects; ++i) {
    const std::string id = "s" + std::to_string(i);
    for (int s = 1; s <= 3; ++s) {
      m.entries.push_back({id, s, Label::Real, Degradation::None, id + "_r.pgm"});
      m.entries.push_back({id, s, Label::Fake, kind, id + "_f.pgm"});
    }
  }
  return m;
}

// Features aligned with a manifest: fakes shifted away from reals.
features::FeatureMatrix shifted_features(const DatasetManifest& m, double shift, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  features::FeatureMatrix f;
  f.columns = {iqm::MetricId::Mse, iqm::MetricId::Gms};
  for (const auto& e : m.entries) {
    const double off = e.label == Label::Fake ? shift : 0.0;
    f.rows.push_back({{n(gen) + off, n(gen) + off}, e.label, e.subject, e.sample});
  }
  return f;
}

}  // namespace

TEST_CASE("rotation sizes") {
  for (auto [subjects, train, test] : {std::tuple{150, 600, 300}, {255, 1020, 510}, {1, 4, 2}}) {
    const auto rot = split_rotation(fake_manifest(static_cast<std::size_t>(subjects)));
    for (int r = 0; r < 3; ++r) {
      CHECK(rot[r].held_out == r + 1);
      CHECK(rot[r].train.size() == static_cast<std::size_t>(train));
      CHECK(rot[r].test.size() == static_cast<std::size_t>(test));
    }
  }
  auto ragged = fake_manifest(3);
  ragged.entries.erase(ragged.entries.begin() + 7);
  CHECK_THROWS_AS(split_rotation(ragged), ValidationError);
  try {
    split_rotation(ragged);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
  }
}

TEST_CASE("constant classifiers give HTER 50") {
  const auto m = fake_manifest(20);
  const auto data = shifted_features(m, 3.0, 1);
  const auto rot = split_rotation(m);
  const auto real = cross_validate(data, rot, constant_fitter(Label::Real));
  CHECK(real.ffr() == 0.0);
  CHECK(real.fgr() == 100.0);
  CHECK(real.hter() == 50.0);
  const auto fake = cross_validate(data, rot, constant_fitter(Label::Fake));
  CHECK(fake.ffr() == 100.0);
  CHECK(fake.fgr() == 0.0);
  CHECK(fake.hter() == 50.0);
}

TEST_CASE("separable features reach zero error for every model") {
  const auto m = fake_manifest(30);
  const auto data = shifted_features(m, 12.0, 2);
  const auto rot = split_rotation(m);
  for (auto kind : tables::kTableModels) {
    classify::ModelConfig cfg;
    cfg.kind = kind;
    EvalCounts total;
    for (const auto& f : cross_validate_model(data, rot, cfg)) total += f.counts;
    CHECK(total.hter() == 0.0);
    CHECK(total.ffr_denominator == 90);
  }
}

TEST_CASE("cross validation does not depend on thread count") {
  const auto m = fake_manifest(25);
  const auto data = shifted_features(m, 1.0, 3);
  const auto rot = split_rotation(m);
  classify::ModelConfig cfg;
  cfg.kind = classify::ModelKind::Forest;
  cfg.n_trees = 10;
  const auto a = cross_validate_model(data, rot, cfg, 1);
  const auto b = cross_validate_model(data, rot, cfg, 3);
  for (int r = 0; r < 3; ++r) CHECK(a[r].counts == b[r].counts);
}

TEST_CASE("verification score") {
  VerificationTemplate t{{iqm::MetricId::Gms}, {0.5}, {0.1}};
  CHECK(verify_score(t, std::vector<double>{0.7}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(verify_score(t, std::vector<double>{0.5}) == 0.0);
  t.sigma = {0.0};
  CHECK_THROWS_AS(verify_score(t, std::vector<double>{0.7}), DegenerateInputError);
  const auto s = column_sigma({{1.0, 5.0}, {3.0, 5.0}});
  CHECK(s[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s[1] == 0.0);
}

TEST_CASE("roc and histograms") {
  const std::vector<double> genuine = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> spoof = {1.0, 1.5, 2.0};
  const auto roc = roc_and_histograms(genuine, spoof, GarConvention::Standard);
  bool perfect = false;
  for (const auto& p : roc.points) perfect |= p.far == 0.0 && p.frr == 0.0;
  CHECK(perfect);
  CHECK(roc.genuine.counts.size() == kHistogramBins);
  CHECK(roc.genuine.total() == genuine.size());
  CHECK(roc.spoof.total() == spoof.size());
  CHECK(roc.spoof.counts.back() == 1);

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> a(1000), b(1000);
  for (double& v : a) v = u(gen);
  for (double& v : b) v = u(gen);
  // With GAR = 1 - FRR the chance curve is GAR = FAR; with GAR = 1 - FAR the
  // two are tied by definition.
  const auto same = roc_and_histograms(a, b, GarConvention::Standard);
  for (const auto& p : same.points) CHECK(std::abs(p.gar - p.far) <= 0.1);
  const auto paper = roc_and_histograms(a, b, GarConvention::Paper);
  for (const auto& p : paper.points) CHECK(std::abs(p.gar - (1.0 - p.far)) <= 0.1);
  CHECK_THROWS_AS(roc_and_histograms({}, b), ValidationError);
}

TEST_CASE("report round trip") {
  const auto corpus = tables::synthesize_corpus({4, 11, {degrade::DegradeSpec::with_defaults(
                                                            degrade::DegradeKind::SaltPepper)}});
  EvalConfig cfg;
  cfg.models = {classify::ModelKind::Knn, classify::ModelKind::Forest};
  cfg.model.n_trees = 5;
  cfg.gar = GarConvention::Standard;
  const auto report = evaluate_features(corpus.manifest, corpus.plain, cfg);
  testutil::TempDir dir("report");
  emit_report(report, dir.path);
  for (const char* f : {"report.json", "roc.csv", "hist_genuine.csv", "hist_spoof.csv", "oob.csv"}) {
    CHECK(std::filesystem::exists(dir.path / f));
  }
  const auto back = load_report(dir.path);
  CHECK(back.config == report.config);
  REQUIRE(back.classifiers.size() == report.classifiers.size());
  for (std::size_t i = 0; i < back.classifiers.size(); ++i) {
    CHECK(back.classifiers[i].counts == report.classifiers[i].counts);
    CHECK(back.classifiers[i].counts.hter() == report.classifiers[i].counts.hter());
  }
  CHECK(back.genuine_count == 12);
  CHECK(format_report_json(report) == format_report_json(evaluate_features(corpus.manifest, corpus.plain, cfg)));
  CHECK_THROWS_AS(load_report(dir.path / "nope"), IoError);
}
