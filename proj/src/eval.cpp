#include "spoofguard/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spoofguard/error.hpp"
#include "spoofguard/imgio.hpp"
#include "spoofguard/parallel.hpp"
#include "spoofguard/rng.hpp"

namespace spoofguard::eval {

namespace {

using features::FeatureMatrix;
using features::format_double;

bool in_protocol(const ManifestEntry& e, Degradation kind) {
  return e.label == Label::Real || e.degradation == kind;
}

FeatureMatrix take_rows(const FeatureMatrix& data, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.columns = data.columns;
  out.rows.reserve(idx.size());
  for (std::size_t i : idx) out.rows.push_back(data.rows.at(i));
  return out;
}

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

void check_aligned(const FeatureMatrix& data, const Rotation& rotation) {
  for (const auto& p : rotation) {
    for (const auto* list : {&p.train, &p.test}) {
      for (std::size_t i : *list) {
        if (i >= data.rows.size()) throw DimensionError("feature rows do not cover the manifest");
      }
    }
  }
}

}  // namespace

Degradation protocol_degradation(const DatasetManifest& m, std::optional<Degradation> kind) {
  const auto kinds = m.fake_kinds();
  if (kind) {
    if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) {
      throw ValidationError("manifest has no fakes of degradation " + std::string(degradation_name(*kind)));
    }
    return *kind;
  }
  if (kinds.size() != 1) {
    std::string msg = kinds.empty() ? "manifest has no fake entries"
                                    : "manifest mixes fake degradations; choose one of:";
    for (Degradation d : kinds) msg += " " + std::string(degradation_name(d));
    throw ValidationError(msg);
  }
  return kinds.front();
}

Rotation split_rotation(const DatasetManifest& m, std::optional<Degradation> kind) {
  m.validate();
  const Degradation deg = protocol_degradation(m, kind);

  // subject -> [label][sample-1] entry index
  std::map<std::string, std::array<std::array<std::optional<std::size_t>, 3>, 2>> by_subject;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    if (!in_protocol(e, deg)) continue;
    auto& slot = by_subject[e.subject][e.label == Label::Real ? 0 : 1][e.sample - 1];
    slot = i;
  }
  std::vector<std::string> offenders;
  for (const auto& [subject, slots] : by_subject) {
    bool complete = true;
    for (const auto& label : slots) {
      for (const auto& s : label) complete = complete && s.has_value();
    }
    if (!complete) offenders.push_back(subject);
  }
  if (!offenders.empty()) {
    std::string msg = "subjects without 3 real and 3 " + std::string(degradation_name(deg)) + " samples:";
    for (const auto& s : offenders) msg += " " + s;
    throw ValidationError(msg);
  }

  Rotation rot;
  for (int r = 0; r < 3; ++r) {
    rot[r].held_out = r + 1;
    for (const auto& [subject, slots] : by_subject) {
      for (const auto& label : slots) {
        for (int s = 0; s < 3; ++s) (s == r ? rot[r].test : rot[r].train).push_back(*label[s]);
      }
    }
    std::sort(rot[r].train.begin(), rot[r].train.end());
    std::sort(rot[r].test.begin(), rot[r].test.end());
  }
  return rot;
}

double EvalCounts::ffr() const { return percent(ffr_numerator, ffr_denominator); }
double EvalCounts::fgr() const { return percent(fgr_numerator, fgr_denominator); }
double EvalCounts::hter() const { return (ffr() + fgr()) / 2.0; }

void EvalCounts::add(Label truth, Label predicted) {
  if (truth == Label::Real) {
    ++ffr_denominator;
    ffr_numerator += predicted == Label::Fake ? 1 : 0;
  } else {
    ++fgr_denominator;
    fgr_numerator += predicted == Label::Real ? 1 : 0;
  }
}

EvalCounts& EvalCounts::operator+=(const EvalCounts& o) {
  ffr_numerator += o.ffr_numerator;
  ffr_denominator += o.ffr_denominator;
  fgr_numerator += o.fgr_numerator;
  fgr_denominator += o.fgr_denominator;
  return *this;
}

Fitter model_fitter(const classify::ModelConfig& config) {
  return [config](const FeatureMatrix& train, int fold) -> Predictor {
    classify::ModelConfig c = config;
    c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(fold));
    auto model = std::make_shared<classify::TrainedModel>(classify::train(train, c));
    return [model](std::span<const double> x) { return model->predict_raw(x); };
  };
}

Fitter constant_fitter(Label label) {
  return [label](const FeatureMatrix&, int) -> Predictor {
    return [label](std::span<const double>) { return label; };
  };
}

EvalCounts cross_validate(const FeatureMatrix& data, const Rotation& rotation, const Fitter& fit,
                          std::size_t threads) {
  check_aligned(data, rotation);
  std::array<EvalCounts, 3> folds;
  parallel_for(3, threads, [&](std::size_t r) {
    const Predictor predict = fit(take_rows(data, rotation[r].train), static_cast<int>(r));
    for (std::size_t i : rotation[r].test) {
      const auto& row = data.rows[i];
      folds[r].add(row.label, predict(row.values));
    }
  });
  EvalCounts total;
  for (const auto& f : folds) total += f;
  return total;
}

std::array<FoldResult, 3> cross_validate_model(const FeatureMatrix& data, const Rotation& rotation,
                                               const classify::ModelConfig& config, std::size_t threads) {
  check_aligned(data, rotation);
  std::array<FoldResult, 3> out;
  parallel_for(3, threads, [&](std::size_t r) {
    const FeatureMatrix train = take_rows(data, rotation[r].train);
    classify::ModelConfig c = config;
    c.seed = derive_seed(config.seed, r);
    const classify::TrainedModel model = classify::train(train, c);
    for (std::size_t i : rotation[r].test) {
      const auto& row = data.rows[i];
      out[r].counts.add(row.label, model.predict_raw(row.values));
    }
    if (model.kind == classify::ModelKind::Forest) out[r].oob = classify::oob_error_curve(model, train);
  });
  return out;
}

// --- verification ------------------------------------------------------------

double verify_score(const VerificationTemplate& tmpl, std::span<const double> probe) {
  const std::size_t w = tmpl.metrics.size();
  if (tmpl.mean.size() != w || tmpl.sigma.size() != w || probe.size() != w) {
    throw DimensionError("probe and template use different metric subsets");
  }
  double acc = 0.0;
  for (std::size_t f = 0; f < w; ++f) {
    if (!(tmpl.sigma[f] > 0.0)) {
      throw DegenerateInputError("template metric " + std::string(iqm::metric_name(tmpl.metrics[f])) +
                                 " has zero standard deviation");
    }
    const double d = tmpl.mean[f] - probe[f];
    acc += d * d / (tmpl.sigma[f] * tmpl.sigma[f]);
  }
  return std::sqrt(acc);
}

double verify_score(const VerificationTemplate& tmpl, const features::QualityVector& probe) {
  std::vector<double> v;
  v.reserve(tmpl.metrics.size());
  for (iqm::MetricId id : tmpl.metrics) v.push_back(probe[id]);
  return verify_score(tmpl, v);
}

std::vector<double> column_sigma(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw ValidationError("standard deviation needs at least 2 rows");
  const std::size_t w = rows.front().size();
  std::vector<double> mean(w, 0.0), sigma(w, 0.0);
  for (const auto& r : rows) {
    if (r.size() != w) throw DimensionError("ragged rows");
    for (std::size_t f = 0; f < w; ++f) mean[f] += r[f];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < w; ++f) sigma[f] += (r[f] - mean[f]) * (r[f] - mean[f]);
  }
  for (double& s : sigma) s = std::sqrt(s / static_cast<double>(rows.size() - 1));
  return sigma;
}

std::string_view gar_convention_name(GarConvention c) {
  return c == GarConvention::Paper ? "paper" : "standard";
}

std::optional<GarConvention> parse_gar_convention(std::string_view s) {
  if (s == "paper") return GarConvention::Paper;
  if (s == "standard") return GarConvention::Standard;
  return std::nullopt;
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  return n;
}

RocResult roc_and_histograms(std::span<const double> genuine, std::span<const double> spoof,
                             GarConvention convention) {
  if (genuine.empty() || spoof.empty()) throw ValidationError("ROC needs genuine and spoof scores");
  for (const auto* list : {&genuine, &spoof}) {
    for (double v : *list) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("verification scores must be finite and >= 0");
    }
  }
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> s(spoof.begin(), spoof.end());
  std::sort(g.begin(), g.end());
  std::sort(s.begin(), s.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + s.size());
  std::merge(g.begin(), g.end(), s.begin(), s.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocResult res;
  res.convention = convention;
  res.points.reserve(thresholds.size());
  const auto ng = static_cast<double>(g.size());
  const auto ns = static_cast<double>(s.size());
  for (double t : thresholds) {
    RocPoint p;
    p.threshold = t;
    const auto spoof_below = std::lower_bound(s.begin(), s.end(), t) - s.begin();
    const auto genuine_above = g.end() - std::upper_bound(g.begin(), g.end(), t);
    p.far = static_cast<double>(spoof_below) / ns;
    p.frr = static_cast<double>(genuine_above) / ng;
    p.gar = convention == GarConvention::Paper ? 1.0 - p.far : 1.0 - p.frr;
    res.points.push_back(p);
  }

  const double upper = thresholds.back();
  auto bin = [&](std::span<const double> values) {
    Histogram h;
    h.upper = upper;
    h.counts.assign(kHistogramBins, 0);
    for (double v : values) {
      std::size_t b = 0;
      if (upper > 0.0) {
        b = static_cast<std::size_t>(std::floor(v / upper * static_cast<double>(kHistogramBins)));
        b = std::min(b, kHistogramBins - 1);
      }
      ++h.counts[b];
    }
    return h;
  };
  res.genuine = bin(g);
  res.spoof = bin(s);
  return res;
}

VerificationScores verification_scores(const FeatureMatrix& data, const Rotation& rotation) {
  check_aligned(data, rotation);
  VerificationScores out;
  std::set<std::size_t> dropped;
  for (const auto& part : rotation) {
    std::vector<std::vector<double>> reals;
    std::map<std::string, std::vector<std::size_t>> enrolled;
    for (std::size_t i : part.train) {
      const auto& row = data.rows[i];
      if (row.label != Label::Real) continue;
      reals.push_back(row.values);
      enrolled[row.subject].push_back(i);
    }
    const std::vector<double> sigma = column_sigma(reals);
    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < sigma.size(); ++f) {
      if (sigma[f] > 0.0 && std::isfinite(sigma[f])) {
        kept.push_back(f);
      } else {
        dropped.insert(f);
      }
    }
    if (kept.empty()) throw DegenerateInputError("every verification metric has zero spread");

    std::map<std::string, VerificationTemplate> templates;
    for (const auto& [subject, idx] : enrolled) {
      VerificationTemplate t;
      for (std::size_t f : kept) {
        double m = 0.0;
        for (std::size_t i : idx) m += data.rows[i].values[f];
        t.metrics.push_back(data.columns[f]);
        t.mean.push_back(m / static_cast<double>(idx.size()));
        t.sigma.push_back(sigma[f]);
      }
      templates.emplace(subject, std::move(t));
    }
    for (std::size_t i : part.test) {
      const auto& row = data.rows[i];
      const auto it = templates.find(row.subject);
      if (it == templates.end()) throw ValidationError("probe subject " + row.subject + " has no template");
      std::vector<double> probe;
      for (std::size_t f : kept) probe.push_back(row.values[f]);
      (row.label == Label::Real ? out.genuine : out.spoof).push_back(verify_score(it->second, probe));
    }
  }
  for (std::size_t f : dropped) out.dropped.push_back(data.columns[f]);
  return out;
}

// --- dataset driver ----------------------------------------------------------

std::vector<features::FeatureRecord> extract_manifest(const DatasetManifest& manifest, const ExtractConfig& config,
                                                      const std::function<bool(const ManifestEntry&)>& include) {
  std::vector<features::FeatureRecord> out(manifest.entries.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& e = manifest.entries[i];
    out[i].subject = e.subject;
    out[i].sample = e.sample;
    out[i].label = e.label;
    out[i].q.th_used = config.th;
    out[i].q.preproc = config.preproc;
  }
  parallel_for(out.size(), config.threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    if (include && !include(e)) return;
    GrayImage img = imgio::load_image(manifest.resolve(e));
    if (config.resize && (img.rows() != imgio::kWorkingRows || img.cols() != imgio::kWorkingCols)) {
      img = imgio::resize_bilinear(img, imgio::kWorkingRows, imgio::kWorkingCols);
    }
    out[i].q = features::quality_features(img, config.th, config.preproc, config.metrics);
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> config_echo(const EvalConfig& config, Degradation kind) {
  std::string models;
  for (auto k : config.models) models += (models.empty() ? "" : ",") + std::string(classify::model_kind_name(k));
  return {
      {"degradation", std::string(degradation_name(kind))},
      {"models", models},
      {"subset", features::format_subset(config.subset)},
      {"th", format_double(config.extract.th)},
      {"preproc", std::string(features::preproc_name(config.extract.preproc))},
      {"gms_variant", std::string(iqm::gms_variant_name(config.extract.metrics.gms_variant))},
      {"resize", config.extract.resize ? "true" : "false"},
      {"seed", std::to_string(config.model.seed)},
      {"k", std::to_string(config.model.k)},
      {"n_trees", std::to_string(config.model.n_trees)},
      {"max_features", std::to_string(config.model.max_features)},
      {"svm_c", format_double(config.model.c)},
      {"svm_gamma", format_double(config.model.gamma)},
      {"verification", config.verification ? "true" : "false"},
      {"gar_convention", std::string(gar_convention_name(config.gar))},
  };
}

EvalReport evaluate_features(const DatasetManifest& manifest, const FeatureMatrix& data, const EvalConfig& config) {
  if (config.models.empty()) throw ValidationError("no classifier selected");
  const Degradation kind = protocol_degradation(manifest, config.degradation);
  const Rotation rotation = split_rotation(manifest, kind);
  const FeatureMatrix projected = features::select_metrics(data, config.subset);

  EvalReport report;
  report.config = config_echo(config, kind);
  for (classify::ModelKind k : config.models) {
    classify::ModelConfig mc = config.model;
    mc.kind = k;
    const auto folds = cross_validate_model(projected, rotation, mc, config.extract.threads);
    ClassifierResult res;
    res.kind = k;
    for (std::size_t r = 0; r < 3; ++r) {
      res.folds[r] = folds[r].counts;
      res.counts += folds[r].counts;
    }
    if (k == classify::ModelKind::Forest && report.oob.empty()) {
      for (const auto& f : folds) report.oob.push_back(f.oob);
    }
    report.classifiers.push_back(res);
  }
  if (config.verification) {
    const VerificationScores scores = verification_scores(projected, rotation);
    report.roc = roc_and_histograms(scores.genuine, scores.spoof, config.gar);
    report.dropped_metrics = scores.dropped;
    report.genuine_count = scores.genuine.size();
    report.spoof_count = scores.spoof.size();
  }
  return report;
}

EvalReport evaluate(const DatasetManifest& manifest, const EvalConfig& config) {
  const Degradation kind = protocol_degradation(manifest, config.degradation);
  split_rotation(manifest, kind);  // validate before the expensive extraction
  const auto records =
      extract_manifest(manifest, config.extract, [kind](const ManifestEntry& e) { return in_protocol(e, kind); });
  EvalConfig resolved = config;
  resolved.degradation = kind;
  return evaluate_features(manifest, features::to_matrix(records), resolved);
}

// --- report ------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kReportFormat = "spoofguard-report";
constexpr int kReportVersion = 1;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin,lower,upper,count\n";
  const double width = h.upper / static_cast<double>(kHistogramBins);
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double lo = width * static_cast<double>(b);
    const double hi = b + 1 == h.counts.size() ? h.upper : width * static_cast<double>(b + 1);
    out += std::to_string(b) + "," + format_double(lo) + "," + format_double(hi) + "," +
           std::to_string(h.counts[b]) + "\n";
  }
  return out;
}

std::string config_header(const EvalReport& r) {
  std::string out = "#";
  for (const auto& [k, v] : r.config) out += " " + k + "=" + v;
  return out + "\n";
}

}  // namespace

std::string format_report_json(const EvalReport& report) {
  ordered_json j;
  j["format"] = kReportFormat;
  j["version"] = kReportVersion;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : report.config) cfg[k] = v;
  j["config"] = cfg;
  ordered_json classifiers = ordered_json::array();
  for (const auto& c : report.classifiers) {
    ordered_json folds = ordered_json::array();
    for (const auto& f : c.folds) {
      folds.push_back({{"ffr_numerator", f.ffr_numerator},
                       {"ffr_denominator", f.ffr_denominator},
                       {"fgr_numerator", f.fgr_numerator},
                       {"fgr_denominator", f.fgr_denominator}});
    }
    classifiers.push_back({{"model", classify::model_kind_name(c.kind)},
                           {"ffr_numerator", c.counts.ffr_numerator},
                           {"ffr_denominator", c.counts.ffr_denominator},
                           {"fgr_numerator", c.counts.fgr_numerator},
                           {"fgr_denominator", c.counts.fgr_denominator},
                           {"ffr", c.counts.ffr()},
                           {"fgr", c.counts.fgr()},
                           {"hter", c.counts.hter()},
                           {"folds", folds}});
  }
  j["classifiers"] = classifiers;
  if (report.roc) {
    ordered_json dropped = ordered_json::array();
    for (auto id : report.dropped_metrics) dropped.push_back(iqm::metric_column(id));
    // Best operating point under the conventional acceptance rate.
    const RocPoint* best = nullptr;
    for (const auto& p : report.roc->points) {
      if (!best || std::max(p.far, p.frr) < std::max(best->far, best->frr)) best = &p;
    }
    j["verification"] = {{"gar_convention", gar_convention_name(report.roc->convention)},
                         {"genuine_count", report.genuine_count},
                         {"spoof_count", report.spoof_count},
                         {"roc_points", report.roc->points.size()},
                         {"dropped_metrics", dropped},
                         {"min_max_far_frr",
                          {{"threshold", best->threshold}, {"far", best->far}, {"frr", best->frr}}}};
  }
  if (!report.oob.empty()) {
    ordered_json oob = ordered_json::array();
    for (const auto& curve : report.oob) oob.push_back(curve.empty() ? 0.0 : curve.back().error);
    j["oob_terminal_error"] = oob;
  }
  return j.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", format_report_json(report));

  const std::string header = config_header(report);
  std::string roc = header + "threshold,far,frr,gar\n";
  std::string hg = header, hs = header;
  if (report.roc) {
    for (const auto& p : report.roc->points) {
      roc += format_double(p.threshold) + "," + format_double(p.far) + "," + format_double(p.frr) + "," +
             format_double(p.gar) + "\n";
    }
    hg += histogram_csv(report.roc->genuine);
    hs += histogram_csv(report.roc->spoof);
  } else {
    hg += "bin,lower,upper,count\n";
    hs += "bin,lower,upper,count\n";
  }
  write_text(dir / "roc.csv", roc);
  write_text(dir / "hist_genuine.csv", hg);
  write_text(dir / "hist_spoof.csv", hs);

  std::string oob = header + "fold,n_trees,error,evaluated\n";
  for (std::size_t f = 0; f < report.oob.size(); ++f) {
    for (const auto& p : report.oob[f]) {
      oob += std::to_string(f + 1) + "," + std::to_string(p.n_trees) + "," + format_double(p.error) + "," +
             std::to_string(p.evaluated) + "\n";
    }
  }
  write_text(dir / "oob.csv", oob);
}

EvalReport load_report(const std::filesystem::path& dir) {
  const auto path = dir / "report.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const auto j = nlohmann::json::parse(buf.str());
    if (j.at("format") != kReportFormat) throw FormatError("not a spoofguard report");
    if (j.at("version").get<int>() != kReportVersion) throw FormatError("unsupported report version");
    EvalReport r;
    // nlohmann::json sorts keys; re-read in file order from the ordered variant.
    const auto oj = ordered_json::parse(buf.str());
    for (const auto& [k, v] : oj.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    for (const auto& c : j.at("classifiers")) {
      ClassifierResult res;
      const auto kind = classify::parse_model_kind(c.at("model").get<std::string>());
      if (!kind) throw FormatError("unknown model in report");
      res.kind = *kind;
      res.counts.ffr_numerator = c.at("ffr_numerator").get<std::size_t>();
      res.counts.ffr_denominator = c.at("ffr_denominator").get<std::size_t>();
      res.counts.fgr_numerator = c.at("fgr_numerator").get<std::size_t>();
      res.counts.fgr_denominator = c.at("fgr_denominator").get<std::size_t>();
      const auto& folds = c.at("folds");
      for (std::size_t f = 0; f < 3 && f < folds.size(); ++f) {
        res.folds[f].ffr_numerator = folds[f].at("ffr_numerator").get<std::size_t>();
        res.folds[f].ffr_denominator = folds[f].at("ffr_denominator").get<std::size_t>();
        res.folds[f].fgr_numerator = folds[f].at("fgr_numerator").get<std::size_t>();
        res.folds[f].fgr_denominator = folds[f].at("fgr_denominator").get<std::size_t>();
      }
      r.classifiers.push_back(res);
    }
    if (j.contains("verification")) {
      const auto& v = j.at("verification");
      r.genuine_count = v.at("genuine_count").get<std::size_t>();
      r.spoof_count = v.at("spoof_count").get<std::size_t>();
      for (const auto& d : v.at("dropped_metrics")) {
        const auto id = iqm::parse_metric(d.get<std::string>());
        if (id) r.dropped_metrics.push_back(*id);
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace spoofguard::eval
