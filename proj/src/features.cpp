#include "spoofguard/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spoofguard/error.hpp"
#include "spoofguard/filters.hpp"

namespace spoofguard::features {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

QualityVector difference_features(const GrayImage& ref, const GrayImage& dist, double th,
                                  Preproc preproc, iqm::MetricConfig config) {
  config.th = th;
  QualityVector q;
  q.th_used = th;
  q.preproc = Preproc::Plain;
  q.values = iqm::compute_all(ref, dist, config);
  if (preproc == Preproc::GradientDomain) apply_gradient_domain(q, ref, dist, config);
  return q;
}

}  // namespace

void apply_gradient_domain(QualityVector& q, const GrayImage& ref, const GrayImage& dist,
                           const iqm::MetricConfig& config) {
  iqm::MetricConfig c = config;
  c.th = q.th_used;
  const GrayImage gref = filters::gradient_sum_image(filters::thresholded_gradients(ref, c.th));
  const GrayImage gdist = filters::gradient_sum_image(filters::thresholded_gradients(dist, c.th));
  for (iqm::MetricId id : kGradientDomainMetrics) {
    double v;
    if (id == iqm::MetricId::Sc && gref == gdist) {
      v = 1.0;  // both flat: identical gradient images
    } else {
      v = iqm::compute_metric(id, gref, gdist, c);
    }
    q.values[iqm::metric_index(id)] = v;
  }
  q.preproc = Preproc::GradientDomain;
}

std::string_view preproc_name(Preproc p) { return p == Preproc::Plain ? "plain" : "gradient-domain"; }

std::optional<Preproc> parse_preproc(std::string_view s) {
  if (s == "plain") return Preproc::Plain;
  if (s == "gradient-domain" || s == "gradient") return Preproc::GradientDomain;
  return std::nullopt;
}

QualityVector quality_features(const GrayImage& img, double th, Preproc preproc,
                               const iqm::MetricConfig& config) {
  return difference_features(img, filters::gaussian3x3(img), th, preproc, config);
}

QualityVector paired_features(const GrayImage& ref, const GrayImage& probe, double th,
                              Preproc preproc, const iqm::MetricConfig& config) {
  return difference_features(ref, probe, th, preproc, config);
}

double MinMax::apply(std::size_t column, double v) const {
  const double lo = min[column], hi = max[column];
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

std::vector<double> MinMax::apply(std::span<const double> row) const {
  if (row.size() != min.size()) {
    throw DimensionError("feature row has " + std::to_string(row.size()) + " values, normalizer expects " +
                         std::to_string(min.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = apply(i, row[i]);
  return out;
}

FeatureMatrix to_matrix(std::span<const FeatureRecord> records) {
  FeatureMatrix m;
  m.columns.assign(iqm::kAllMetrics.begin(), iqm::kAllMetrics.end());
  m.rows.reserve(records.size());
  for (const auto& r : records) {
    m.rows.push_back({std::vector<double>(r.q.values.begin(), r.q.values.end()), r.label, r.subject,
                      r.sample});
  }
  return m;
}

MinMax fit_minmax(const FeatureMatrix& train) {
  if (train.rows.size() < 2) throw ValidationError("min-max fit needs at least 2 training rows");
  MinMax norm;
  norm.min = train.rows.front().values;
  norm.max = train.rows.front().values;
  for (const auto& row : train.rows) {
    if (row.values.size() != train.width()) throw DimensionError("ragged feature matrix");
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      norm.min[c] = std::min(norm.min[c], row.values[c]);
      norm.max[c] = std::max(norm.max[c], row.values[c]);
    }
  }
  return norm;
}

FeatureMatrix normalize(const FeatureMatrix& m, const MinMax& norm) {
  FeatureMatrix out = m;
  for (auto& row : out.rows) row.values = norm.apply(row.values);
  return out;
}

FeatureMatrix select_metrics(const FeatureMatrix& m, std::span<const iqm::MetricId> subset) {
  if (subset.empty()) throw ValidationError("metric subset is empty");
  std::vector<std::size_t> idx;
  for (iqm::MetricId id : subset) {
    const auto it = std::find(m.columns.begin(), m.columns.end(), id);
    if (it == m.columns.end()) {
      throw ValidationError("metric " + iqm::metric_column(id) + " not present in feature matrix");
    }
    idx.push_back(static_cast<std::size_t>(it - m.columns.begin()));
  }
  FeatureMatrix out;
  out.columns.assign(subset.begin(), subset.end());
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    FeatureRow r{{}, row.label, row.subject, row.sample};
    r.values.reserve(idx.size());
    for (std::size_t i : idx) r.values.push_back(row.values[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<iqm::MetricId> parse_subset(std::string_view list) {
  if (list == "all") return {iqm::kAllMetrics.begin(), iqm::kAllMetrics.end()};
  std::vector<iqm::MetricId> out;
  for (std::string_view tok : split(list, ',')) {
    if (tok.empty()) continue;
    const auto id = iqm::parse_metric(tok);
    if (!id) throw ValidationError("unknown metric id '" + std::string(tok) + "'");
    out.push_back(*id);
  }
  if (out.empty()) throw ValidationError("metric subset is empty");
  return out;
}

std::string format_subset(std::span<const iqm::MetricId> subset) {
  std::string out;
  for (iqm::MetricId id : subset) {
    if (!out.empty()) out += ',';
    out += iqm::metric_letter(id);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string features_header() {
  std::string h = "subject,sample,label,preproc,th";
  for (iqm::MetricId id : iqm::kAllMetrics) h += "," + iqm::metric_column(id);
  return h;
}

std::string format_features_csv(std::span<const FeatureRecord> records) {
  std::string out = features_header() + "\n";
  for (const auto& r : records) {
    out += r.subject + "," + std::to_string(r.sample) + "," + std::string(label_name(r.label)) + "," +
           std::string(preproc_name(r.q.preproc)) + "," + format_double(r.q.th_used);
    for (double v : r.q.values) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::vector<FeatureRecord> parse_features_csv(std::string_view text) {
  std::vector<FeatureRecord> out;
  bool header = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    while (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != features_header()) throw FormatError("unexpected features CSV header");
      header = true;
      continue;
    }
    const std::string where = "features line " + std::to_string(line_no);
    const auto f = split(line, ',');
    if (f.size() != 5 + iqm::kMetricCount) throw FormatError(where + ": wrong field count");
    FeatureRecord r;
    r.subject = std::string(f[0]);
    r.sample = static_cast<int>(parse_double(f[1], where));
    const auto label = parse_label(f[2]);
    if (!label) throw FormatError(where + ": bad label");
    r.label = *label;
    const auto pre = parse_preproc(f[3]);
    if (!pre) throw FormatError(where + ": bad preproc");
    r.q.preproc = *pre;
    r.q.th_used = parse_double(f[4], where);
    for (std::size_t i = 0; i < iqm::kMetricCount; ++i) {
      r.q.values[i] = parse_double(f[5 + i], where);
      if (!std::isfinite(r.q.values[i])) throw FormatError(where + ": non-finite feature");
    }
    out.push_back(std::move(r));
  }
  if (!header) throw FormatError("features CSV is empty");
  return out;
}

void save_features_csv(std::span<const FeatureRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_features_csv(records);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<FeatureRecord> load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_features_csv(buf.str());
}

}  // namespace spoofguard::features
