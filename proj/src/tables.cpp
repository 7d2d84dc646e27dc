#include "spoofguard/tables.hpp"

#include <cstdio>
#include <fstream>

#include "spoofguard/error.hpp"
#include "spoofguard/filters.hpp"
#include "spoofguard/parallel.hpp"

namespace spoofguard::tables {

namespace {

using features::FeatureMatrix;
using iqm::MetricId;

features::FeatureRow make_row(const features::QualityVector& q, const ManifestEntry& e) {
  return {std::vector<double>(q.values.begin(), q.values.end()), e.label, e.subject, e.sample};
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string model_columns() {
  std::string out;
  for (auto k : kTableModels) {
    std::string name(classify::model_kind_name(k));
    for (char& c : name) c = c == '-' ? '_' : c;
    for (const char* m : {"_ffr", "_fgr", "_hter"}) out += "," + name + m;
  }
  return out;
}

std::string row_cells(const TableRow& row) {
  std::string out;
  for (const auto& c : row) out += "," + pct(c.ffr()) + "," + pct(c.fgr()) + "," + pct(c.hter());
  return out;
}

std::string subset_label(std::span<const MetricId> ids) {
  std::string out;
  for (auto id : ids) out += (out.empty() ? "" : "+") + std::string(iqm::metric_name(id));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

SyntheticCorpus synthesize_corpus(const CorpusSpec& spec) {
  if (spec.subjects == 0) throw ValidationError("corpus needs at least one subject");
  for (const auto& k : spec.kinds) {
    k.validate();
    if (!degrade::as_degradation(k.kind)) throw ValidationError("reference-gaussian is not an attack kind");
  }
  const std::size_t per_sample = 1 + spec.kinds.size();
  const std::size_t per_subject = 3 * per_sample;
  const std::size_t n = spec.subjects * per_subject;

  SyntheticCorpus corpus;
  corpus.manifest.entries.resize(n);
  corpus.plain.columns.assign(iqm::kAllMetrics.begin(), iqm::kAllMetrics.end());
  corpus.plain.rows.resize(n);
  if (spec.gradient_domain) {
    corpus.gradient.columns = corpus.plain.columns;
    corpus.gradient.rows.resize(n);
  }
  if (spec.gms_sweep) corpus.gms_sweep.resize(n);

  parallel_for(spec.subjects, spec.threads, [&](std::size_t i) {
    const std::string subject = degrade::subject_id(i);
    const std::uint64_t sseed = degrade::subject_seed(spec.seed, i);
    for (int s = 1; s <= 3; ++s) {
      const GrayImage real = degrade::synth_hand(sseed, s);
      std::size_t slot = i * per_subject + static_cast<std::size_t>(s - 1) * per_sample;
      auto fill = [&](const GrayImage& img, ManifestEntry entry) {
        const GrayImage blurred = filters::gaussian3x3(img);
        iqm::MetricConfig mc = spec.metrics;
        mc.th = spec.th;
        features::QualityVector q;
        q.th_used = spec.th;
        q.values = iqm::compute_all(img, blurred, mc);
        corpus.plain.rows[slot] = make_row(q, entry);
        if (spec.gradient_domain) {
          features::apply_gradient_domain(q, img, blurred, mc);
          corpus.gradient.rows[slot] = make_row(q, entry);
        }
        if (spec.gms_sweep) {
          for (std::size_t v = 0; v < kSweepVariants.size(); ++v) {
            for (std::size_t p = 0; p < kThSweep.size(); ++p) {
              corpus.gms_sweep[slot][v][p] = iqm::gms(img, blurred, kThSweep[p], kSweepVariants[v]);
            }
          }
        }
        corpus.manifest.entries[slot] = std::move(entry);
        ++slot;
      };
      fill(real, {subject, s, Label::Real, Degradation::None,
                  std::filesystem::path("synthetic") / (subject + "_" + std::to_string(s) + ".pgm")});
      for (const auto& k : spec.kinds) {
        degrade::DegradeSpec ds = k;
        ds.seed = degrade::sample_seed(spec.seed, subject, s, k.kind);
        const GrayImage fake = quantize(degrade::degrade(real, ds));
        fill(fake, {subject, s, Label::Fake, *degrade::as_degradation(k.kind),
                    std::filesystem::path("synthetic") / std::string(degrade::kind_name(k.kind)) /
                        (subject + "_" + std::to_string(s) + ".pgm")});
      }
    }
  });
  return corpus;
}

TableRow run_models(const SyntheticCorpus& corpus, const FeatureMatrix& data, std::span<const MetricId> columns,
                    Degradation kind, const classify::ModelConfig& base, std::size_t threads) {
  const eval::Rotation rotation = eval::split_rotation(corpus.manifest, kind);
  const FeatureMatrix projected = features::select_metrics(data, columns);
  TableRow row;
  for (std::size_t m = 0; m < kTableModels.size(); ++m) {
    classify::ModelConfig mc = base;
    mc.kind = kTableModels[m];
    for (const auto& f : eval::cross_validate_model(projected, rotation, mc, threads)) row[m] += f.counts;
  }
  return row;
}

std::string config_line(const ReproduceConfig& c) {
  return "# seed=" + std::to_string(c.seed) + " subjects=" + std::to_string(c.subjects) +
         " noise_subjects=" + std::to_string(c.noise_subjects) + " kind=" +
         std::string(degrade::kind_name(c.kind)) + " strength=" +
         (c.strength > 0.0 ? features::format_double(c.strength) : std::string("default")) + " th=8 k=" + std::to_string(c.model.k) +
         " n_trees=" + std::to_string(c.model.n_trees) + " svm_c=" + features::format_double(c.model.c) +
         " svm_gamma=" + features::format_double(c.model.gamma) + "\n";
}

void reproduce_tables(const ReproduceConfig& config, const std::filesystem::path& out_dir) {
  const auto deg = degrade::as_degradation(config.kind);
  if (!deg) throw ValidationError("reference-gaussian is not an attack kind");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const std::string header = config_line(config);
  const std::string cols = model_columns();

  CorpusSpec spec;
  spec.subjects = config.subjects;
  spec.seed = config.seed;
  degrade::DegradeSpec attack = degrade::DegradeSpec::with_defaults(config.kind);
  if (config.strength > 0.0) attack.strength = config.strength;
  spec.kinds = {attack};
  spec.gradient_domain = true;
  spec.gms_sweep = true;
  spec.threads = config.threads;
  const SyntheticCorpus corpus = synthesize_corpus(spec);
  auto run = [&](const FeatureMatrix& data, std::span<const MetricId> ids) {
    return run_models(corpus, data, ids, *deg, config.model, config.threads);
  };

  // Per-metric errors.
  std::string t3 = header + "metric" + cols + "\n";
  for (MetricId id : iqm::kAllMetrics) {
    const std::array<MetricId, 1> one = {id};
    t3 += iqm::metric_column(id) + row_cells(run(corpus.plain, one)) + "\n";
  }
  write_file(out_dir / "table3_metrics.csv", t3);

  // Threshold sweep: one single-column matrix per (variant, th).
  std::string t4 = header + "variant,th" + cols + "\n";
  for (std::size_t v = 0; v < kSweepVariants.size(); ++v) {
    for (std::size_t p = 0; p < kThSweep.size(); ++p) {
      FeatureMatrix m;
      m.columns = {MetricId::Gms};
      m.rows.reserve(corpus.plain.rows.size());
      for (std::size_t i = 0; i < corpus.plain.rows.size(); ++i) {
        features::FeatureRow r = corpus.plain.rows[i];
        r.values = {corpus.gms_sweep[i][v][p]};
        m.rows.push_back(std::move(r));
      }
      const std::array<MetricId, 1> one = {MetricId::Gms};
      t4 += std::string(iqm::gms_variant_name(kSweepVariants[v])) + "," + features::format_double(kThSweep[p]) +
            row_cells(run(m, one)) + "\n";
    }
  }
  write_file(out_dir / "table4_th_sweep.csv", t4);

  // GMS combined with other metrics.
  using M = MetricId;
  const std::vector<std::vector<MetricId>> combos = {
      {M::Psnr, M::Gms},          {M::Sc, M::Gms},
      {M::Ssim, M::Gms},          {M::Essim, M::Gms},
      {M::Wash, M::Gms},          {M::Sc, M::Ssim, M::Gms},
      {M::Sc, M::Essim, M::Gms},  {M::Sc, M::Wash, M::Gms},
      {M::Sc, M::Essim, M::Wash, M::Gms},
      std::vector<MetricId>(iqm::kAllMetrics.begin(), iqm::kAllMetrics.end()),
  };
  std::string tc = header + "metrics" + cols + "\n";
  for (const auto& c : combos) tc += subset_label(c) + row_cells(run(corpus.plain, c)) + "\n";
  write_file(out_dir / "table4_combinations.csv", tc);

  // Plain versus gradient-domain preprocessing.
  std::string t5 = header + "metric,preproc" + cols + "\n";
  for (MetricId id : features::kGradientDomainMetrics) {
    const std::array<MetricId, 1> one = {id};
    t5 += iqm::metric_column(id) + ",plain" + row_cells(run(corpus.plain, one)) + "\n";
    t5 += iqm::metric_column(id) + ",gradient-domain" + row_cells(run(corpus.gradient, one)) + "\n";
  }
  write_file(out_dir / "table5_preproc.csv", t5);

  // Per-noise results on the larger corpus.
  CorpusSpec noise;
  noise.subjects = config.noise_subjects;
  noise.seed = config.seed;
  noise.kinds = {degrade::DegradeSpec::with_defaults(degrade::DegradeKind::GaussianBlur),
                 degrade::DegradeSpec::with_defaults(degrade::DegradeKind::SaltPepper),
                 degrade::DegradeSpec::with_defaults(degrade::DegradeKind::Speckle)};
  noise.threads = config.threads;
  const SyntheticCorpus nc = synthesize_corpus(noise);
  const std::array<MetricId, 1> gms_only = {MetricId::Gms};
  std::string t6 = header + "noise,metrics" + cols + "\n";
  for (const auto& k : noise.kinds) {
    const Degradation d = *degrade::as_degradation(k.kind);
    const std::string name(degrade::kind_name(k.kind));
    t6 += name + ",gms" + row_cells(run_models(nc, nc.plain, gms_only, d, config.model, config.threads)) + "\n";
    t6 += name + ",all" +
          row_cells(run_models(nc, nc.plain, iqm::kAllMetrics, d, config.model, config.threads)) + "\n";
  }
  write_file(out_dir / "table6_noise.csv", t6);
}

}  // namespace spoofguard::tables
