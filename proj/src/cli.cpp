#include "spoofguard/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "spoofguard/classify.hpp"
#include "spoofguard/degrade.hpp"
#include "spoofguard/error.hpp"
#include "spoofguard/eval.hpp"
#include "spoofguard/features.hpp"
#include "spoofguard/filters.hpp"
#include "spoofguard/imgio.hpp"
#include "spoofguard/iqm.hpp"
#include "spoofguard/manifest.hpp"
#include "spoofguard/parallel.hpp"
#include "spoofguard/tables.hpp"

namespace spoofguard::cli {

namespace {

namespace fs = std::filesystem;
using features::format_double;

std::uint64_t default_seed() {
  const char* env = std::getenv("SPOOFGUARD_SEED");
  if (!env || !*env) return 0;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("SPOOFGUARD_SEED must be an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

// 0 and "auto" select the hardware concurrency.
std::size_t parse_threads(const std::string& s) {
  if (s == "auto") return 0;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("--threads must be a non-negative integer or 'auto'");
  }
  return v;
}

template <typename T, typename Parse>
T parse_or_throw(const std::string& s, Parse parse, const std::string& what) {
  const auto v = parse(s);
  if (!v) throw ValidationError("unknown " + what + " '" + s + "'");
  return *v;
}

GrayImage load_working(const fs::path& path, bool resize) {
  GrayImage img = imgio::load_image(path);
  if (resize && (img.rows() != imgio::kWorkingRows || img.cols() != imgio::kWorkingCols)) {
    img = imgio::resize_bilinear(img, imgio::kWorkingRows, imgio::kWorkingCols);
  }
  return img;
}

std::string vector_text(const iqm::MetricValues& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out + "]";
}

/// Options shared by every command that extracts features.
struct FeatureOpts {
  double th = iqm::kDefaultTh;
  std::string preproc = "plain";
  std::string gms_variant = "mean-root";
  bool no_resize = false;

  void attach(CLI::App* app) {
    app->add_option("--th", th, "Gradient control parameter th")->check(CLI::PositiveNumber);
    app->add_option("--preproc", preproc, "plain | gradient-domain");
    app->add_option("--gms-variant", gms_variant, "mean-root | mean-root-pixelwise | similarity-ratio");
    app->add_flag("--no-resize", no_resize, "Keep input size instead of resizing to 400x300");
  }

  eval::ExtractConfig config(std::size_t threads) const {
    eval::ExtractConfig c;
    c.th = th;
    c.preproc = parse_or_throw<features::Preproc>(preproc, features::parse_preproc, "preprocessing");
    c.metrics.gms_variant = parse_or_throw<iqm::GmsVariant>(gms_variant, iqm::parse_gms_variant, "GMS variant");
    c.metrics.th = th;
    c.resize = !no_resize;
    c.threads = threads;
    return c;
  }
};

/// Classifier hyperparameters.
struct ModelOpts {
  int k = 3;
  int trees = 50;
  int max_features = 0;
  double c = 1.0;
  double gamma = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "k-NN neighbours (odd)");
    app->add_option("--trees", trees, "Random forest size");
    app->add_option("--max-features", max_features, "Features tried per split (0: floor(sqrt(d)))");
    app->add_option("--c", c, "SVM soft-margin C");
    app->add_option("--gamma", gamma, "RBF kernel gamma");
  }

  classify::ModelConfig config(std::uint64_t seed) const {
    classify::ModelConfig m;
    m.k = k;
    m.n_trees = trees;
    m.max_features = max_features;
    m.c = c;
    m.gamma = gamma;
    m.seed = seed;
    return m;
  }
};

std::vector<classify::ModelKind> parse_models(const std::string& list) {
  std::vector<classify::ModelKind> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "all") {
      out.assign(tables::kTableModels.begin(), tables::kTableModels.end());
      continue;
    }
    out.push_back(parse_or_throw<classify::ModelKind>(tok, classify::parse_model_kind, "model"));
  }
  if (out.empty()) throw ValidationError("no model given");
  return out;
}

std::optional<Degradation> parse_optional_degradation(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_or_throw<Degradation>(s, parse_degradation, "degradation");
}

void print_report_summary(const eval::EvalReport& r) {
  for (const auto& c : r.classifiers) {
    std::cout << classify::model_kind_name(c.kind) << ": FFR " << format_double(c.counts.ffr()) << "% ("
              << c.counts.ffr_numerator << "/" << c.counts.ffr_denominator << "), FGR "
              << format_double(c.counts.fgr()) << "% (" << c.counts.fgr_numerator << "/"
              << c.counts.fgr_denominator << "), HTER " << format_double(c.counts.hter()) << "%\n";
  }
  if (r.genuine_count > 0) {
    std::cout << "verification: " << r.genuine_count << " genuine, " << r.spoof_count << " spoof scores";
    if (!r.dropped_metrics.empty()) {
      std::cout << "; dropped";
      for (auto id : r.dropped_metrics) std::cout << " " << iqm::metric_column(id);
    }
    std::cout << "\n";
  }
}

int classify_error(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 2;
  return 1;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"spoofguard: image-quality based presentation attack detection for hand images"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string threads_text = "auto";
  app.add_option("--threads", threads_text, "Worker threads (0 or 'auto': all cores)");

  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "PRNG seed (default: $SPOOFGUARD_SEED or 0)")
        ->each([&](const std::string&) { seed_given = true; });
  };
  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic real hand images and their manifest");
  std::size_t synth_subjects = 10;
  fs::path synth_out;
  synth->add_option("--subjects", synth_subjects, "Number of subjects")->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_out, "Output directory")->required();
  add_seed(synth);
  synth->callback([&] {
    action = [&] {
      DatasetManifest m;
      const fs::path dir = synth_out / "reals";
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      m.entries.resize(synth_subjects * 3);
      parallel_for(synth_subjects, parse_threads(threads_text), [&](std::size_t i) {
        const std::string id = degrade::subject_id(i);
        for (int s = 1; s <= 3; ++s) {
          const fs::path rel = fs::path("reals") / (id + "_" + std::to_string(s) + ".pgm");
          imgio::save_image(degrade::synth_hand(degrade::subject_seed(seed, i), s), synth_out / rel);
          m.entries[i * 3 + static_cast<std::size_t>(s - 1)] = {id, s, Label::Real, Degradation::None, rel};
        }
      });
      m.base_dir = synth_out;
      save_manifest(m, synth_out / "manifest.csv");
      std::cout << "wrote " << m.entries.size() << " images and " << (synth_out / "manifest.csv").string()
                << "\n";
    };
  });

  // degrade
  auto* deg = app.add_subcommand("degrade", "Apply one degradation to an image");
  std::string deg_kind;
  double deg_strength = 0.0;
  fs::path deg_in, deg_out;
  deg->add_option("--kind", deg_kind, "reference-gaussian | gaussian-blur | salt-pepper | speckle")->required();
  deg->add_option("--strength", deg_strength, "Sigma, density or variance (0: default)");
  deg->add_option("--out", deg_out, "Output PGM")->required();
  deg->add_option("input", deg_in, "Input image")->required();
  add_seed(deg);
  deg->callback([&] {
    action = [&] {
      auto spec = degrade::DegradeSpec::with_defaults(
          parse_or_throw<degrade::DegradeKind>(deg_kind, degrade::parse_kind, "degradation kind"), seed);
      if (deg_strength != 0.0) spec.strength = deg_strength;
      imgio::save_image(degrade::degrade(imgio::load_image(deg_in), spec), deg_out);
    };
  });

  // build-fakes
  auto* fakes = app.add_subcommand("build-fakes", "Create fake samples for every real entry of a manifest");
  fs::path fakes_manifest, fakes_out;
  std::string fakes_kinds = "gaussian-blur,salt-pepper,speckle";
  fakes->add_option("--manifest", fakes_manifest, "Manifest of real samples")->required();
  fakes->add_option("--kinds", fakes_kinds, "Comma-separated attack kinds");
  fakes->add_option("--out", fakes_out, "Output directory")->required();
  add_seed(fakes);
  fakes->callback([&] {
    action = [&] {
      std::vector<degrade::DegradeSpec> specs;
      std::stringstream ss(fakes_kinds);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        specs.push_back(degrade::DegradeSpec::with_defaults(
            parse_or_throw<degrade::DegradeKind>(tok, degrade::parse_kind, "degradation kind"), seed));
      }
      const auto out = degrade::build_fake_dataset(load_manifest(fakes_manifest), specs, fakes_out);
      std::cout << "wrote " << (fakes_out / "manifest.csv").string() << " (" << out.entries.size()
                << " entries)\n";
    };
  });

  // extract
  auto* extract = app.add_subcommand("extract", "Extract quality features for manifest entries");
  fs::path ex_manifest, ex_out;
  std::string ex_degradation;
  FeatureOpts ex_feat;
  extract->add_option("--manifest", ex_manifest, "Dataset manifest")->required();
  extract->add_option("--degradation", ex_degradation, "Keep reals plus fakes of this degradation");
  extract->add_option("--out", ex_out, "Features CSV")->required();
  ex_feat.attach(extract);
  extract->callback([&] {
    action = [&] {
      const DatasetManifest m = load_manifest(ex_manifest);
      m.validate();
      const auto kind = parse_optional_degradation(ex_degradation);
      auto keep = [&](const ManifestEntry& e) { return !kind || e.label == Label::Real || e.degradation == *kind; };
      std::set<std::tuple<std::string, int, Label>> keys;
      for (const auto& e : m.entries) {
        if (keep(e) && !keys.emplace(e.subject, e.sample, e.label).second) {
          throw ValidationError("manifest has several fakes per sample; choose one with --degradation");
        }
      }
      auto records = eval::extract_manifest(m, ex_feat.config(parse_threads(threads_text)), keep);
      std::vector<features::FeatureRecord> kept;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (keep(m.entries[i])) kept.push_back(std::move(records[i]));
      }
      features::save_features_csv(kept, ex_out);
      std::cout << "wrote " << kept.size() << " feature rows to " << ex_out.string() << "\n";
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Train a classifier on a features CSV");
  fs::path tr_features, tr_out;
  std::string tr_model = "knn", tr_subset = "all";
  ModelOpts tr_opts;
  train->add_option("--features", tr_features, "Features CSV")->required();
  train->add_option("--model", tr_model, "knn | rf | svm-linear | svm-rbf");
  train->add_option("--subset", tr_subset, "Metric subset, e.g. c,i,j or all");
  train->add_option("--out", tr_out, "Model JSON")->required();
  tr_opts.attach(train);
  add_seed(train);
  train->callback([&] {
    action = [&] {
      const auto records = features::load_features_csv(tr_features);
      const auto subset = features::parse_subset(tr_subset);
      auto mc = tr_opts.config(seed);
      mc.kind = parse_or_throw<classify::ModelKind>(tr_model, classify::parse_model_kind, "model");
      const auto data = features::select_metrics(features::to_matrix(records), subset);
      const auto model = classify::train(data, mc);
      classify::save_model(model, tr_out);
      std::cout << "trained " << classify::model_kind_name(model.kind) << " on " << data.rows.size()
                << " rows; wrote " << tr_out.string() << "\n";
    };
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Classify images or feature rows with a trained model");
  fs::path pr_model, pr_features;
  std::vector<fs::path> pr_images;
  FeatureOpts pr_feat;
  predict->add_option("--model", pr_model, "Model JSON")->required();
  predict->add_option("--features", pr_features, "Features CSV to classify");
  predict->add_option("images", pr_images, "Images to classify");
  pr_feat.attach(predict);
  predict->callback([&] {
    action = [&] {
      const auto model = classify::load_model(pr_model);
      if (!pr_features.empty()) {
        for (const auto& r : features::load_features_csv(pr_features)) {
          std::cout << r.subject << "," << r.sample << "," << label_name(model.predict(r.q)) << "\n";
        }
      }
      const auto cfg = pr_feat.config(1);
      for (const auto& p : pr_images) {
        const auto q = features::quality_features(load_working(p, cfg.resize), cfg.th, cfg.preproc, cfg.metrics);
        std::cout << p.string() << "," << label_name(model.predict(q)) << "\n";
      }
      if (pr_features.empty() && pr_images.empty()) throw ValidationError("nothing to predict");
    };
  });

  // eval and verify share most options
  fs::path ev_manifest, ev_out;
  std::string ev_models = "knn", ev_subset = "all", ev_degradation, ev_gar = "paper";
  bool ev_no_verify = false;
  FeatureOpts ev_feat;
  ModelOpts ev_opts;
  auto* evalc = app.add_subcommand("eval", "Three-fold evaluation with FFR/FGR/HTER and verification ROC");
  evalc->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
  evalc->add_option("--model", ev_models, "Comma-separated models, or all");
  evalc->add_option("--subset", ev_subset, "Metric subset, e.g. c,i,j or all");
  evalc->add_option("--degradation", ev_degradation, "Fake degradation to evaluate");
  evalc->add_option("--gar-convention", ev_gar, "paper (1 - FAR) | standard (1 - FRR)");
  evalc->add_flag("--no-verify", ev_no_verify, "Skip the verification ROC");
  evalc->add_option("--out", ev_out, "Report directory")->required();
  ev_feat.attach(evalc);
  ev_opts.attach(evalc);
  add_seed(evalc);

  auto* verify = app.add_subcommand("verify", "Verification scores, ROC and histograms only");
  verify->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
  verify->add_option("--subset", ev_subset, "Metric subset");
  verify->add_option("--degradation", ev_degradation, "Fake degradation used as spoof probes");
  verify->add_option("--gar-convention", ev_gar, "paper (1 - FAR) | standard (1 - FRR)");
  verify->add_option("--out", ev_out, "Report directory")->required();
  ev_feat.attach(verify);

  auto run_eval = [&](bool classifiers) {
    eval::EvalConfig cfg;
    cfg.models = classifiers ? parse_models(ev_models) : std::vector<classify::ModelKind>{};
    cfg.model = ev_opts.config(seed);
    cfg.subset = features::parse_subset(ev_subset);
    cfg.extract = ev_feat.config(parse_threads(threads_text));
    cfg.degradation = parse_optional_degradation(ev_degradation);
    cfg.verification = !classifiers || !ev_no_verify;
    cfg.gar = parse_or_throw<eval::GarConvention>(ev_gar, eval::parse_gar_convention, "GAR convention");
    const auto report = eval::evaluate(load_manifest(ev_manifest), cfg);
    eval::emit_report(report, ev_out);
    print_report_summary(report);
  };
  evalc->callback([&] { action = [&] { run_eval(true); }; });
  verify->callback([&] { action = [&] { run_eval(false); }; });

  // gradmap
  auto* gradmap = app.add_subcommand("gradmap", "Write binary thresholded-gradient maps for th = 2^p");
  fs::path gm_in, gm_out;
  std::vector<int> gm_powers = {1, 2, 3, 4, 5};
  bool gm_no_resize = false;
  gradmap->add_option("input", gm_in, "Input image")->required();
  gradmap->add_option("--out", gm_out, "Output directory")->required();
  gradmap->add_option("--powers", gm_powers, "Exponents p of th = 2^p");
  gradmap->add_flag("--no-resize", gm_no_resize, "Keep input size");
  gradmap->callback([&] {
    action = [&] {
      const GrayImage img = load_working(gm_in, !gm_no_resize);
      std::error_code ec;
      fs::create_directories(gm_out, ec);
      if (ec) throw IoError("cannot create " + gm_out.string() + ": " + ec.message());
      for (int p : gm_powers) {
        if (p < 0 || p > 16) throw ValidationError("--powers must lie in 0..16");
        const double th = static_cast<double>(1 << p);
        const BinaryImage bits = filters::binarize_gradient(filters::thresholded_gradients(img, th));
        std::vector<double> px(bits.size());
        for (std::size_t r = 0; r < bits.rows(); ++r) {
          for (std::size_t c = 0; c < bits.cols(); ++c) px[r * bits.cols() + c] = bits(r, c) ? 255.0 : 0.0;
        }
        const fs::path out = gm_out / ("gradmap_th" + std::to_string(1 << p) + ".pgm");
        imgio::save_image(GrayImage(bits.rows(), bits.cols(), std::move(px)), out);
        std::cout << out.string() << " " << bits.count() << " pixels set\n";
      }
    };
  });

  // metric / metrics-all
  auto* metric = app.add_subcommand("metric", "One quality metric between a reference and a distorted image");
  std::string me_name;
  fs::path me_ref, me_dist;
  FeatureOpts me_feat;
  metric->add_option("--metric", me_name, "Metric letter or name, e.g. j or gms")->required();
  metric->add_option("reference", me_ref, "Reference image")->required();
  metric->add_option("distorted", me_dist, "Distorted image")->required();
  me_feat.attach(metric);
  metric->callback([&] {
    action = [&] {
      const auto cfg = me_feat.config(1);
      const auto id = parse_or_throw<iqm::MetricId>(me_name, iqm::parse_metric, "metric");
      std::cout << format_double(iqm::compute_metric(id, load_working(me_ref, cfg.resize),
                                                     load_working(me_dist, cfg.resize), cfg.metrics))
                << "\n";
    };
  });

  auto* all = app.add_subcommand("metrics-all", "All ten quality metrics between two images, order a..j");
  all->add_option("reference", me_ref, "Reference image")->required();
  all->add_option("distorted", me_dist, "Distorted image")->required();
  me_feat.attach(all);
  all->callback([&] {
    action = [&] {
      const auto cfg = me_feat.config(1);
      const auto q = features::paired_features(load_working(me_ref, cfg.resize), load_working(me_dist, cfg.resize),
                                               cfg.th, cfg.preproc, cfg.metrics);
      std::cout << vector_text(q.values) << "\n";
    };
  });

  // report
  auto* report = app.add_subcommand("report", "Summarize a report directory written by eval");
  fs::path rp_dir;
  report->add_option("dir", rp_dir, "Report directory")->required();
  report->callback([&] {
    action = [&] {
      const auto r = eval::load_report(rp_dir);
      for (const auto& [k, v] : r.config) std::cout << k << "=" << v << "\n";
      print_report_summary(r);
    };
  });

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "Regenerate the table CSVs on the synthetic corpus");
  tables::ReproduceConfig rc;
  std::string rp_kind = "gaussian-blur";
  fs::path rp_out;
  ModelOpts rp_opts;
  repro->add_option("--subjects", rc.subjects, "Subjects in the per-metric corpus")->check(CLI::PositiveNumber);
  repro->add_option("--noise-subjects", rc.noise_subjects, "Subjects in the per-noise corpus")
      ->check(CLI::PositiveNumber);
  repro->add_option("--kind", rp_kind, "Attack used for the per-metric tables");
  repro->add_option("--strength", rc.strength, "Attack strength (0: default)");
  repro->add_option("--out", rp_out, "Output directory")->required();
  rp_opts.attach(repro);
  add_seed(repro);
  repro->callback([&] {
    action = [&] {
      rc.seed = seed;
      rc.kind = parse_or_throw<degrade::DegradeKind>(rp_kind, degrade::parse_kind, "degradation kind");
      rc.model = rp_opts.config(seed);
      rc.threads = parse_threads(threads_text);
      tables::reproduce_tables(rc, rp_out);
      std::cout << "wrote tables to " << rp_out.string() << "\n";
    };
  });

  try {
    seed = default_seed();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify_error(e);
  }
  (void)seed_given;

  try {
    parse_threads(threads_text);
    if (action) action();
    return 0;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) c = c == '\n' ? ' ' : c;
    std::cerr << "error: " << msg << "\n";
    return classify_error(e);
  }
}

}  // namespace spoofguard::cli
