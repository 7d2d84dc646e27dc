#include "spoofguard/degrade.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "spoofguard/error.hpp"
#include "spoofguard/filters.hpp"
#include "spoofguard/imgio.hpp"
#include "spoofguard/rng.hpp"

namespace spoofguard::degrade {

namespace {

constexpr std::array<std::string_view, 4> kKindNames = {"reference-gaussian", "gaussian-blur",
                                                        "salt-pepper", "speckle"};

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

double lerp(double lo, double hi, double u) { return lo + (hi - lo) * u; }

struct Capsule {
  double r0, c0, r1, c1, radius;

  double distance(double r, double c) const {
    const double dr = r1 - r0, dc = c1 - c0;
    const double len2 = dr * dr + dc * dc;
    double t = len2 > 0.0 ? ((r - r0) * dr + (c - c0) * dc) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double pr = r0 + t * dr - r, pc = c0 + t * dc - c;
    return std::sqrt(pr * pr + pc * pc) - radius;
  }
};

struct Wave {
  double fr, fc, phase, amp;
  double at(double r, double c) const { return amp * std::sin(fr * r + fc * c + phase); }
};

// Subject-level geometry and appearance. Everything here is drawn from the
// subject stream only, so it is identical across a subject's samples.
struct HandModel {
  double palm_r, palm_c, palm_ry, palm_rx;
  std::array<Capsule, 6> parts;  // four fingers, thumb, wrist
  double skin, background, skin_noise, bg_noise;
  std::array<Wave, 3> shading;
  std::array<Wave, 2> backdrop;

  explicit HandModel(std::uint64_t subject) {
    SplitMix64 g(derive_seed(subject, 0));
    palm_r = lerp(255, 280, g.uniform());
    palm_c = lerp(138, 162, g.uniform());
    palm_ry = lerp(68, 88, g.uniform());
    palm_rx = lerp(60, 78, g.uniform());
    const double scale = lerp(0.85, 1.15, g.uniform());

    // Finger bases sit on the upper rim of the palm ellipse.
    constexpr std::array<double, 4> kBaseAngle = {-38, -13, 12, 36};
    constexpr std::array<double, 4> kLength = {88, 118, 108, 82};
    for (std::size_t f = 0; f < 4; ++f) {
      const double phi = deg2rad(kBaseAngle[f] + lerp(-4, 4, g.uniform()));
      const double br = palm_r - 0.88 * palm_ry * std::cos(phi);
      const double bc = palm_c + 0.88 * palm_rx * std::sin(phi);
      const double theta = deg2rad(kBaseAngle[f] * 0.55 + lerp(-5, 5, g.uniform()));
      const double len = kLength[f] * scale * lerp(0.9, 1.1, g.uniform());
      parts[f] = {br, bc, br - len * std::cos(theta), bc + len * std::sin(theta),
                  lerp(6.5, 9.5, g.uniform())};
    }
    const double phi_t = deg2rad(lerp(72, 92, g.uniform()));
    const double br = palm_r - 0.8 * palm_ry * std::cos(phi_t);
    const double bc = palm_c + 0.8 * palm_rx * std::sin(phi_t);
    const double theta_t = deg2rad(lerp(42, 62, g.uniform()));
    const double len_t = 78 * scale * lerp(0.9, 1.1, g.uniform());
    parts[4] = {br, bc, br - len_t * std::cos(theta_t), bc + len_t * std::sin(theta_t),
                lerp(8.5, 11.0, g.uniform())};
    parts[5] = {palm_r, palm_c, palm_r + 220.0, palm_c + lerp(-10, 10, g.uniform()),
                palm_rx * lerp(0.7, 0.8, g.uniform())};

    skin = lerp(150, 200, g.uniform());
    background = lerp(25, 65, g.uniform());
    skin_noise = lerp(5.0, 9.0, g.uniform());
    bg_noise = lerp(2.0, 4.0, g.uniform());
    for (auto& w : shading) {
      const double dir = lerp(0, 2 * std::numbers::pi, g.uniform());
      const double freq = lerp(0.02, 0.07, g.uniform());
      w = {freq * std::cos(dir), freq * std::sin(dir), lerp(0, 2 * std::numbers::pi, g.uniform()),
           lerp(3, 8, g.uniform())};
    }
    for (auto& w : backdrop) {
      const double dir = lerp(0, 2 * std::numbers::pi, g.uniform());
      const double freq = lerp(0.05, 0.15, g.uniform());
      w = {freq * std::cos(dir), freq * std::sin(dir), lerp(0, 2 * std::numbers::pi, g.uniform()),
           lerp(2, 5, g.uniform())};
    }
  }

  double signed_distance(double r, double c) const {
    const double er = (r - palm_r) / palm_ry, ec = (c - palm_c) / palm_rx;
    double d = (std::sqrt(er * er + ec * ec) - 1.0) * std::min(palm_ry, palm_rx);
    for (const auto& p : parts) d = std::min(d, p.distance(r, c));
    return d;
  }
};

// Symmetric triangular noise in [-1, 1] keyed by (stream, pixel).
double pixel_noise(std::uint64_t stream, std::size_t index) {
  const std::uint64_t h = mix64(stream ^ mix64(index + kGolden));
  const double u1 = static_cast<double>(h >> 40) * 0x1.0p-24;
  const double u2 = static_cast<double>(h & 0xFFFFFFULL) * 0x1.0p-24;
  return u1 + u2 - 1.0;
}

}  // namespace

std::string_view kind_name(DegradeKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<DegradeKind> parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) return static_cast<DegradeKind>(i);
  }
  return std::nullopt;
}

std::optional<Degradation> as_degradation(DegradeKind k) {
  switch (k) {
    case DegradeKind::GaussianBlur: return Degradation::GaussianBlur;
    case DegradeKind::SaltPepper: return Degradation::SaltPepper;
    case DegradeKind::Speckle: return Degradation::Speckle;
    case DegradeKind::ReferenceGaussian: return std::nullopt;
  }
  return std::nullopt;
}

DegradeSpec DegradeSpec::with_defaults(DegradeKind kind, std::uint64_t seed) {
  switch (kind) {
    case DegradeKind::GaussianBlur: return {kind, kDefaultBlurSigma, seed};
    case DegradeKind::SaltPepper: return {kind, kDefaultSaltPepperDensity, seed};
    case DegradeKind::Speckle: return {kind, kDefaultSpeckleVariance, seed};
    case DegradeKind::ReferenceGaussian: return {kind, 0.5, seed};
  }
  return {kind, 0.0, seed};
}

void DegradeSpec::validate() const {
  const std::string name(kind_name(kind));
  switch (kind) {
    case DegradeKind::ReferenceGaussian: return;
    case DegradeKind::GaussianBlur:
    case DegradeKind::Speckle:
      if (!(strength > 0.0) || !std::isfinite(strength)) {
        throw ParameterError(name + " strength must be > 0");
      }
      return;
    case DegradeKind::SaltPepper:
      if (!(strength > 0.0 && strength < 1.0)) {
        throw ParameterError("salt-pepper density must lie in (0, 1)");
      }
      return;
  }
}

GrayImage degrade(const GrayImage& img, const DegradeSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DegradeKind::ReferenceGaussian: return filters::gaussian3x3(img);
    case DegradeKind::GaussianBlur: return filters::gaussian_blur(img, spec.strength);
    case DegradeKind::SaltPepper: {
      SplitMix64 g(spec.seed);
      std::vector<double> px(img.pixels().begin(), img.pixels().end());
      const double half = spec.strength / 2.0;
      for (double& v : px) {
        const double u = g.uniform();
        if (u < half) {
          v = 0.0;
        } else if (u < spec.strength) {
          v = 255.0;
        }
      }
      return GrayImage(img.rows(), img.cols(), std::move(px));
    }
    case DegradeKind::Speckle: {
      SplitMix64 g(spec.seed);
      const double sd = std::sqrt(spec.strength);
      std::vector<double> px(img.pixels().begin(), img.pixels().end());
      for (double& v : px) {
        const double n = sd * g.normal();
        v = std::min(255.0, std::max(0.0, v * (1.0 + n)));
      }
      return GrayImage(img.rows(), img.cols(), std::move(px));
    }
  }
  throw ParameterError("unknown degradation kind");
}

std::uint64_t sample_seed(std::uint64_t base, std::string_view subject, int sample, DegradeKind kind) {
  std::uint64_t s = derive_seed(base, fnv1a(subject));
  s = derive_seed(s, static_cast<std::uint64_t>(sample));
  return derive_seed(s, static_cast<std::uint64_t>(kind) + 1);
}

GrayImage synth_hand(std::uint64_t subject, int sample_index) {
  constexpr std::size_t kRows = imgio::kWorkingRows;
  constexpr std::size_t kCols = imgio::kWorkingCols;
  const HandModel hand(subject);

  SplitMix64 pose(derive_seed(subject, 1000 + static_cast<std::uint64_t>(sample_index)));
  const double angle = deg2rad(lerp(-4, 4, pose.uniform()));
  const double shift_r = lerp(-5, 5, pose.uniform());
  const double shift_c = lerp(-5, 5, pose.uniform());
  const double exposure = lerp(-6, 6, pose.uniform());
  const std::uint64_t noise_stream = pose.next();
  const double ca = std::cos(angle), sa = std::sin(angle);

  std::vector<double> px(kRows * kCols);
  for (std::size_t r = 0; r < kRows; ++r) {
    for (std::size_t c = 0; c < kCols; ++c) {
      // Map the pixel back into the subject's canonical hand frame.
      const double yr = static_cast<double>(r) - hand.palm_r - shift_r;
      const double yc = static_cast<double>(c) - hand.palm_c - shift_c;
      const double hr = hand.palm_r + ca * yr + sa * yc;
      const double hc = hand.palm_c - sa * yr + ca * yc;

      const double d = hand.signed_distance(hr, hc);
      const double inside = std::clamp(0.5 - d / 1.5, 0.0, 1.0);

      double skin = hand.skin + exposure;
      for (const auto& w : hand.shading) skin += w.at(hr, hc);
      double back = hand.background;
      for (const auto& w : hand.backdrop) back += w.at(static_cast<double>(r), static_cast<double>(c));

      const std::size_t idx = r * kCols + c;
      const double noise_amp = inside * hand.skin_noise + (1.0 - inside) * hand.bg_noise;
      const double v = inside * skin + (1.0 - inside) * back + noise_amp * pixel_noise(noise_stream, idx);
      px[idx] = quantize_pixel(v);
    }
  }
  return GrayImage(kRows, kCols, std::move(px));
}

std::uint64_t subject_seed(std::uint64_t corpus_seed, std::size_t index) {
  return derive_seed(corpus_seed, 0x5B1EC7ULL + index);
}

std::string subject_id(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  return "s" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
}

DatasetManifest build_fake_dataset(const DatasetManifest& reals, std::span<const DegradeSpec> kinds,
                                   const std::filesystem::path& out_dir) {
  reals.validate();
  for (const auto& e : reals.entries) {
    if (e.label != Label::Real) {
      throw ValidationError("fake dataset input must list only real samples; found fake " +
                            e.subject + "/" + std::to_string(e.sample));
    }
  }
  for (const auto& spec : kinds) {
    spec.validate();
    if (!as_degradation(spec.kind)) {
      throw ValidationError("reference-gaussian is not an attack kind");
    }
  }

  DatasetManifest out;
  out.base_dir = out_dir;
  for (const auto& e : reals.entries) {
    ManifestEntry copy = e;
    copy.path = std::filesystem::absolute(reals.resolve(e));
    out.entries.push_back(std::move(copy));
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  for (const auto& spec : kinds) {
    const auto dir = out_dir / "fakes" / std::string(kind_name(spec.kind));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& e : reals.entries) {
      const GrayImage src = imgio::load_image(reals.resolve(e));
      DegradeSpec s = spec;
      s.seed = sample_seed(spec.seed, e.subject, e.sample, spec.kind);
      const auto rel = std::filesystem::path("fakes") / std::string(kind_name(spec.kind)) /
                       (e.subject + "_" + std::to_string(e.sample) + ".pgm");
      imgio::save_image(degrade(src, s), out_dir / rel);
      out.entries.push_back({e.subject, e.sample, Label::Fake, *as_degradation(spec.kind), rel});
    }
  }
  out.validate();
  save_manifest(out, out_dir / "manifest.csv");
  return out;
}

}  // namespace spoofguard::degrade
