#include "spoofguard/iqm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "spoofguard/error.hpp"

namespace spoofguard::iqm {

namespace {

constexpr std::array<std::string_view, kMetricCount> kNames = {
    "mse", "psnr", "sc", "ed", "cd", "eyd", "ssim", "essim", "wash", "gms"};

double nm(const GrayImage& img) { return static_cast<double>(img.size()); }

// Exponent that keeps the sign of a possibly negative base (the structure
// term can be negative for anticorrelated windows).
double signed_pow(double base, double exponent) {
  if (exponent == 1.0) return base;
  return std::copysign(std::pow(std::abs(base), exponent), base);
}

// Sliding w x w window sums, computed as a direct horizontal pass followed by
// a direct vertical pass so no running total accumulates rounding error.
Matrix window_sums(const Matrix& src, std::size_t w) {
  const std::size_t out_r = src.rows() - w + 1;
  const std::size_t out_c = src.cols() - w + 1;
  Matrix horiz(src.rows(), out_c);
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < out_c; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w; ++k) acc += src(r, c + k);
      horiz(r, c) = acc;
    }
  }
  Matrix out(out_r, out_c);
  for (std::size_t r = 0; r < out_r; ++r) {
    for (std::size_t c = 0; c < out_c; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w; ++k) acc += horiz(r + k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

std::size_t count_and(const BinaryImage& a, const BinaryImage& b) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) n += (a(r, c) && b(r, c)) ? 1 : 0;
  }
  return n;
}

}  // namespace

std::size_t metric_index(MetricId id) { return static_cast<std::size_t>(id); }
std::string_view metric_name(MetricId id) { return kNames[metric_index(id)]; }
char metric_letter(MetricId id) { return static_cast<char>('a' + metric_index(id)); }

std::string metric_column(MetricId id) {
  return std::string(1, metric_letter(id)) + "_" + std::string(metric_name(id));
}

std::optional<MetricId> parse_metric(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (MetricId id : kAllMetrics) {
    if (t == std::string(1, metric_letter(id)) || t == metric_name(id) || t == metric_column(id)) {
      return id;
    }
  }
  return std::nullopt;
}

std::string_view gms_variant_name(GmsVariant v) {
  switch (v) {
    case GmsVariant::MeanRoot: return "mean-root";
    case GmsVariant::MeanRootPixelwise: return "mean-root-pixelwise";
    case GmsVariant::SimilarityRatio: return "similarity-ratio";
  }
  return "mean-root";
}

std::optional<GmsVariant> parse_gms_variant(std::string_view token) {
  for (GmsVariant v : {GmsVariant::MeanRoot, GmsVariant::MeanRootPixelwise,
                       GmsVariant::SimilarityRatio}) {
    if (token == gms_variant_name(v)) return v;
  }
  return std::nullopt;
}

double mse(const GrayImage& ref, const GrayImage& dist) {
  require_same_shape(ref, dist);
  auto a = ref.pixels();
  auto b = dist.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double psnr(const GrayImage& ref, const GrayImage& dist) {
  const double err = mse(ref, dist);
  if (err == 0.0) return kPsnrCap;
  const double peak = *std::max_element(ref.pixels().begin(), ref.pixels().end());
  if (peak == 0.0) return -kPsnrCap;
  return 10.0 * std::log10(peak * peak / err);
}

double sc(const GrayImage& ref, const GrayImage& dist) {
  require_same_shape(ref, dist);
  double num = 0.0, den = 0.0;
  for (double v : ref.pixels()) num += v * v;
  for (double v : dist.pixels()) den += v * v;
  if (den == 0.0) throw DegenerateInputError("structural content undefined: distorted image is all zero");
  return num / den;
}

double ed(const GrayImage& ref, const GrayImage& dist, const filters::SobelParams& p) {
  require_same_shape(ref, dist);
  const BinaryImage e1 = filters::sobel_edges(ref, p);
  const BinaryImage e2 = filters::sobel_edges(dist, p);
  std::size_t differ = 0;
  for (std::size_t r = 0; r < e1.rows(); ++r) {
    for (std::size_t c = 0; c < e1.cols(); ++c) differ += e1(r, c) != e2(r, c) ? 1 : 0;
  }
  return static_cast<double>(differ) / nm(ref);
}

double corner_difference(std::size_t n_ref, std::size_t n_dist) {
  const std::size_t hi = std::max(n_ref, n_dist);
  if (hi == 0) return 0.0;
  const std::size_t lo = std::min(n_ref, n_dist);
  return static_cast<double>(hi - lo) / static_cast<double>(hi);
}

double cd(const GrayImage& ref, const GrayImage& dist, const filters::HarrisParams& p) {
  require_same_shape(ref, dist);
  return corner_difference(filters::harris_corners(ref, p), filters::harris_corners(dist, p));
}

double entropy(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (double v : img.pixels()) ++hist[static_cast<std::size_t>(quantize_pixel(v))];
  const double n = nm(img);
  double h = 0.0;
  for (std::size_t count : hist) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double eyd(const GrayImage& ref, const GrayImage& dist) {
  require_same_shape(ref, dist);
  const double h1 = entropy(ref);
  const double h2 = entropy(dist);
  const double hi = std::max(h1, h2);
  if (hi == 0.0) return 0.0;
  return std::abs(h1 - h2) / hi;
}

double ssim(const GrayImage& ref, const GrayImage& dist, const SsimParams& params) {
  require_same_shape(ref, dist);
  const std::size_t w = params.window;
  if (w == 0) throw ParameterError("SSIM window must be positive");
  if (ref.rows() < w || ref.cols() < w) {
    throw DimensionError("image smaller than the " + std::to_string(w) + "x" + std::to_string(w) +
                         " SSIM window");
  }
  const Matrix& x = ref.matrix();
  const Matrix& y = dist.matrix();
  Matrix xx(x.rows(), x.cols()), yy(x.rows(), x.cols()), xy(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx.values()[i] = x.values()[i] * x.values()[i];
    yy.values()[i] = y.values()[i] * y.values()[i];
    xy.values()[i] = x.values()[i] * y.values()[i];
  }
  const Matrix sx = window_sums(x, w);
  const Matrix sy = window_sums(y, w);
  const Matrix sxx = window_sums(xx, w);
  const Matrix syy = window_sums(yy, w);
  const Matrix sxy = window_sums(xy, w);

  const double n = static_cast<double>(w * w);
  double total = 0.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    const double mx = sx.values()[i] / n;
    const double my = sy.values()[i] / n;
    const double vx = std::max(0.0, sxx.values()[i] / n - mx * mx);
    const double vy = std::max(0.0, syy.values()[i] / n - my * my);
    const double sd = std::sqrt(vx * vy);
    // |cov| <= sd_x sd_y; the clamp only absorbs cancellation error.
    const double cov = std::clamp(sxy.values()[i] / n - mx * my, -sd, sd);
    const double l = (2.0 * mx * my + params.c1) / (mx * mx + my * my + params.c1);
    const double c = (2.0 * sd + params.c2) / (vx + vy + params.c2);
    const double s = (cov + params.c3) / (sd + params.c3);
    total += signed_pow(l, params.alpha) * signed_pow(c, params.beta) * signed_pow(s, params.gamma);
  }
  return total / static_cast<double>(sx.size());
}

double essim(const GrayImage& ref, const GrayImage& dist) {
  require_same_shape(ref, dist);
  const Matrix e1 = filters::scharr_edge_strength(ref);
  const Matrix e2 = filters::scharr_edge_strength(dist);
  double total = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    const double a = e1.values()[i];
    const double b = e2.values()[i];
    total += (2.0 * a * b + kEpsilon) / (a * a + b * b + kEpsilon);
  }
  return total / nm(ref);
}

double wavelet_sharpness(const filters::WaveletBands& bands) {
  auto energy = [](const Matrix& m) {
    double e = 0.0;
    for (double v : m.values()) e += v * v;
    return e;
  };
  const double detail = energy(bands.lh) + energy(bands.hl) + energy(bands.hh);
  const double total = detail + energy(bands.ll);
  return total == 0.0 ? 0.0 : detail / total;
}

double edge_structure_similarity(const BinaryImage& a, const BinaryImage& b) {
  const std::size_t na = a.count();
  const std::size_t nb = b.count();
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): exact when na == nb.
  return static_cast<double>(count_and(a, b)) /
         std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

WashComponents wash_components(const GrayImage& ref, const GrayImage& dist) {
  require_same_shape(ref, dist);
  const auto b1 = filters::haar_decompose(ref);
  const auto b2 = filters::haar_decompose(dist);
  WashComponents w;
  w.sharpness_ref = wavelet_sharpness(b1);
  w.sharpness_dist = wavelet_sharpness(b2);
  const double l1 = w.sharpness_ref, l2 = w.sharpness_dist;
  w.sharpness_sim = (2.0 * l1 * l2 + kEpsilon) / (l1 * l1 + l2 * l2 + kEpsilon);

  w.zero_crossing_sim = 1.0;
  for (auto band : {&filters::WaveletBands::lh, &filters::WaveletBands::hl,
                    &filters::WaveletBands::hh}) {
    w.zero_crossing_sim *= edge_structure_similarity(filters::zero_crossings(b1.*band),
                                                     filters::zero_crossings(b2.*band));
  }
  w.value = std::pow(w.sharpness_sim, kWashGamma) + std::pow(w.zero_crossing_sim, 1.0 - kWashGamma);
  return w;
}

double wash(const GrayImage& ref, const GrayImage& dist) { return wash_components(ref, dist).value; }

GmsDeltas gms_deltas(const GrayImage& ref, const GrayImage& dist, double th) {
  require_same_shape(ref, dist);
  const auto g1 = filters::thresholded_gradients(ref, th);
  const auto g2 = filters::thresholded_gradients(dist, th);
  GmsDeltas d;
  for (std::size_t i = 0; i < g1.gx.size(); ++i) {
    const double dx = g1.gx.values()[i] - g2.gx.values()[i];
    const double dy = g1.gy.values()[i] - g2.gy.values()[i];
    d.dgx += dx * dx;
    d.dgy += dy * dy;
  }
  return d;
}

double gms(const GrayImage& ref, const GrayImage& dist, double th, GmsVariant variant) {
  const double n = nm(ref);
  switch (variant) {
    case GmsVariant::MeanRoot: {
      const auto d = gms_deltas(ref, dist, th);
      return std::sqrt(d.dgx + d.dgy) / n;
    }
    case GmsVariant::MeanRootPixelwise: {
      require_same_shape(ref, dist);
      const auto g1 = filters::thresholded_gradients(ref, th);
      const auto g2 = filters::thresholded_gradients(dist, th);
      double total = 0.0;
      for (std::size_t i = 0; i < g1.gx.size(); ++i) {
        const double dx = g1.gx.values()[i] - g2.gx.values()[i];
        const double dy = g1.gy.values()[i] - g2.gy.values()[i];
        total += std::sqrt(dx * dx + dy * dy);
      }
      return total / n;
    }
    case GmsVariant::SimilarityRatio: {
      const auto d = gms_deltas(ref, dist, th);
      return (2.0 * d.dgx * d.dgy + kEpsilon) / (n * (d.dgx * d.dgx + d.dgy * d.dgy + kEpsilon));
    }
  }
  throw ParameterError("unknown GMS variant");
}

double compute_metric(MetricId id, const GrayImage& ref, const GrayImage& dist,
                      const MetricConfig& config) {
  switch (id) {
    case MetricId::Mse: return mse(ref, dist);
    case MetricId::Psnr: return psnr(ref, dist);
    case MetricId::Sc: return sc(ref, dist);
    case MetricId::Ed: return ed(ref, dist, config.sobel);
    case MetricId::Cd: return cd(ref, dist, config.harris);
    case MetricId::Eyd: return eyd(ref, dist);
    case MetricId::Ssim: return ssim(ref, dist, config.ssim);
    case MetricId::Essim: return essim(ref, dist);
    case MetricId::Wash: return wash(ref, dist);
    case MetricId::Gms: return gms(ref, dist, config.th, config.gms_variant);
  }
  throw ParameterError("unknown metric");
}

MetricValues compute_all(const GrayImage& ref, const GrayImage& dist, const MetricConfig& config) {
  require_same_shape(ref, dist);
  MetricValues out{};
  for (MetricId id : kAllMetrics) out[metric_index(id)] = compute_metric(id, ref, dist, config);
  return out;
}

}  // namespace spoofguard::iqm
