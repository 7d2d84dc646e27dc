#include <png.h>

#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "spoofguard/degrade.hpp"
#include "spoofguard/error.hpp"
#include "spoofguard/imgio.hpp"
#include "spoofguard/manifest.hpp"
#include "spoofguard/rng.hpp"
#include "test_util.hpp"

using namespace spoofguard;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

void write_rgb_png(const std::filesystem::path& p, const std::vector<unsigned char>& rgb, int w, int h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&img, p.c_str(), 0, rgb.data(), 0, nullptr) != 0);
}

}  // namespace

TEST_CASE("image invariants") {
  CHECK_THROWS_AS(GrayImage(1, 5, std::vector<double>(5, 0.0)), ParameterError);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>(3, 0.0)), DimensionError);
  CHECK_THROWS(GrayImage(2, 2, {0, 0, 0, 256}));
  CHECK_THROWS(GrayImage(2, 2, {0, 0, 0, std::nan("")}));
  CHECK(quantize_pixel(127.5) == 128.0);
  CHECK(quantize_pixel(127.49) == 127.0);
}

TEST_CASE("pgm decode, round trip and errors") {
  testutil::TempDir dir("io");
  const std::string pgm = std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4);
  write_bytes(dir.path / "a.pgm", pgm);
  const auto img = imgio::load_image(dir.path / "a.pgm");
  CHECK(img == GrayImage(2, 2, {0, 255, 128, 64}));

  write_bytes(dir.path / "trunc.pgm", "P5\n2 ");
  CHECK_THROWS_AS(imgio::load_image(dir.path / "trunc.pgm"), FormatError);
  write_bytes(dir.path / "short.pgm", "P5\n2 2\n255\n\x01");
  CHECK_THROWS_AS(imgio::load_image(dir.path / "short.pgm"), FormatError);
  CHECK_THROWS_AS(imgio::load_image(dir.path / "missing.pgm"), IoError);

  std::mt19937_64 gen(1);
  const auto x = testutil::random_image(gen, 7, 5, true);
  imgio::save_image(x, dir.path / "x.pgm");
  CHECK(imgio::load_image(dir.path / "x.pgm") == x);

  imgio::save_image(GrayImage(2, 2, {127.5, 0, 0, 0}), dir.path / "h.pgm");
  CHECK(imgio::load_image(dir.path / "h.pgm")(0, 0) == 128.0);

  CHECK_THROWS_AS(imgio::save_image(x, dir.path / "no" / "such" / "dir.pgm"), IoError);
}

TEST_CASE("png decode with luma conversion") {
  CHECK(imgio::luma(255, 0, 0) == 76);
  CHECK(imgio::luma(0, 255, 0) == 150);
  CHECK(imgio::luma(255, 255, 255) == 255);
  testutil::TempDir dir("png");
  write_rgb_png(dir.path / "c.png", {255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30}, 2, 2);
  const auto img = imgio::load_image(dir.path / "c.png");
  REQUIRE(img.rows() == 2);
  CHECK(img(0, 0) == 76.0);
  CHECK(img(0, 1) == 150.0);
  CHECK(img(1, 0) == 29.0);
  // 0.299*10 + 0.587*20 + 0.114*30 = 18.15
  CHECK(img(1, 1) == 18.0);
}

TEST_CASE("bilinear resize") {
  std::mt19937_64 gen(2);
  const auto x = testutil::random_image(gen, 6, 9);
  CHECK(imgio::resize_bilinear(x, 6, 9) == x);

  const auto up = imgio::resize_bilinear(GrayImage(2, 2, {0, 0, 255, 255}), 4, 4);
  double prev = -1;
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0;
    for (std::size_t c = 0; c < 4; ++c) mean += up(r, c);
    CHECK(mean / 4 >= prev);
    prev = mean / 4;
  }
  const auto flat = imgio::resize_bilinear(GrayImage::filled(4, 4, 100.0), 7, 3);
  for (double v : flat.pixels()) CHECK(v == 100.0);
  const auto odd = imgio::resize_bilinear(x, 11, 4);
  for (double v : odd.pixels()) CHECK((v >= 0.0 && v <= 255.0));
}

TEST_CASE("splitmix64 reference values and derived streams") {
  // First outputs for seed 0 as published with the reference implementation.
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(g.next() == 0x06C45D188009454FULL);

  SplitMix64 u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
    CHECK(u.below(7) < 7);
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("degradations") {
  const auto mid = GrayImage::filled(400, 300, 128.0);
  auto sp = degrade::DegradeSpec::with_defaults(degrade::DegradeKind::SaltPepper, 42);
  const auto noisy = degrade::degrade(mid, sp);
  std::size_t flipped = 0;
  for (double v : noisy.pixels()) {
    CHECK((v == 0.0 || v == 255.0 || v == 128.0));
    flipped += v != 128.0;
  }
  const double frac = static_cast<double>(flipped) / 120000.0;
  CHECK(frac >= 0.045);
  CHECK(frac <= 0.055);
  CHECK(degrade::degrade(mid, sp) == noisy);

  const auto zero = GrayImage::filled(20, 20, 0.0);
  CHECK(degrade::degrade(zero, degrade::DegradeSpec::with_defaults(degrade::DegradeKind::Speckle, 3)) == zero);
  const auto flat = GrayImage::filled(30, 30, 90.0);
  CHECK(degrade::degrade(flat, degrade::DegradeSpec::with_defaults(degrade::DegradeKind::GaussianBlur)) == flat);

  sp.strength = 1.5;
  CHECK_THROWS_AS(degrade::degrade(mid, sp), ParameterError);
  auto blur = degrade::DegradeSpec::with_defaults(degrade::DegradeKind::GaussianBlur);
  blur.strength = -1;
  CHECK_THROWS_AS(degrade::degrade(mid, blur), ParameterError);
  CHECK(degrade::parse_kind("speckle") == degrade::DegradeKind::Speckle);
}

TEST_CASE("synthetic hands") {
  const auto a = degrade::synth_hand(degrade::subject_seed(5, 0), 1);
  CHECK(a.rows() == 400);
  CHECK(a.cols() == 300);
  CHECK(degrade::synth_hand(degrade::subject_seed(5, 0), 1) == a);
  for (double v : a.pixels()) CHECK(v == std::floor(v));

  double min_diff = 1e9;
  for (std::size_t s = 1; s <= 100; ++s) {
    const auto b = degrade::synth_hand(degrade::subject_seed(77, s), 1);
    const auto c = degrade::synth_hand(degrade::subject_seed(77, s + 100), 1);
    double d = 0;
    for (std::size_t i = 0; i < b.size(); ++i) d += std::abs(b.pixels()[i] - c.pixels()[i]);
    min_diff = std::min(min_diff, d / static_cast<double>(b.size()));
  }
  MESSAGE("smallest mean absolute difference between subjects " << min_diff);
  CHECK(min_diff > 5.0);
}

TEST_CASE("manifest parse, validate and fake dataset") {
  testutil::TempDir dir("manifest");
  DatasetManifest reals;
  reals.base_dir = dir.path;
  std::filesystem::create_directories(dir.path / "reals");
  for (int s = 1; s <= 3; ++s) {
    const auto rel = std::filesystem::path("reals") / ("s001_" + std::to_string(s) + ".pgm");
    imgio::save_image(degrade::synth_hand(degrade::subject_seed(1, 0), s), dir.path / rel);
    reals.entries.push_back({"s001", s, Label::Real, Degradation::None, rel});
  }
  save_manifest(reals, dir.path / "manifest.csv");
  const auto loaded = load_manifest(dir.path / "manifest.csv");
  CHECK(loaded.entries == reals.entries);

  const std::vector<degrade::DegradeSpec> kinds = {
      degrade::DegradeSpec::with_defaults(degrade::DegradeKind::GaussianBlur, 4),
      degrade::DegradeSpec::with_defaults(degrade::DegradeKind::SaltPepper, 4),
      degrade::DegradeSpec::with_defaults(degrade::DegradeKind::Speckle, 4)};
  const auto out = degrade::build_fake_dataset(loaded, kinds, dir.path / "fakes");
  CHECK(out.entries.size() == 3 + 3 * 3);
  CHECK_NOTHROW(out.validate());
  for (const auto& e : out.entries) CHECK(std::filesystem::exists(out.resolve(e)));
  const auto again = load_manifest(dir.path / "fakes" / "manifest.csv");
  CHECK(again.entries.size() == out.entries.size());
  const auto none = degrade::build_fake_dataset(loaded, {}, dir.path / "none");
  REQUIRE(none.entries.size() == loaded.entries.size());
  for (std::size_t i = 0; i < none.entries.size(); ++i) {
    CHECK(none.entries[i].subject == loaded.entries[i].subject);
    CHECK(none.resolve(none.entries[i]) == loaded.resolve(loaded.entries[i]));
  }
  CHECK_THROWS_AS(degrade::build_fake_dataset(out, kinds, dir.path / "bad"), ValidationError);

  DatasetManifest dup = reals;
  dup.entries.push_back(dup.entries[0]);
  CHECK_THROWS_AS(dup.validate(), ValidationError);
  CHECK_THROWS_AS(parse_manifest("subject,sample\nx,1\n", dir.path), FormatError);
}
