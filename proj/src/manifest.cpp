#include "spoofguard/manifest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "spoofguard/error.hpp"

namespace spoofguard {

namespace {

constexpr std::array<std::string_view, 5> kDegradationNames = {
    "none", "natural", "gaussian-blur", "salt-pepper", "speckle"};

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

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view label_name(Label l) { return l == Label::Real ? "real" : "fake"; }

std::optional<Label> parse_label(std::string_view s) {
  if (s == "real") return Label::Real;
  if (s == "fake") return Label::Fake;
  return std::nullopt;
}

std::string_view degradation_name(Degradation d) {
  return kDegradationNames[static_cast<std::size_t>(d)];
}

std::optional<Degradation> parse_degradation(std::string_view s) {
  for (std::size_t i = 0; i < kDegradationNames.size(); ++i) {
    if (s == kDegradationNames[i]) return static_cast<Degradation>(i);
  }
  return std::nullopt;
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& e) const {
  return e.path.is_absolute() ? e.path : base_dir / e.path;
}

void DatasetManifest::validate() const {
  std::set<std::tuple<std::string, int, Label, Degradation>> seen;
  for (const auto& e : entries) {
    const std::string where = "manifest entry " + e.subject + "/" + std::to_string(e.sample);
    if (e.subject.empty()) throw ValidationError("manifest entry with empty subject id");
    if (e.sample < 1 || e.sample > 3) throw ValidationError(where + ": sample index must be 1..3");
    if (e.label == Label::Real && e.degradation != Degradation::None) {
      throw ValidationError(where + ": real samples must have degradation 'none'");
    }
    if (e.label == Label::Fake && e.degradation == Degradation::None) {
      throw ValidationError(where + ": fake samples need a degradation kind");
    }
    if (!seen.emplace(e.subject, e.sample, e.label, e.degradation).second) {
      throw ValidationError(where + ": duplicate (subject, sample, label, degradation)");
    }
  }
}

std::vector<Degradation> DatasetManifest::fake_kinds() const {
  std::vector<Degradation> kinds;
  for (const auto& e : entries) {
    if (e.label == Label::Fake &&
        std::find(kinds.begin(), kinds.end(), e.degradation) == kinds.end()) {
      kinds.push_back(e.degradation);
    }
  }
  std::sort(kinds.begin(), kinds.end());
  return kinds;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kManifestHeader) {
        throw FormatError("manifest header must be '" + std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    const std::string where = "manifest line " + std::to_string(line_no);
    if (f.size() != 5) throw FormatError(where + ": expected 5 fields");
    ManifestEntry e;
    e.subject = std::string(f[0]);
    const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), e.sample);
    if (ec != std::errc() || ptr != f[1].data() + f[1].size()) {
      throw FormatError(where + ": bad sample index");
    }
    const auto label = parse_label(f[2]);
    if (!label) throw FormatError(where + ": label must be real or fake");
    e.label = *label;
    const auto deg = parse_degradation(f[3]);
    if (!deg) throw FormatError(where + ": unknown degradation '" + std::string(f[3]) + "'");
    e.degradation = *deg;
    e.path = std::filesystem::path(std::string(f[4]));
    m.entries.push_back(std::move(e));
  }
  if (!header_seen) throw FormatError("manifest is empty");
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open manifest " + csv.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), csv.parent_path());
}

std::string format_manifest(const DatasetManifest& m) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : m.entries) {
    const std::string p = e.path.generic_string();
    if (e.subject.find(',') != std::string::npos || p.find(',') != std::string::npos) {
      throw ValidationError("manifest fields cannot contain commas: " + e.subject + " " + p);
    }
    out += e.subject + "," + std::to_string(e.sample) + "," + std::string(label_name(e.label)) +
           "," + std::string(degradation_name(e.degradation)) + "," + p + "\n";
  }
  return out;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& csv) {
  DatasetManifest rel = m;
  const auto dir = csv.parent_path().empty() ? std::filesystem::path(".") : csv.parent_path();
  for (auto& e : rel.entries) {
    const auto abs = std::filesystem::absolute(m.resolve(e)).lexically_normal();
    auto r = abs.lexically_relative(std::filesystem::absolute(dir).lexically_normal());
    e.path = r.empty() ? abs : r;
  }
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + csv.string());
  out << format_manifest(rel);
  if (!out) throw IoError("write failed: " + csv.string());
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace spoofguard
