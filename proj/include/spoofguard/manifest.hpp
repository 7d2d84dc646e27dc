#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spoofguard {

enum class Label { Real, Fake };

enum class Degradation { None, Natural, GaussianBlur, SaltPepper, Speckle };

std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);
std::string_view degradation_name(Degradation d);
std::optional<Degradation> parse_degradation(std::string_view s);

/// +1 for real (genuine), -1 for fake; the sign convention of every classifier.
inline int label_sign(Label l) { return l == Label::Real ? 1 : -1; }

struct ManifestEntry {
  std::string subject;
  int sample = 1;
  Label label = Label::Real;
  Degradation degradation = Degradation::None;
  std::filesystem::path path;

  bool operator==(const ManifestEntry&) const = default;
};

/// Catalog of samples. Relative paths resolve against `base_dir`, the
/// directory the manifest was loaded from.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const;

  /// Throws ValidationError on duplicate (subject, sample, label, degradation)
  /// keys, samples outside 1..3, real entries with a degradation, or fakes
  /// marked `none`.
  void validate() const;

  std::vector<Degradation> fake_kinds() const;
};

inline constexpr std::string_view kManifestHeader = "subject,sample,label,degradation,path";

DatasetManifest load_manifest(const std::filesystem::path& csv);
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::string format_manifest(const DatasetManifest& m);
/// Paths are written relative to the directory of `csv` when possible.
void save_manifest(const DatasetManifest& m, const std::filesystem::path& csv);

/// FNV-1a 64-bit hash, used to key per-item PRNG streams by subject id.
std::uint64_t fnv1a(std::string_view s);

}  // namespace spoofguard
