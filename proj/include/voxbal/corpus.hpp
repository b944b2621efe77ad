#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxbal/audio_clip.hpp"

namespace voxbal {

enum class Gender { Male, Female, Other, Unlabeled };

const char* gender_name(Gender g);
Gender gender_from_cell(std::string_view cell);

// One corpus row: a clip with its transcript and demographic labels.
// Empty accent/age strings mean unlabeled.
struct ManifestEntry {
  std::string clip_path;  // relative to the corpus audio root
  std::string transcript;
  Gender gender = Gender::Unlabeled;
  std::string accent;
  std::string age;
  double duration_s = 0.0;
  std::string augment_spec;  // serialized AugmentSpec for generated rows
};

struct RowError {
  long line = 0;  // 1-based line number in the TSV
  std::string message;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<RowError> row_errors;
};

// Parses a CommonVoice-style TSV (tab-separated, UTF-8, no quoting). The
// header must contain `path` and `sentence`; demographic columns are
// optional. Durations are filled by probing each WAV header under
// audio_root; unresolvable files keep duration 0. Malformed rows land in
// row_errors instead of aborting the parse.
Manifest parse_manifest(std::string_view tsv, const std::filesystem::path& audio_root);
Manifest parse_manifest_file(const std::filesystem::path& manifest,
                             const std::filesystem::path& audio_root);

// Serializes entries in the same TSV dialect, duration column included and
// an augment_spec column appended when any row carries one.
std::string write_manifest(std::span<const ManifestEntry> entries);

struct SegmentResult {
  std::vector<AudioClip> segments;
  // True when a span longer than max_len contained no silence run and had to
  // be cut at max_len boundaries.
  bool used_hard_cuts = false;
};

// Splits a clip at silence runs (windowed rms < silence_rms for at least
// min_silence seconds). Silence runs are removed; every emitted segment is
// at most max_len seconds. Kept samples plus removed silence add up to the
// input length.
SegmentResult segment_clip(const AudioClip& clip, double max_len_s,
                           double silence_rms, double min_silence_s);

struct CorpusStats {
  long total = 0;
  std::map<std::string, long> counts;         // per stratum
  std::map<std::string, double> proportions;  // per stratum, sums to 1
};

// Stratum distribution; stratum key is gender, or gender|accent when
// by_accent is set.
CorpusStats corpus_stats(std::span<const ManifestEntry> entries, bool by_accent = false);

std::string stratum_key(const ManifestEntry& entry, bool by_accent);

}  // namespace voxbal
