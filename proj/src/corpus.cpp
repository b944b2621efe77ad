#include "voxbal/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "voxbal/audio_io.hpp"
#include "voxbal/errors.hpp"

namespace voxbal {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      return cells;
    }
    cells.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// TSV uses no quoting, so tabs and newlines inside a field are replaced.
std::string sanitize_cell(std::string_view value) {
  std::string out(value);
  for (char& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

std::string format_duration(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  return buf;
}

}  // namespace

const char* gender_name(Gender g) {
  switch (g) {
    case Gender::Male:
      return "male";
    case Gender::Female:
      return "female";
    case Gender::Other:
      return "other";
    default:
      return "unlabeled";
  }
}

Gender gender_from_cell(std::string_view cell) {
  const std::string v = lower(cell);
  if (v == "male") return Gender::Male;
  if (v == "female") return Gender::Female;
  if (v == "other") return Gender::Other;
  return Gender::Unlabeled;
}

Manifest parse_manifest(std::string_view tsv, const std::filesystem::path& audio_root) {
  Manifest manifest;
  std::size_t pos = 0;
  long line_no = 0;
  std::optional<std::size_t> col_path, col_sentence, col_gender, col_accent, col_age,
      col_duration, col_spec;
  std::size_t header_cols = 0;

  while (pos <= tsv.size()) {
    std::size_t end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      const auto cells = split_tabs(line);
      header_cols = cells.size();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string name = lower(cells[i]);
        if (name == "path") col_path = i;
        else if (name == "sentence") col_sentence = i;
        else if (name == "gender") col_gender = i;
        else if (name == "accent" || name == "accents") col_accent = i;
        else if (name == "age") col_age = i;
        else if (name == "duration") col_duration = i;
        else if (name == "augment_spec") col_spec = i;
      }
      if (!col_path) throw InputError("schema-error", "path");
      if (!col_sentence) throw InputError("schema-error", "sentence");
      continue;
    }
    if (line.empty()) {
      if (pos > tsv.size()) break;  // trailing newline
      manifest.row_errors.push_back({line_no, "empty line"});
      continue;
    }
    const auto cells = split_tabs(line);
    if (cells.size() != header_cols) {
      manifest.row_errors.push_back(
          {line_no, "expected " + std::to_string(header_cols) + " cells, got " +
                        std::to_string(cells.size())});
      continue;
    }
    ManifestEntry entry;
    entry.clip_path = cells[*col_path];
    if (entry.clip_path.empty()) {
      manifest.row_errors.push_back({line_no, "empty path"});
      continue;
    }
    entry.transcript = cells[*col_sentence];
    if (col_gender) entry.gender = gender_from_cell(cells[*col_gender]);
    if (col_accent) entry.accent = cells[*col_accent];
    if (col_age) entry.age = cells[*col_age];
    if (col_spec) entry.augment_spec = cells[*col_spec];

    // Duration comes from the WAV header; fall back to the manifest column,
    // then 0, when the file cannot be probed.
    bool probed = false;
    if (!audio_root.empty()) {
      try {
        entry.duration_s = probe_wav_file(audio_root / entry.clip_path).duration_s;
        probed = true;
      } catch (const Error&) {
      }
    }
    if (!probed && col_duration && !cells[*col_duration].empty()) {
      try {
        entry.duration_s = std::max(0.0, std::stod(cells[*col_duration]));
      } catch (const std::exception&) {
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

Manifest parse_manifest_file(const std::filesystem::path& manifest,
                             const std::filesystem::path& audio_root) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw InputError("io-error", "cannot open " + manifest.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), audio_root);
}

std::string write_manifest(std::span<const ManifestEntry> entries) {
  const bool with_spec =
      std::any_of(entries.begin(), entries.end(),
                  [](const ManifestEntry& e) { return !e.augment_spec.empty(); });
  std::string out = "path\tsentence\tgender\taccent\tage\tduration";
  if (with_spec) out += "\taugment_spec";
  out += '\n';
  for (const auto& e : entries) {
    out += sanitize_cell(e.clip_path);
    out += '\t';
    out += sanitize_cell(e.transcript);
    out += '\t';
    out += e.gender == Gender::Unlabeled ? "" : gender_name(e.gender);
    out += '\t';
    out += sanitize_cell(e.accent);
    out += '\t';
    out += sanitize_cell(e.age);
    out += '\t';
    out += format_duration(e.duration_s);
    if (with_spec) {
      out += '\t';
      out += sanitize_cell(e.augment_spec);
    }
    out += '\n';
  }
  return out;
}

SegmentResult segment_clip(const AudioClip& clip, double max_len_s,
                           double silence_rms, double min_silence_s) {
  require_mono(clip, "segment_clip");
  if (!(max_len_s > 0.0)) throw InputError("invalid-max-len", "max_len must be positive");

  SegmentResult result;
  const std::span<const float> x = clip.channel(0);
  if (x.empty()) return result;

  const std::size_t rate = static_cast<std::size_t>(clip.sample_rate);
  const std::size_t win = std::max<std::size_t>(1, rate / 100);  // 10 ms tiles
  const std::size_t max_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(max_len_s * clip.sample_rate)));
  const std::size_t min_silence = static_cast<std::size_t>(
      std::llround(min_silence_s * clip.sample_rate));

  // Tile the signal into 10 ms windows (plus a short tail) and mark each
  // tile silent or not.
  const std::size_t tiles = (x.size() + win - 1) / win;
  std::vector<bool> silent(tiles);
  for (std::size_t t = 0; t < tiles; ++t) {
    const std::size_t begin = t * win;
    const std::size_t count = std::min(win, x.size() - begin);
    double energy = 0.0;
    for (std::size_t i = begin; i < begin + count; ++i)
      energy += static_cast<double>(x[i]) * x[i];
    silent[t] = std::sqrt(energy / static_cast<double>(count)) < silence_rms;
  }

  // Silence runs (>= min_silence) are removed; spans between them are kept.
  struct Span {
    std::size_t begin, end;  // sample range [begin, end)
  };
  std::vector<Span> speech;
  std::size_t span_begin = 0;
  std::size_t t = 0;
  while (t < tiles) {
    if (!silent[t]) {
      ++t;
      continue;
    }
    std::size_t run_end = t;
    while (run_end < tiles && silent[run_end]) ++run_end;
    const std::size_t run_begin_sample = t * win;
    const std::size_t run_end_sample = std::min(x.size(), run_end * win);
    if (run_end_sample - run_begin_sample >= min_silence) {
      if (run_begin_sample > span_begin) speech.push_back({span_begin, run_begin_sample});
      span_begin = run_end_sample;
    }
    t = run_end;
  }
  if (span_begin < x.size()) speech.push_back({span_begin, x.size()});

  for (const auto& span : speech) {
    std::size_t begin = span.begin;
    while (begin < span.end) {
      const std::size_t len = span.end - begin;
      const std::size_t take = std::min(len, max_len);
      if (len > max_len) result.used_hard_cuts = true;
      std::vector<float> seg(x.begin() + begin, x.begin() + begin + take);
      result.segments.push_back(AudioClip::mono(std::move(seg), clip.sample_rate));
      begin += take;
    }
  }
  return result;
}

CorpusStats corpus_stats(std::span<const ManifestEntry> entries, bool by_accent) {
  if (entries.empty()) throw InputError("empty-corpus", "no manifest entries");
  CorpusStats stats;
  stats.total = static_cast<long>(entries.size());
  for (const auto& e : entries) stats.counts[stratum_key(e, by_accent)] += 1;
  for (const auto& [key, count] : stats.counts)
    stats.proportions[key] = static_cast<double>(count) / static_cast<double>(stats.total);
  return stats;
}

std::string stratum_key(const ManifestEntry& entry, bool by_accent) {
  std::string key = gender_name(entry.gender);
  if (by_accent) {
    key += '|';
    key += entry.accent.empty() ? "unlabeled" : lower(entry.accent);
  }
  return key;
}

}  // namespace voxbal
