#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "voxbal/audio_io.hpp"
#include "voxbal/corpus.hpp"
#include "voxbal/rng.hpp"

#include "support/synth.hpp"

using namespace voxbal;
using namespace voxbal::testsupport;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::path("test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("a complete row parses with every field populated") {
  const fs::path dir = fresh_dir("corpus_parse");
  save_wav_file(dir / "a.wav", make_sine(200.0, 16000, 1.5));
  const std::string tsv =
      "path\tsentence\tgender\taccent\tage\n"
      "a.wav\thello there\tfemale\tmidwest\ttwenties\n";
  const Manifest m = parse_manifest(tsv, dir);
  REQUIRE(m.entries.size() == 1);
  CHECK(m.row_errors.empty());
  const ManifestEntry& e = m.entries[0];
  CHECK(e.clip_path == "a.wav");
  CHECK(e.transcript == "hello there");
  CHECK(e.gender == Gender::Female);
  CHECK(e.accent == "midwest");
  CHECK(e.age == "twenties");
  CHECK(e.duration_s == doctest::Approx(1.5));
}

TEST_CASE("a missing sentence column is a schema error") {
  CHECK_THROWS_WITH_AS(parse_manifest("path\tgender\na.wav\tmale\n", ""),
                       doctest::Contains("schema-error"), InputError);
  CHECK_THROWS_WITH_AS(parse_manifest("sentence\thi\n", ""),
                       doctest::Contains("schema-error"), InputError);
}

TEST_CASE("an empty gender cell maps to unlabeled") {
  const std::string tsv = "path\tsentence\tgender\na.wav\thi\t\n";
  const Manifest m = parse_manifest(tsv, "");
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0].gender == Gender::Unlabeled);
}

TEST_CASE("gender matching is case-insensitive with a fixed vocabulary") {
  const std::string tsv =
      "path\tsentence\tgender\n"
      "a.wav\thi\tFEMALE\n"
      "b.wav\thi\tMale\n"
      "c.wav\thi\tOther\n"
      "d.wav\thi\tnonbinary\n";
  const Manifest m = parse_manifest(tsv, "");
  REQUIRE(m.entries.size() == 4);
  CHECK(m.entries[0].gender == Gender::Female);
  CHECK(m.entries[1].gender == Gender::Male);
  CHECK(m.entries[2].gender == Gender::Other);
  CHECK(m.entries[3].gender == Gender::Unlabeled);
}

TEST_CASE("short rows are collected as row errors with line numbers") {
  const std::string tsv =
      "path\tsentence\tgender\n"
      "a.wav\thi\tmale\n"
      "b.wav\thi\n"
      "c.wav\thi\tfemale\n";
  const Manifest m = parse_manifest(tsv, "");
  CHECK(m.entries.size() == 2);
  REQUIRE(m.row_errors.size() == 1);
  CHECK(m.row_errors[0].line == 3);
}

TEST_CASE("every data line becomes an entry or a row error") {
  Rng rng(0x70A57u);
  for (int trial = 0; trial < 50; ++trial) {
    std::string tsv = "path\tsentence\tgender\n";
    const int rows = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < rows; ++i) {
      switch (rng.below(4)) {
        case 0:
          tsv += "clip" + std::to_string(i) + ".wav\twords here\tmale\n";
          break;
        case 1:
          tsv += "clip" + std::to_string(i) + ".wav\twords\n";  // short row
          break;
        case 2:
          tsv += "\tmissing path\tfemale\n";  // empty path
          break;
        default:
          tsv += "clip" + std::to_string(i) + ".wav\t\tother\n";  // empty sentence ok
          break;
      }
    }
    const Manifest m = parse_manifest(tsv, "");
    CHECK(m.entries.size() + m.row_errors.size() == static_cast<std::size_t>(rows));
  }
}

TEST_CASE("manifests roundtrip through the writer") {
  const std::string tsv =
      "path\tsentence\tgender\taccent\tage\n"
      "x.wav\tone two\tmale\t\t\n"
      "y.wav\tthree\t\tsouth\tforties\n";
  const Manifest m = parse_manifest(tsv, "");
  const std::string written = write_manifest(m.entries);
  const Manifest back = parse_manifest(written, "");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].gender == Gender::Male);
  CHECK(back.entries[1].gender == Gender::Unlabeled);
  CHECK(back.entries[1].accent == "south");
  CHECK(back.entries[0].transcript == "one two");
}

TEST_CASE("a short clip is returned whole") {
  const AudioClip clip = make_sine(200.0, 16000, 3.0);
  const SegmentResult r = segment_clip(clip, 6.0, 0.01, 0.3);
  REQUIRE(r.segments.size() == 1);
  CHECK_FALSE(r.used_hard_cuts);
  CHECK(r.segments[0].length() == clip.length());
  CHECK(r.segments[0].samples[0] == clip.samples[0]);
}

TEST_CASE("a centered silence gap splits a 10 s clip into two") {
  // 4.5 s tone, 1 s silence, 4.5 s tone
  std::vector<float> x;
  const AudioClip tone = make_sine(200.0, 16000, 4.5, 0.5);
  x.insert(x.end(), tone.samples[0].begin(), tone.samples[0].end());
  x.insert(x.end(), 16000, 0.0f);
  x.insert(x.end(), tone.samples[0].begin(), tone.samples[0].end());
  const AudioClip clip = AudioClip::mono(std::move(x), 16000);
  const SegmentResult r = segment_clip(clip, 6.0, 0.01, 0.3);
  REQUIRE(r.segments.size() == 2);
  CHECK_FALSE(r.used_hard_cuts);
  for (const auto& seg : r.segments)
    CHECK(seg.duration_s() <= 6.0);
  // sample conservation: kept + removed silence = input
  const std::size_t kept = r.segments[0].length() + r.segments[1].length();
  CHECK(kept + 16000 == clip.length());
}

TEST_CASE("an all-silence clip yields no segments") {
  const AudioClip clip = make_silence(16000, 2.0);
  const SegmentResult r = segment_clip(clip, 6.0, 0.01, 0.3);
  CHECK(r.segments.empty());
}

TEST_CASE("an oversized span with no silence is hard-cut and flagged") {
  const AudioClip clip = make_sine(200.0, 16000, 10.0, 0.5);
  const SegmentResult r = segment_clip(clip, 3.0, 0.01, 0.3);
  CHECK(r.used_hard_cuts);
  REQUIRE(r.segments.size() == 4);  // 3 + 3 + 3 + 1 seconds
  std::size_t total = 0;
  for (const auto& seg : r.segments) {
    CHECK(seg.duration_s() <= 3.0 + 1e-9);
    total += seg.length();
  }
  CHECK(total == clip.length());
}

TEST_CASE("segment conservation holds on randomized tone/silence patterns") {
  Rng rng(0x5E9u);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> x;
    const int pieces = 1 + static_cast<int>(rng.below(6));
    for (int p = 0; p < pieces; ++p) {
      const double dur = 0.2 + rng.uniform() * 1.5;
      if (rng.below(2) == 0) {
        const AudioClip tone = make_sine(150.0 + rng.uniform() * 100.0, 16000, dur, 0.5);
        x.insert(x.end(), tone.samples[0].begin(), tone.samples[0].end());
      } else {
        x.insert(x.end(), static_cast<std::size_t>(dur * 16000), 0.0f);
      }
    }
    const AudioClip clip = AudioClip::mono(std::move(x), 16000);
    const SegmentResult r = segment_clip(clip, 1.0, 0.01, 0.25);
    std::size_t kept = 0;
    for (const auto& seg : r.segments) {
      CHECK(seg.duration_s() <= 1.0 + 1e-9);
      kept += seg.length();
    }
    CHECK(kept <= clip.length());
  }
}

TEST_CASE("stats reproduce the 46/16/38 distribution") {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 460; ++i) entries.push_back({"m.wav", "t", Gender::Male, "", "", 0, ""});
  for (int i = 0; i < 160; ++i) entries.push_back({"f.wav", "t", Gender::Female, "", "", 0, ""});
  for (int i = 0; i < 380; ++i) entries.push_back({"u.wav", "t", Gender::Unlabeled, "", "", 0, ""});
  const CorpusStats stats = corpus_stats(entries);
  CHECK(stats.total == 1000);
  CHECK(stats.counts.at("male") == 460);
  CHECK(stats.counts.at("female") == 160);
  CHECK(stats.counts.at("unlabeled") == 380);
  CHECK(stats.proportions.at("male") == doctest::Approx(0.46));
  CHECK(stats.proportions.at("female") == doctest::Approx(0.16));
  CHECK(stats.proportions.at("unlabeled") == doctest::Approx(0.38));
}

TEST_CASE("a single male entry is proportion 1") {
  std::vector<ManifestEntry> entries = {{"m.wav", "t", Gender::Male, "", "", 0, ""}};
  const CorpusStats stats = corpus_stats(entries);
  CHECK(stats.proportions.at("male") == doctest::Approx(1.0));
}

TEST_CASE("an empty corpus is an error") {
  CHECK_THROWS_WITH_AS(corpus_stats({}), doctest::Contains("empty-corpus"), InputError);
}

TEST_CASE("proportions sum to 1 on random corpora") {
  Rng rng(0x57A75u);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ManifestEntry> entries;
    const int n = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i) {
      ManifestEntry e{"c.wav", "t", Gender::Unlabeled, "", "", 0, ""};
      switch (rng.below(4)) {
        case 0: e.gender = Gender::Male; break;
        case 1: e.gender = Gender::Female; break;
        case 2: e.gender = Gender::Other; break;
        default: break;
      }
      e.accent = rng.below(2) ? "a" : "b";
      entries.push_back(e);
    }
    for (bool by_accent : {false, true}) {
      const CorpusStats stats = corpus_stats(entries, by_accent);
      double sum = 0.0;
      long count_sum = 0;
      for (const auto& [key, p] : stats.proportions) sum += p;
      for (const auto& [key, c] : stats.counts) count_sum += c;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(count_sum == stats.total);
    }
  }
}

TEST_CASE("gender-by-accent strata use a joint key") {
  std::vector<ManifestEntry> entries = {
      {"a.wav", "t", Gender::Male, "South", "", 0, ""},
      {"b.wav", "t", Gender::Male, "", "", 0, ""},
  };
  const CorpusStats stats = corpus_stats(entries, true);
  CHECK(stats.counts.at("male|south") == 1);
  CHECK(stats.counts.at("male|unlabeled") == 1);
}

}  // TEST_SUITE
