#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "voxbal/audio_io.hpp"
#include "voxbal/balance.hpp"
#include "voxbal/rng.hpp"

#include "support/synth.hpp"

using namespace voxbal;
using namespace voxbal::testsupport;
namespace fs = std::filesystem;

namespace {

std::vector<ManifestEntry> synthetic_entries(int males, int females, int unlabeled = 0) {
  std::vector<ManifestEntry> entries;
  int id = 0;
  for (int i = 0; i < males; ++i)
    entries.push_back({"m" + std::to_string(id++) + ".wav", "t", Gender::Male, "", "", 0, ""});
  for (int i = 0; i < females; ++i)
    entries.push_back({"f" + std::to_string(id++) + ".wav", "t", Gender::Female, "", "", 0, ""});
  for (int i = 0; i < unlabeled; ++i)
    entries.push_back({"u" + std::to_string(id++) + ".wav", "t", Gender::Unlabeled, "", "", 0, ""});
  return entries;
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::path("test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A tiny on-disk corpus: male clips at 120 Hz, female clips at 210 Hz.
std::vector<ManifestEntry> write_corpus(const fs::path& root, int males, int females) {
  std::vector<ManifestEntry> entries;
  int id = 0;
  for (int i = 0; i < males; ++i) {
    const std::string name = "m" + std::to_string(id++) + ".wav";
    save_wav_file(root / name, make_sine(120.0, 16000, 0.3, 0.4, 0.1 * i));
    entries.push_back({name, "male words", Gender::Male, "", "", 0.3, ""});
  }
  for (int i = 0; i < females; ++i) {
    const std::string name = "f" + std::to_string(id++) + ".wav";
    save_wav_file(root / name, make_sine(210.0, 16000, 0.3, 0.4, 0.1 * i));
    entries.push_back({name, "female words", Gender::Female, "", "", 0.3, ""});
  }
  return entries;
}

}  // namespace

TEST_SUITE("balance") {

TEST_CASE("downsampling the 460/160 corpus keeps 160 of each") {
  const auto entries = synthetic_entries(460, 160);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 7);
  CHECK(plan.strata.at("male").kept.size() == 160);
  CHECK(plan.strata.at("female").kept.size() == 160);
  CHECK(plan.strata.at("male").duplicates.empty());
  CHECK(plan.strata.at("female").duplicates.empty());
}

TEST_CASE("already balanced strata produce an identity plan") {
  const auto entries = synthetic_entries(50, 50);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 1);
  CHECK(plan.strata.at("male").kept.size() == 50);
  CHECK(plan.strata.at("female").kept.size() == 50);
  CHECK(plan.strata.at("male").duplicates.empty());
  CHECK(plan.strata.at("female").duplicates.empty());
}

TEST_CASE("upsampling the 460/160 corpus duplicates 300 female entries") {
  const auto entries = synthetic_entries(460, 160);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, UpsampleWithAugmentation{}, 7);
  CHECK(plan.strata.at("male").duplicates.empty());
  CHECK(plan.strata.at("female").duplicates.size() == 300);
  CHECK(plan.strata.at("male").kept.size() == 460);
  CHECK(plan.strata.at("female").kept.size() == 160);
}

TEST_CASE("duplicates cycle sources round-robin and carry distinct seeds") {
  const auto entries = synthetic_entries(10, 3);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, UpsampleWithAugmentation{}, 99);
  const auto& dups = plan.strata.at("female").duplicates;
  REQUIRE(dups.size() == 7);
  // female entries are indices 10, 11, 12; round-robin reuse
  CHECK(dups[0].source == 10);
  CHECK(dups[1].source == 11);
  CHECK(dups[2].source == 12);
  CHECK(dups[3].source == 10);
  std::set<std::uint64_t> seeds;
  for (const auto& dup : dups) seeds.insert(dup.spec.seed);
  CHECK(seeds.size() == dups.size());
}

TEST_CASE("plans are deterministic for a fixed seed") {
  const auto entries = synthetic_entries(40, 12, 9);
  const CorpusStats stats = corpus_stats(entries);
  const auto a = plan_balance(stats, entries, UpsampleWithAugmentation{}, 5);
  const auto b = plan_balance(stats, entries, UpsampleWithAugmentation{}, 5);
  CHECK(a.to_json() == b.to_json());
  const auto c = plan_balance(stats, entries, UpsampleWithAugmentation{}, 6);
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("plans roundtrip through JSON") {
  const auto entries = synthetic_entries(8, 3);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, UpsampleWithAugmentation{}, 21);
  const BalancePlan back = BalancePlan::from_json(plan.to_json());
  CHECK(back.to_json() == plan.to_json());
}

TEST_CASE("unlabeled entries pass through untouched by default") {
  const auto entries = synthetic_entries(20, 5, 11);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 3);
  CHECK(plan.strata.at("male").kept.size() == 5);
  CHECK(plan.strata.at("female").kept.size() == 5);
  CHECK(plan.strata.at("unlabeled").kept.size() == 11);
  CHECK(plan.strata.at("unlabeled").duplicates.empty());

  BalanceOptions opts;
  opts.include_unlabeled = true;
  const BalancePlan inclusive = plan_balance(stats, entries, DownsampleToMin{}, 3, opts);
  CHECK(inclusive.strata.at("unlabeled").kept.size() == 5);
}

TEST_CASE("a single nonzero stratum is degenerate") {
  const auto entries = synthetic_entries(30, 0);
  const CorpusStats stats = corpus_stats(entries);
  CHECK_THROWS_WITH_AS(plan_balance(stats, entries, DownsampleToMin{}, 1),
                       doctest::Contains("degenerate-corpus"), InfeasibleError);
}

TEST_CASE("a positive target for an empty stratum is infeasible") {
  const auto entries = synthetic_entries(30, 0);
  const CorpusStats stats = corpus_stats(entries);
  TargetProportions tp;
  tp.proportions = {{"male", 0.5}, {"female", 0.5}};
  CHECK_THROWS_WITH_AS(plan_balance(stats, entries, tp, 1),
                       doctest::Contains("infeasible-target"), InfeasibleError);
}

TEST_CASE("target proportions must sum to one") {
  const auto entries = synthetic_entries(30, 10);
  const CorpusStats stats = corpus_stats(entries);
  TargetProportions tp;
  tp.proportions = {{"male", 0.5}, {"female", 0.2}};
  CHECK_THROWS_WITH_AS(plan_balance(stats, entries, tp, 1),
                       doctest::Contains("invalid-strategy"), InputError);
}

TEST_CASE("target proportions rebalance while preserving the named total") {
  const auto entries = synthetic_entries(30, 10);
  const CorpusStats stats = corpus_stats(entries);
  TargetProportions tp;
  tp.proportions = {{"male", 0.5}, {"female", 0.5}};
  const BalancePlan plan = plan_balance(stats, entries, tp, 4);
  const auto& male = plan.strata.at("male");
  const auto& female = plan.strata.at("female");
  CHECK(male.kept.size() == 20);
  CHECK(female.kept.size() + female.duplicates.size() == 20);
}

TEST_CASE("equalized stratum sizes differ by at most one") {
  Rng rng(0xBA1Au);
  for (int trial = 0; trial < 20; ++trial) {
    const auto entries = synthetic_entries(1 + static_cast<int>(rng.below(40)),
                                           1 + static_cast<int>(rng.below(40)));
    const CorpusStats stats = corpus_stats(entries);
    for (const BalanceStrategy& strategy :
         {BalanceStrategy(DownsampleToMin{}), BalanceStrategy(UpsampleWithAugmentation{})}) {
      const BalancePlan plan = plan_balance(stats, entries, strategy, trial);
      std::vector<long> sizes;
      for (const auto& [name, sp] : plan.strata)
        if (name != "unlabeled")
          sizes.push_back(static_cast<long>(sp.kept.size() + sp.duplicates.size()));
      REQUIRE(sizes.size() == 2);
      const long diff = std::labs(sizes[0] - sizes[1]);
      if (std::holds_alternative<DownsampleToMin>(strategy))
        CHECK(diff == 0);
      else
        CHECK(diff <= 1);
    }
  }
}

TEST_CASE("downsampling gives every entry equal inclusion probability") {
  // 20 male entries, 8 female: downsample keeps 8 of 20 males. Over 1000
  // fixed seeds each male's inclusion frequency must sit within 3 standard
  // errors of 8/20.
  const auto entries = synthetic_entries(20, 8);
  const CorpusStats stats = corpus_stats(entries);
  std::vector<int> included(20, 0);
  const int runs = 1000;
  for (int seed = 0; seed < runs; ++seed) {
    const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, seed);
    for (std::size_t idx : plan.strata.at("male").kept) included[idx] += 1;
  }
  const double p = 8.0 / 20.0;
  const double se = std::sqrt(p * (1.0 - p) / runs);
  for (int i = 0; i < 20; ++i) {
    const double freq = included[i] / static_cast<double>(runs);
    CHECK(std::abs(freq - p) <= 3.0 * se);
  }
}

TEST_CASE("execute materializes a self-contained balanced corpus") {
  const fs::path root = fresh_dir("balance_exec_src");
  const fs::path out = fresh_dir("balance_exec_out");
  const auto entries = write_corpus(root, 5, 2);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, UpsampleWithAugmentation{}, 11);
  const ExecuteResult result = execute_balance(plan, entries, root, out, 2);

  const CorpusStats after = corpus_stats(result.entries);
  CHECK(after.counts.at("male") == 5);
  CHECK(after.counts.at("female") == 5);
  CHECK(result.generated_files.size() == 3);
  for (const auto& rel : result.generated_files) {
    CHECK(fs::exists(out / rel));
    const AudioClip clip = load_wav_file(out / rel);
    CHECK(clip.length() > 0);
  }
  // every generated row carries its augment spec
  int with_spec = 0;
  for (const auto& row : result.entries)
    if (!row.augment_spec.empty()) ++with_spec;
  CHECK(with_spec == 3);
}

TEST_CASE("an identity plan reproduces the kept rows") {
  const fs::path root = fresh_dir("balance_identity_src");
  const fs::path out = fresh_dir("balance_identity_out");
  const auto entries = write_corpus(root, 3, 3);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 1);
  const ExecuteResult result = execute_balance(plan, entries, root, out);
  REQUIRE(result.entries.size() == entries.size());
  CHECK(result.generated_files.empty());
  const std::string manifest = write_manifest(result.entries);
  CHECK(manifest.find(".aug") == std::string::npos);
}

TEST_CASE("executions are byte-identical across reruns and job counts") {
  const fs::path root = fresh_dir("balance_rerun_src");
  const auto entries = write_corpus(root, 4, 2);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, UpsampleWithAugmentation{}, 77);

  std::string manifests[2];
  for (int round = 0; round < 2; ++round) {
    const fs::path out =
        fresh_dir(round == 0 ? "balance_rerun_a" : "balance_rerun_b");
    const ExecuteResult result =
        execute_balance(plan, entries, root, out, round == 0 ? 1 : 8);
    manifests[round] = write_manifest(result.entries);
  }
  CHECK(manifests[0] == manifests[1]);

  // generated WAV bytes must match as well
  const auto a = slurp_file(fs::path("test_tmp/balance_rerun_a/clips/f4.aug0.wav"));
  const auto b = slurp_file(fs::path("test_tmp/balance_rerun_b/clips/f4.aug0.wav"));
  REQUIRE(!a.empty());
  CHECK(a == b);
}

TEST_CASE("executing over an existing output collides") {
  const fs::path root = fresh_dir("balance_collide_src");
  const fs::path out = fresh_dir("balance_collide_out");
  const auto entries = write_corpus(root, 2, 2);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 1);
  execute_balance(plan, entries, root, out);
  CHECK_THROWS_WITH_AS(execute_balance(plan, entries, root, out),
                       doctest::Contains("collision-error"), InputError);
}

TEST_CASE("a plan referencing missing audio is an io error") {
  const fs::path root = fresh_dir("balance_missing_src");
  const fs::path out = fresh_dir("balance_missing_out");
  const auto entries = synthetic_entries(2, 2);
  const CorpusStats stats = corpus_stats(entries);
  const BalancePlan plan = plan_balance(stats, entries, DownsampleToMin{}, 1);
  CHECK_THROWS_WITH_AS(execute_balance(plan, entries, root, out),
                       doctest::Contains("io-error"), InputError);
}

}  // TEST_SUITE
