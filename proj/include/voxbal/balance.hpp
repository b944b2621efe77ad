#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "voxbal/augment.hpp"
#include "voxbal/corpus.hpp"

#include "json.hpp"

namespace voxbal {

// Equal-inclusion-probability strategies over demographic strata.
struct DownsampleToMin {};
struct UpsampleWithAugmentation {};
struct TargetProportions {
  std::map<std::string, double> proportions;  // stratum -> share, sums to 1
};
using BalanceStrategy =
    std::variant<DownsampleToMin, UpsampleWithAugmentation, TargetProportions>;

std::string strategy_name(const BalanceStrategy& strategy);

struct Duplication {
  std::size_t source = 0;  // index into the input entries
  AugmentSpec spec;
};

struct StratumPlan {
  std::vector<std::size_t> kept;  // indices into the input entries, ascending
  std::vector<Duplication> duplicates;
};

struct BalancePlan {
  std::string strategy;
  std::uint64_t seed = 0;
  bool include_unlabeled = false;
  bool by_accent = false;
  std::map<std::string, StratumPlan> strata;

  nlohmann::json to_json() const;
  static BalancePlan from_json(const nlohmann::json& j);
};

struct BalanceOptions {
  // Unlabeled-gender entries form their own stratum; by default they pass
  // through unchanged instead of being equalized.
  bool include_unlabeled = false;
  bool by_accent = false;
};

// Builds a deterministic keep/duplicate plan. Downsampling picks uniformly
// without replacement; upsampling cycles each stratum's entries round-robin,
// attaching a distinct seeded AugmentSpec (pitch, stretch, or noise drawn
// from fixed grids) to every duplicate.
BalancePlan plan_balance(const CorpusStats& stats, std::span<const ManifestEntry> entries,
                         const BalanceStrategy& strategy, std::uint64_t seed,
                         const BalanceOptions& options = {});

struct ExecuteResult {
  std::vector<ManifestEntry> entries;        // rows of the balanced manifest
  std::vector<std::string> generated_files;  // paths relative to out_dir
};

// Materializes a plan: kept clips are copied under out_dir/clips, duplicates
// are augmented and written as <source-stem>.aug<k>.wav next to them. The
// result is a self-contained corpus rooted at out_dir. Refuses to overwrite
// existing files (collision-error).
ExecuteResult execute_balance(const BalancePlan& plan,
                              std::span<const ManifestEntry> entries,
                              const std::filesystem::path& audio_root,
                              const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace voxbal
