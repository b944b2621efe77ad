#include "voxbal/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxbal/audio_io.hpp"
#include "voxbal/errors.hpp"
#include "voxbal/parallel.hpp"
#include "voxbal/rng.hpp"

namespace voxbal {

namespace {

// Parameter grids for generated AugmentSpecs. The identity value is excluded
// on purpose: a duplicate must differ from its source.
constexpr double kPitchGrid[] = {-2.0, -1.0, 1.0, 2.0};
constexpr double kStretchGrid[] = {0.9, 0.95, 1.05, 1.1};
constexpr double kNoiseGrid[] = {15.0, 20.0, 25.0, 30.0};

AugmentSpec draw_spec(Rng& rng, std::uint64_t spec_seed) {
  AugmentSpec spec;
  spec.seed = spec_seed;
  switch (rng.below(3)) {
    case 0:
      spec.op = AugmentSpec::PitchShift{kPitchGrid[rng.below(4)]};
      break;
    case 1:
      spec.op = AugmentSpec::TimeStretch{kStretchGrid[rng.below(4)]};
      break;
    default:
      spec.op = AugmentSpec::Noise{kNoiseGrid[rng.below(4)]};
      break;
  }
  return spec;
}

// Uniform sample of k indices from `pool` without replacement
// (partial Fisher-Yates), reported in ascending order.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Largest-remainder apportionment of `total` into integer counts matching
// the given proportions as closely as possible.
std::map<std::string, long> apportion(const std::map<std::string, double>& proportions,
                                      long total) {
  std::map<std::string, long> counts;
  std::vector<std::pair<double, std::string>> remainders;
  long assigned = 0;
  for (const auto& [name, p] : proportions) {
    const double exact = p * static_cast<double>(total);
    const long floor_count = static_cast<long>(std::floor(exact));
    counts[name] = floor_count;
    assigned += floor_count;
    remainders.push_back({exact - static_cast<double>(floor_count), name});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // deterministic tie-break by name
  });
  for (long i = 0; i < total - assigned && i < static_cast<long>(remainders.size()); ++i)
    counts[remainders[static_cast<std::size_t>(i)].second] += 1;
  return counts;
}

std::string file_stem(const std::string& rel_path) {
  return std::filesystem::path(rel_path).stem().string();
}

}  // namespace

std::string strategy_name(const BalanceStrategy& strategy) {
  if (std::holds_alternative<DownsampleToMin>(strategy)) return "downsample";
  if (std::holds_alternative<UpsampleWithAugmentation>(strategy)) return "upsample";
  return "target";
}

BalancePlan plan_balance(const CorpusStats& stats, std::span<const ManifestEntry> entries,
                         const BalanceStrategy& strategy, std::uint64_t seed,
                         const BalanceOptions& options) {
  if (static_cast<long>(entries.size()) != stats.total)
    throw InputError("invalid-stats", "stats were computed for a different corpus");

  // Group entry indices by stratum, preserving manifest order.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < entries.size(); ++i)
    groups[stratum_key(entries[i], options.by_accent)].push_back(i);

  const auto is_target = [&](const std::string& name) {
    if (options.include_unlabeled) return true;
    return name != "unlabeled" && name.rfind("unlabeled|", 0) != 0;
  };

  BalancePlan plan;
  plan.strategy = strategy_name(strategy);
  plan.seed = seed;
  plan.include_unlabeled = options.include_unlabeled;
  plan.by_accent = options.by_accent;

  // Pass-through strata keep everything and duplicate nothing.
  for (const auto& [name, indices] : groups)
    plan.strata[name].kept = indices;

  std::map<std::string, long> targets;
  if (const auto* tp = std::get_if<TargetProportions>(&strategy)) {
    double sum = 0.0;
    for (const auto& [name, p] : tp->proportions) {
      if (p < 0.0) throw InputError("invalid-strategy", "negative target proportion");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InputError("invalid-strategy", "target proportions must sum to 1");
    long named_total = 0;
    for (const auto& [name, p] : tp->proportions) {
      const auto it = groups.find(name);
      const long have = it == groups.end() ? 0 : static_cast<long>(it->second.size());
      if (have == 0 && p > 0.0)
        throw InfeasibleError("infeasible-target",
                              "stratum " + name + " has no entries to reach its target");
      named_total += have;
    }
    targets = apportion(tp->proportions, named_total);
  } else {
    std::vector<long> counts;
    for (const auto& [name, indices] : groups)
      if (is_target(name) && !indices.empty())
        counts.push_back(static_cast<long>(indices.size()));
    if (counts.size() < 2)
      throw InfeasibleError("degenerate-corpus",
                            "equalizing needs at least two nonzero strata");
    const bool down = std::holds_alternative<DownsampleToMin>(strategy);
    const long goal = down ? *std::min_element(counts.begin(), counts.end())
                           : *std::max_element(counts.begin(), counts.end());
    for (const auto& [name, indices] : groups)
      if (is_target(name) && !indices.empty()) targets[name] = goal;
  }

  // Seeds for generated specs come from one global counter so no two
  // duplicates can ever share one.
  std::uint64_t spec_counter = 0;
  for (const auto& [name, goal] : targets) {
    const auto& indices = groups[name];
    const long have = static_cast<long>(indices.size());
    StratumPlan& sp = plan.strata[name];
    if (goal < have) {
      Rng rng(derive_seed(seed, "keep:" + name, 0));
      sp.kept = sample_without_replacement(indices, static_cast<std::size_t>(goal), rng);
    } else if (goal > have) {
      Rng rng(derive_seed(seed, "dup:" + name, 0));
      for (long k = 0; k < goal - have; ++k) {
        Duplication dup;
        dup.source = indices[static_cast<std::size_t>(k % have)];
        dup.spec = draw_spec(rng, derive_seed(seed, "spec", spec_counter++));
        sp.duplicates.push_back(dup);
      }
    }
  }
  return plan;
}

nlohmann::json BalancePlan::to_json() const {
  nlohmann::json strata_json = nlohmann::json::object();
  for (const auto& [name, sp] : strata) {
    nlohmann::json dup_json = nlohmann::json::array();
    for (const auto& dup : sp.duplicates)
      dup_json.push_back({{"source", dup.source}, {"spec", dup.spec.to_json()}});
    strata_json[name] = {{"kept", sp.kept}, {"duplicates", dup_json}};
  }
  return nlohmann::json{{"schema_version", 1},
                        {"strategy", strategy},
                        {"seed", seed},
                        {"include_unlabeled", include_unlabeled},
                        {"by_accent", by_accent},
                        {"strata", strata_json}};
}

BalancePlan BalancePlan::from_json(const nlohmann::json& j) {
  try {
    BalancePlan plan;
    plan.strategy = j.at("strategy").get<std::string>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.include_unlabeled = j.value("include_unlabeled", false);
    plan.by_accent = j.value("by_accent", false);
    for (const auto& [name, sp_json] : j.at("strata").items()) {
      StratumPlan sp;
      sp.kept = sp_json.at("kept").get<std::vector<std::size_t>>();
      for (const auto& dup_json : sp_json.at("duplicates")) {
        Duplication dup;
        dup.source = dup_json.at("source").get<std::size_t>();
        dup.spec = AugmentSpec::from_json(dup_json.at("spec"));
        sp.duplicates.push_back(std::move(dup));
      }
      plan.strata[name] = std::move(sp);
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid-plan", std::string("bad balance plan: ") + e.what());
  }
}

ExecuteResult execute_balance(const BalancePlan& plan,
                              std::span<const ManifestEntry> entries,
                              const std::filesystem::path& audio_root,
                              const std::filesystem::path& out_dir, int jobs) {
  namespace fs = std::filesystem;
  const fs::path clips_dir = out_dir / "clips";
  fs::create_directories(clips_dir);

  struct Task {
    std::size_t source;
    AugmentSpec spec;
    std::string out_rel;  // relative to out_dir
  };

  // Validate references and lay out the output before any file is written.
  std::vector<std::size_t> kept;
  std::vector<Task> tasks;
  std::map<std::size_t, int> per_source_counter;
  for (const auto& [name, sp] : plan.strata) {
    for (std::size_t idx : sp.kept) {
      if (idx >= entries.size())
        throw InputError("invalid-plan", "kept index out of range in stratum " + name);
      kept.push_back(idx);
    }
    for (const auto& dup : sp.duplicates) {
      if (dup.source >= entries.size())
        throw InputError("invalid-plan", "duplicate source out of range in stratum " + name);
      const auto& source = entries[dup.source];
      const fs::path rel_dir = fs::path(source.clip_path).parent_path();
      const int k = per_source_counter[dup.source]++;
      const std::string file_name =
          file_stem(source.clip_path) + ".aug" + std::to_string(k) + ".wav";
      tasks.push_back({dup.source, dup.spec,
                       (fs::path("clips") / rel_dir / file_name).generic_string()});
    }
  }
  std::sort(kept.begin(), kept.end());

  ExecuteResult result;

  // Kept entries: copy the audio under out_dir/clips and point the manifest
  // at the copy, so the balanced corpus is self-contained.
  for (std::size_t idx : kept) {
    const auto& source = entries[idx];
    const fs::path src = audio_root / source.clip_path;
    const fs::path rel = fs::path("clips") / source.clip_path;
    const fs::path dst = out_dir / rel;
    if (!fs::exists(src))
      throw InputError("io-error", "missing source file " + src.string());
    if (fs::exists(dst))
      throw InputError("collision-error", "output already exists: " + dst.string());
    fs::create_directories(dst.parent_path());
    fs::copy_file(src, dst);
    ManifestEntry row = source;
    row.clip_path = rel.generic_string();
    result.entries.push_back(std::move(row));
  }

  // Generated entries: decode, mix down, augment, encode. Each task derives
  // everything from (source clip, spec), so any job count gives identical
  // bytes.
  std::vector<ManifestEntry> generated(tasks.size());
  for (const auto& task : tasks) {
    const fs::path dst = out_dir / task.out_rel;
    if (fs::exists(dst))
      throw InputError("collision-error", "output already exists: " + dst.string());
    fs::create_directories(dst.parent_path());
  }
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto& source = entries[task.source];
    const fs::path src = audio_root / source.clip_path;
    if (!fs::exists(src))
      throw InputError("io-error", "missing source file " + src.string());
    AudioClip clip = mixdown(load_wav_file(src));
    AudioClip augmented = apply_augment(clip, task.spec);
    save_wav_file(out_dir / task.out_rel, augmented, SampleFormat::Int16);

    ManifestEntry row = source;
    row.clip_path = task.out_rel;
    row.duration_s = augmented.duration_s();
    row.augment_spec = task.spec.to_json().dump();
    generated[i] = std::move(row);
  });
  for (auto& row : generated) result.entries.push_back(std::move(row));
  for (const auto& task : tasks) result.generated_files.push_back(task.out_rel);
  return result;
}

}  // namespace voxbal
