// voxbal: corpus balancing and demographic bias audit for speech datasets.
//
// Subcommands: inspect | classify | augment | balance | evaluate
// Exit codes: 0 success, 2 input/schema error, 3 infeasible request,
// 1 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voxbal/audio_io.hpp"
#include "voxbal/augment.hpp"
#include "voxbal/balance.hpp"
#include "voxbal/corpus.hpp"
#include "voxbal/errors.hpp"
#include "voxbal/metrics.hpp"
#include "voxbal/parallel.hpp"
#include "voxbal/pitch.hpp"
#include "voxbal/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voxbal;

namespace {

std::string format_fixed(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("io-error", "cannot write " + path.string());
  out << content;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("io-error", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

// "--bands male=85:155,female=165:255"
GenderBands parse_bands(const std::string& text) {
  GenderBands bands;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    const auto colon = part.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw InputError("invalid-bands", "expected name=lo:hi, got: " + part);
    const std::string name = part.substr(0, eq);
    double lo, hi;
    try {
      lo = std::stod(part.substr(eq + 1, colon - eq - 1));
      hi = std::stod(part.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("invalid-bands", "bad band bounds in: " + part);
    }
    if (name == "male") {
      bands.male_lo = lo;
      bands.male_hi = hi;
    } else if (name == "female") {
      bands.female_lo = lo;
      bands.female_hi = hi;
    } else {
      throw InputError("invalid-bands", "unknown band name: " + name);
    }
  }
  bands.validate();
  return bands;
}

// "downsample" | "upsample" | "target:male=0.5,female=0.5"
BalanceStrategy parse_strategy(const std::string& text) {
  if (text == "downsample") return DownsampleToMin{};
  if (text == "upsample") return UpsampleWithAugmentation{};
  if (text.rfind("target:", 0) == 0) {
    TargetProportions tp;
    for (const auto& part : split(text.substr(7), ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos)
        throw InputError("invalid-strategy", "expected stratum=proportion, got: " + part);
      try {
        tp.proportions[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
      } catch (const std::exception&) {
        throw InputError("invalid-strategy", "bad proportion in: " + part);
      }
    }
    return tp;
  }
  throw InputError("invalid-strategy",
                   "strategy must be downsample, upsample, or target:<name=p,...>");
}

// Shared flags. A JSON config file mirrors the flags; explicit command-line
// values win.
struct CommonOpts {
  std::string manifest;
  std::string audio_root = ".";
  std::string out;
  std::string config;
  std::string strategy = "upsample";
  std::string bands = "male=85:155,female=165:255";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool strict = false;
  bool include_unlabeled = false;
  bool by_accent = false;
  bool seed_from_config = false;
  double f0_min = 60.0;
  double f0_max = 400.0;
  double rms_floor = 0.01;
  double clarity_floor = 0.3;
  double frame_ms = 40.0;
  double hop_ms = 10.0;

  CLI::Option* manifest_opt = nullptr;
  CLI::Option* audio_root_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* strategy_opt = nullptr;
  CLI::Option* bands_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* strict_opt = nullptr;
  CLI::Option* include_unlabeled_opt = nullptr;
  CLI::Option* by_accent_opt = nullptr;
  CLI::Option* f0_min_opt = nullptr;
  CLI::Option* f0_max_opt = nullptr;
  CLI::Option* rms_floor_opt = nullptr;
  CLI::Option* clarity_floor_opt = nullptr;
  CLI::Option* frame_ms_opt = nullptr;
  CLI::Option* hop_ms_opt = nullptr;

  void add_io_flags(CLI::App* cmd) {
    manifest_opt = cmd->add_option("--manifest", manifest, "manifest TSV path");
    audio_root_opt = cmd->add_option("--audio-root", audio_root, "directory of WAV files");
    out_opt = cmd->add_option("--out", out, "output directory");
    cmd->add_option("--config", config, "JSON config file mirroring the flags");
    jobs_opt = cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    strict_opt = cmd->add_flag("--strict", strict, "fail on the first bad row or file");
  }

  void add_pitch_flags(CLI::App* cmd) {
    bands_opt = cmd->add_option("--bands", bands, "bands, e.g. male=85:155,female=165:255");
    f0_min_opt = cmd->add_option("--f0-min", f0_min, "pitch search floor, Hz");
    f0_max_opt = cmd->add_option("--f0-max", f0_max, "pitch search ceiling, Hz");
    rms_floor_opt = cmd->add_option("--rms-floor", rms_floor, "voicing rms floor");
    clarity_floor_opt =
        cmd->add_option("--clarity-floor", clarity_floor, "voicing clarity floor");
    frame_ms_opt = cmd->add_option("--frame-ms", frame_ms, "analysis frame, ms");
    hop_ms_opt = cmd->add_option("--hop-ms", hop_ms, "analysis hop, ms");
  }

  void add_balance_flags(CLI::App* cmd) {
    seed_opt = cmd->add_option("--seed", seed, "RNG seed (required; no wall-clock default)");
    strategy_opt = cmd->add_option("--strategy", strategy,
                                   "downsample | upsample | target:<name=p,...>");
    include_unlabeled_opt = cmd->add_flag("--include-unlabeled", include_unlabeled,
                                          "equalize the unlabeled stratum too");
    by_accent_opt = cmd->add_flag("--by-accent", by_accent, "stratify by gender x accent");
  }

  // Fills in values from the config file for flags the user did not pass.
  void apply_config() {
    if (config.empty()) return;
    json cfg;
    try {
      cfg = json::parse(read_text_file(config));
    } catch (const json::exception& e) {
      throw InputError("invalid-config", std::string("bad config JSON: ") + e.what());
    }
    const auto merge = [&cfg](CLI::Option* opt, const char* key, auto& value) {
      if (opt && opt->count() == 0 && cfg.contains(key))
        value = cfg.at(key).get<std::decay_t<decltype(value)>>();
    };
    merge(manifest_opt, "manifest", manifest);
    merge(audio_root_opt, "audio_root", audio_root);
    merge(out_opt, "out", out);
    merge(strategy_opt, "strategy", strategy);
    merge(bands_opt, "bands", bands);
    merge(seed_opt, "seed", seed);
    merge(jobs_opt, "jobs", jobs);
    merge(strict_opt, "strict", strict);
    merge(include_unlabeled_opt, "include_unlabeled", include_unlabeled);
    merge(by_accent_opt, "by_accent", by_accent);
    if (cfg.contains("seed") && seed_opt && seed_opt->count() == 0) seed_from_config = true;
    if (cfg.contains("pitch")) {
      const json& p = cfg.at("pitch");
      if (f0_min_opt && f0_min_opt->count() == 0 && p.contains("f0_min"))
        f0_min = p.at("f0_min").get<double>();
      if (f0_max_opt && f0_max_opt->count() == 0 && p.contains("f0_max"))
        f0_max = p.at("f0_max").get<double>();
      if (rms_floor_opt && rms_floor_opt->count() == 0 && p.contains("rms_floor"))
        rms_floor = p.at("rms_floor").get<double>();
      if (clarity_floor_opt && clarity_floor_opt->count() == 0 && p.contains("clarity_floor"))
        clarity_floor = p.at("clarity_floor").get<double>();
    }
    if (cfg.contains("frame")) {
      const json& f = cfg.at("frame");
      if (frame_ms_opt && frame_ms_opt->count() == 0 && f.contains("frame_ms"))
        frame_ms = f.at("frame_ms").get<double>();
      if (hop_ms_opt && hop_ms_opt->count() == 0 && f.contains("hop_ms"))
        hop_ms = f.at("hop_ms").get<double>();
    }
  }

  void require(const char* name, const std::string& value) const {
    if (value.empty())
      throw InputError("missing-flag", std::string("--") + name + " is required");
  }
};

Manifest load_manifest(const CommonOpts& opts) {
  opts.require("manifest", opts.manifest);
  Manifest manifest = parse_manifest_file(opts.manifest, opts.audio_root);
  for (const auto& err : manifest.row_errors) {
    if (opts.strict)
      throw InputError("row-error",
                       "line " + std::to_string(err.line) + ": " + err.message);
    std::cerr << "warning: row-error: line " << err.line << ": " << err.message << "\n";
  }
  return manifest;
}

int run_inspect(CommonOpts& opts) {
  const Manifest manifest = load_manifest(opts);
  const CorpusStats stats = corpus_stats(manifest.entries, opts.by_accent);
  std::cout << dump_report(stats_to_json(stats));
  return 0;
}

struct ClassifyRow {
  std::string path;
  std::optional<double> median_f0;
  BandLabel label = BandLabel::Unclassified;
  Gender truth = Gender::Unlabeled;
  std::string error;
};

int run_classify(CommonOpts& opts) {
  opts.require("out", opts.out);
  const Manifest manifest = load_manifest(opts);
  if (manifest.entries.empty()) throw InputError("empty-corpus", "no manifest entries");
  const GenderBands bands = parse_bands(opts.bands);

  std::vector<ClassifyRow> rows(manifest.entries.size());
  parallel_for(manifest.entries.size(), opts.jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    ClassifyRow& row = rows[i];
    row.path = entry.clip_path;
    row.truth = entry.gender;
    try {
      const AudioClip clip = mixdown(load_wav_file(fs::path(opts.audio_root) / entry.clip_path));
      PitchConfig cfg;
      cfg.f0_min = opts.f0_min;
      cfg.f0_max = opts.f0_max;
      cfg.voicing_rms_floor = opts.rms_floor;
      cfg.clarity_floor = opts.clarity_floor;
      cfg.frame = FrameParams::for_rate(clip.sample_rate, opts.frame_ms, opts.hop_ms,
                                        Window::Rectangular);
      const PitchTrack track = estimate_pitch(clip, cfg);
      const BandResult result = classify_band(track, bands);
      row.median_f0 = result.median_f0;
      row.label = result.label;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  std::string csv = "path,median_f0_hz,label,true_gender\n";
  std::vector<std::pair<BandLabel, BandLabel>> labeled;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      if (opts.strict) throw InputError("undecodable-file", row.path + ": " + row.error);
      std::cerr << "warning: skipping " << row.path << ": " << row.error << "\n";
      continue;
    }
    csv += row.path;
    csv += ',';
    if (row.median_f0) csv += format_fixed(*row.median_f0, 3);
    csv += ',';
    csv += band_label_name(row.label);
    csv += ',';
    csv += row.truth == Gender::Unlabeled ? "" : gender_name(row.truth);
    csv += '\n';
    if (row.truth == Gender::Male)
      labeled.push_back({BandLabel::Male, row.label});
    else if (row.truth == Gender::Female)
      labeled.push_back({BandLabel::Female, row.label});
  }
  write_text_file(fs::path(opts.out) / "classify.csv", csv);
  if (!labeled.empty()) {
    const ClassifierReport report = evaluate_classifier(labeled);
    write_text_file(fs::path(opts.out) / "classify_accuracy.json",
                    dump_report(classifier_report_to_json(report)));
  }
  return 0;
}

int run_balance(CommonOpts& opts) {
  opts.require("out", opts.out);
  if (opts.seed_opt && opts.seed_opt->count() == 0 && !opts.seed_from_config)
    throw InputError("missing-flag", "--seed is required (reports must be reproducible)");
  const Manifest manifest = load_manifest(opts);
  const CorpusStats before = corpus_stats(manifest.entries, opts.by_accent);
  const BalanceStrategy strategy = parse_strategy(opts.strategy);
  BalanceOptions options;
  options.include_unlabeled = opts.include_unlabeled;
  options.by_accent = opts.by_accent;
  const BalancePlan plan =
      plan_balance(before, manifest.entries, strategy, opts.seed, options);

  const fs::path out_dir(opts.out);
  write_text_file(out_dir / "plan.json", dump_report(plan.to_json()));
  const ExecuteResult result =
      execute_balance(plan, manifest.entries, opts.audio_root, out_dir, opts.jobs);
  write_text_file(out_dir / "manifest_balanced.tsv", write_manifest(result.entries));
  const CorpusStats after = corpus_stats(result.entries, opts.by_accent);
  write_text_file(out_dir / "stats_before.json", dump_report(stats_to_json(before)));
  write_text_file(out_dir / "stats_after.json", dump_report(stats_to_json(after)));

  // Only content-affecting settings are echoed: output location and worker
  // count must not change report bytes.
  const json config_echo = {{"manifest", opts.manifest},
                            {"audio_root", opts.audio_root},
                            {"seed", opts.seed},
                            {"strategy", opts.strategy},
                            {"include_unlabeled", opts.include_unlabeled},
                            {"by_accent", opts.by_accent}};
  const json audit = make_audit_report(config_echo, before, after);
  write_text_file(out_dir / "audit_report.json", dump_report(audit));
  std::cout << dump_report(audit);
  return 0;
}

int run_evaluate(CommonOpts& opts, const std::string& pairs_path) {
  if (pairs_path.empty()) throw InputError("missing-flag", "--pairs is required");
  const std::string text = read_text_file(pairs_path);

  std::vector<EvalPair> pairs;
  std::size_t pos = 0;
  long line_no = 0;
  std::optional<std::size_t> col_ref, col_hyp, col_stratum;
  std::size_t header_cols = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      const auto cells = split(line, '\t');
      header_cols = cells.size();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "reference") col_ref = i;
        else if (cells[i] == "hypothesis") col_hyp = i;
        else if (cells[i] == "stratum") col_stratum = i;
      }
      if (!col_ref) throw InputError("schema-error", "reference");
      if (!col_hyp) throw InputError("schema-error", "hypothesis");
      if (!col_stratum) throw InputError("schema-error", "stratum");
      continue;
    }
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const auto cells = split(line, '\t');
    if (cells.size() != header_cols)
      throw InputError("row-error", "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header_cols) + " cells");
    EvalPair pair;
    pair.reference = cells[*col_ref];
    pair.hypothesis = cells[*col_hyp];
    pair.stratum = cells[*col_stratum].empty() ? "unlabeled" : cells[*col_stratum];
    if (word_tokens(pair.reference).empty())
      throw InputError("empty-reference", "line " + std::to_string(line_no) +
                                              ": reference column is empty");
    pairs.push_back(std::move(pair));
  }

  const GroupMetrics metrics = group_metrics(pairs, opts.jobs);
  std::cout << dump_report(group_metrics_to_json(metrics));
  if (!opts.out.empty()) {
    std::string csv = "stratum,wer,cer\n";
    for (const auto& [name, sm] : metrics.per_stratum)
      csv += name + "," + format_fixed(sm.wer) + "," + format_fixed(sm.cer) + "\n";
    write_text_file(fs::path(opts.out) / "evaluate_groups.csv", csv);
    write_text_file(fs::path(opts.out) / "evaluate.json",
                    dump_report(group_metrics_to_json(metrics)));
  }
  return 0;
}

struct AugmentOpts {
  std::string in_path;
  std::string out_path;
  std::string op;
  double semitones = 2.0;
  double rate = 1.1;
  double snr_db = 20.0;
  double rt60 = 0.3;
  double wet = 0.3;
  std::uint64_t seed = 0;
};

int run_augment(const AugmentOpts& opts) {
  AugmentSpec spec;
  spec.seed = opts.seed;
  if (opts.op == "pitch")
    spec.op = AugmentSpec::PitchShift{opts.semitones};
  else if (opts.op == "stretch")
    spec.op = AugmentSpec::TimeStretch{opts.rate};
  else if (opts.op == "noise")
    spec.op = AugmentSpec::Noise{opts.snr_db};
  else if (opts.op == "reverb")
    spec.op = AugmentSpec::Reverb{opts.rt60, opts.wet};
  else
    throw InputError("invalid-op", "op must be pitch, stretch, noise, or reverb");

  const WavInfo info = probe_wav_file(opts.in_path);
  const AudioClip clip = mixdown(load_wav_file(opts.in_path));
  const AudioClip augmented = apply_augment(clip, spec);
  save_wav_file(opts.out_path, augmented, info.format.format);
  std::cout << dump_report(spec.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech corpus balancing and demographic bias audit"};
  app.require_subcommand(1);

  CommonOpts inspect_opts, classify_opts, balance_opts, evaluate_opts;
  AugmentOpts augment_opts;
  std::string pairs_path;

  CLI::App* inspect = app.add_subcommand("inspect", "corpus distribution statistics");
  inspect_opts.add_io_flags(inspect);
  inspect->add_flag("--by-accent", inspect_opts.by_accent, "stratify by gender x accent");

  CLI::App* classify = app.add_subcommand("classify", "pitch-band gender classification");
  classify_opts.add_io_flags(classify);
  classify_opts.add_pitch_flags(classify);

  CLI::App* augment = app.add_subcommand("augment", "apply one augmentation to a WAV");
  augment->add_option("--in", augment_opts.in_path, "input WAV")->required();
  augment->add_option("--out-file", augment_opts.out_path, "output WAV")->required();
  augment->add_option("--op", augment_opts.op, "pitch | stretch | noise | reverb")->required();
  augment->add_option("--semitones", augment_opts.semitones, "pitch shift amount");
  augment->add_option("--rate", augment_opts.rate, "stretch rate");
  augment->add_option("--snr", augment_opts.snr_db, "noise SNR, dB");
  augment->add_option("--rt60", augment_opts.rt60, "reverb decay time, s");
  augment->add_option("--wet", augment_opts.wet, "reverb wet mix, [0,1]");
  augment->add_option("--seed", augment_opts.seed, "RNG seed");

  CLI::App* balance = app.add_subcommand("balance", "plan and execute corpus balancing");
  balance_opts.add_io_flags(balance);
  balance_opts.add_balance_flags(balance);

  CLI::App* evaluate = app.add_subcommand("evaluate", "group WER/CER from a pairs TSV");
  evaluate_opts.add_io_flags(evaluate);
  evaluate->add_option("--pairs", pairs_path, "TSV of reference/hypothesis/stratum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (inspect->parsed()) {
      inspect_opts.apply_config();
      return run_inspect(inspect_opts);
    }
    if (classify->parsed()) {
      classify_opts.apply_config();
      return run_classify(classify_opts);
    }
    if (augment->parsed()) return run_augment(augment_opts);
    if (balance->parsed()) {
      balance_opts.apply_config();
      return run_balance(balance_opts);
    }
    if (evaluate->parsed()) {
      evaluate_opts.apply_config();
      return run_evaluate(evaluate_opts, pairs_path);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
