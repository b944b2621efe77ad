// Python bindings for the voxbal core: audio I/O, DSP, pitch-band
// classification, augmentation, corpus balancing, and WER/CER metrics.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "voxbal/audio_io.hpp"
#include "voxbal/augment.hpp"
#include "voxbal/balance.hpp"
#include "voxbal/corpus.hpp"
#include "voxbal/dsp.hpp"
#include "voxbal/metrics.hpp"
#include "voxbal/pitch.hpp"
#include "voxbal/report.hpp"

namespace py = pybind11;
using namespace voxbal;

namespace {

AudioClip clip_from_numpy(py::array_t<float, py::array::c_style | py::array::forcecast> array,
                          int sample_rate) {
  const py::buffer_info info = array.request();
  AudioClip clip;
  clip.sample_rate = sample_rate;
  if (info.ndim == 1) {
    const float* data = static_cast<const float*>(info.ptr);
    clip.samples.emplace_back(data, data + info.shape[0]);
  } else if (info.ndim == 2) {
    const float* data = static_cast<const float*>(info.ptr);
    const auto channels = static_cast<std::size_t>(info.shape[0]);
    const auto frames = static_cast<std::size_t>(info.shape[1]);
    for (std::size_t c = 0; c < channels; ++c)
      clip.samples.emplace_back(data + c * frames, data + (c + 1) * frames);
  } else {
    throw InputError("invalid-clip", "expected a 1-D or 2-D sample array");
  }
  for (auto& ch : clip.samples)
    for (auto& s : ch) s = std::clamp(s, -1.0f, 1.0f);
  return clip;
}

py::array_t<float> clip_to_numpy(const AudioClip& clip) {
  const auto channels = static_cast<py::ssize_t>(clip.channels());
  const auto frames = static_cast<py::ssize_t>(clip.length());
  py::array_t<float> out({channels, frames});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t c = 0; c < channels; ++c)
    for (py::ssize_t i = 0; i < frames; ++i)
      view(c, i) = clip.samples[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
  return out;
}

Window window_from_name(const std::string& name) {
  if (name == "hann") return Window::Hann;
  if (name == "rectangular") return Window::Rectangular;
  throw InputError("invalid-frame", "window must be 'hann' or 'rectangular'");
}

SampleFormat format_from_name(const std::string& name) {
  if (name == "int16") return SampleFormat::Int16;
  if (name == "float32") return SampleFormat::Float32;
  throw InputError("invalid-format", "format must be 'int16' or 'float32'");
}

GenderBands bands_from_args(std::pair<double, double> male, std::pair<double, double> female) {
  GenderBands bands{male.first, male.second, female.first, female.second};
  bands.validate();
  return bands;
}

BalanceStrategy strategy_from_args(const std::string& name,
                                   const std::optional<std::map<std::string, double>>& targets) {
  if (name == "downsample") return DownsampleToMin{};
  if (name == "upsample") return UpsampleWithAugmentation{};
  if (name == "target") {
    if (!targets)
      throw InputError("invalid-strategy", "strategy 'target' needs target proportions");
    return TargetProportions{*targets};
  }
  throw InputError("invalid-strategy", "strategy must be downsample, upsample, or target");
}

py::dict stats_to_dict(const CorpusStats& stats) {
  py::dict out;
  out["total"] = stats.total;
  out["counts"] = stats.counts;
  out["proportions"] = stats.proportions;
  return out;
}

py::dict alignment_to_dict(const AlignmentResult& a) {
  py::dict out;
  out["substitutions"] = a.substitutions;
  out["deletions"] = a.deletions;
  out["insertions"] = a.insertions;
  out["hits"] = a.hits;
  out["reference_length"] = a.reference_length;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "speech corpus balancing and demographic bias audit";
  m.attr("__version__") = kToolVersion;

  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<AudioClip>(m, "AudioClip")
      .def(py::init(&clip_from_numpy), py::arg("samples"), py::arg("sample_rate"),
           "Build a clip from a float array (1-D mono or 2-D channels x frames), "
           "clamped to [-1, 1].")
      .def_readonly("sample_rate", &AudioClip::sample_rate)
      .def_property_readonly("channels", &AudioClip::channels)
      .def_property_readonly("duration_s", &AudioClip::duration_s)
      .def("__len__", &AudioClip::length)
      .def("numpy", &clip_to_numpy, "Samples as a (channels, frames) float32 array.");

  m.def("decode_wav", [](py::bytes data) {
    const std::string raw = data;
    return decode_wav(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
  });
  m.def(
      "encode_wav",
      [](const AudioClip& clip, const std::string& format) {
        const auto bytes = encode_wav(clip, format_from_name(format));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("clip"), py::arg("format") = "int16");
  m.def("load_wav", &load_wav_file, py::arg("path"));
  m.def(
      "save_wav",
      [](const std::filesystem::path& path, const AudioClip& clip, const std::string& format) {
        save_wav_file(path, clip, format_from_name(format));
      },
      py::arg("path"), py::arg("clip"), py::arg("format") = "int16");
  m.def("probe_wav", [](const std::filesystem::path& path) {
    const WavInfo info = probe_wav_file(path);
    py::dict out;
    out["sample_rate"] = info.format.sample_rate;
    out["channels"] = info.format.channels;
    out["frames"] = info.frames;
    out["duration_s"] = info.duration_s;
    out["format"] = info.format.format == SampleFormat::Int16 ? "int16" : "float32";
    return out;
  });

  m.def("mixdown", &mixdown);
  m.def(
      "resample",
      [](const AudioClip& clip, int target_rate, const std::string& quality) {
        return resample(clip, target_rate,
                        quality == "linear" ? ResampleQuality::Linear
                                            : ResampleQuality::WindowedSinc);
      },
      py::arg("clip"), py::arg("target_rate"), py::arg("quality") = "sinc");

  m.def(
      "dft_magnitude",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> frame,
         const std::string& window) {
        const py::buffer_info info = frame.request();
        if (info.ndim != 1) throw InputError("invalid-frame", "expected a 1-D frame");
        const double* data = static_cast<const double*>(info.ptr);
        const auto mags = dft_magnitude(
            std::span<const double>(data, static_cast<std::size_t>(info.shape[0])),
            window_from_name(window));
        return py::array_t<double>(static_cast<py::ssize_t>(mags.size()), mags.data());
      },
      py::arg("frame"), py::arg("window") = "rectangular");
  m.def(
      "spectrogram",
      [](const AudioClip& clip, int frame_len, int hop, const std::string& window) {
        const Spectrogram spec =
            spectrogram(clip, FrameParams{frame_len, hop, window_from_name(window)});
        py::array_t<double> out({static_cast<py::ssize_t>(spec.frame_count()),
                                 static_cast<py::ssize_t>(spec.bins())});
        auto view = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < view.shape(0); ++i)
          for (py::ssize_t k = 0; k < view.shape(1); ++k)
            view(i, k) = spec.magnitudes[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        return py::make_tuple(out, spec.bin_hz);
      },
      py::arg("clip"), py::arg("frame_len") = 1024, py::arg("hop") = 512,
      py::arg("window") = "hann", "Returns (magnitudes, bin_hz).");
  m.def(
      "time_features",
      [](const AudioClip& clip, int frame_len, int hop) {
        const TimeFeatures f = time_features(clip, FrameParams{frame_len, hop, Window::Rectangular});
        return py::make_tuple(
            py::array_t<double>(static_cast<py::ssize_t>(f.rms.size()), f.rms.data()),
            py::array_t<double>(static_cast<py::ssize_t>(f.peak.size()), f.peak.data()));
      },
      py::arg("clip"), py::arg("frame_len") = 400, py::arg("hop") = 160,
      "Returns per-frame (rms, peak).");

  py::class_<PitchTrack>(m, "PitchTrack")
      .def_property_readonly("f0",
                             [](const PitchTrack& t) {
                               return py::array_t<double>(
                                   static_cast<py::ssize_t>(t.f0.size()), t.f0.data());
                             })
      .def_property_readonly("clarity",
                             [](const PitchTrack& t) {
                               return py::array_t<double>(
                                   static_cast<py::ssize_t>(t.clarity.size()),
                                   t.clarity.data());
                             })
      .def_property_readonly("voiced",
                             [](const PitchTrack& t) {
                               return std::vector<bool>(t.voiced.begin(), t.voiced.end());
                             })
      .def("voiced_count", &PitchTrack::voiced_count)
      .def("median_f0", [](const PitchTrack& t) -> py::object {
        const auto median = t.median_f0();
        return median ? py::cast(*median) : py::none();
      });

  m.def(
      "estimate_pitch",
      [](const AudioClip& clip, double f0_min, double f0_max, double rms_floor,
         double clarity_floor) {
        PitchConfig cfg;
        cfg.f0_min = f0_min;
        cfg.f0_max = f0_max;
        cfg.voicing_rms_floor = rms_floor;
        cfg.clarity_floor = clarity_floor;
        return estimate_pitch(clip, cfg);
      },
      py::arg("clip"), py::arg("f0_min") = 60.0, py::arg("f0_max") = 400.0,
      py::arg("rms_floor") = 0.01, py::arg("clarity_floor") = 0.3);

  m.def(
      "classify_band",
      [](const PitchTrack& track, std::pair<double, double> male,
         std::pair<double, double> female) {
        const BandResult result = classify_band(track, bands_from_args(male, female));
        return py::make_tuple(std::string(band_label_name(result.label)),
                              result.median_f0 ? py::cast(*result.median_f0)
                                               : py::object(py::none()));
      },
      py::arg("track"), py::arg("male") = std::pair<double, double>(85.0, 155.0),
      py::arg("female") = std::pair<double, double>(165.0, 255.0),
      "Returns (label, median_f0).");

  m.def("evaluate_classifier",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
          std::vector<std::pair<BandLabel, BandLabel>> mapped;
          mapped.reserve(pairs.size());
          for (const auto& [truth, predicted] : pairs)
            mapped.push_back({band_label_from_name(truth), band_label_from_name(predicted)});
          const ClassifierReport report = evaluate_classifier(mapped);
          py::dict out;
          out["total"] = report.total;
          out["correct"] = report.correct;
          out["accuracy"] = report.accuracy;
          py::dict confusion;
          const BandLabel labels[] = {BandLabel::Male, BandLabel::Female,
                                      BandLabel::Unclassified};
          for (BandLabel truth : labels) {
            py::dict row;
            for (BandLabel predicted : labels)
              row[band_label_name(predicted)] =
                  report.confusion[static_cast<int>(truth)][static_cast<int>(predicted)];
            confusion[band_label_name(truth)] = row;
          }
          out["confusion"] = confusion;
          return out;
        });

  m.def("inject_noise", &inject_noise, py::arg("clip"), py::arg("snr_db"), py::arg("seed") = 0);
  m.def("time_stretch", &time_stretch, py::arg("clip"), py::arg("rate"), py::arg("seed") = 0);
  m.def("pitch_shift", &pitch_shift, py::arg("clip"), py::arg("semitones"), py::arg("seed") = 0);
  m.def("add_reverb", &add_reverb, py::arg("clip"), py::arg("rt60"), py::arg("wet") = 0.3,
        py::arg("seed") = 0);
  m.def("apply_augment_json", [](const AudioClip& clip, const std::string& spec_json) {
    return apply_augment(clip, AugmentSpec::from_json(nlohmann::json::parse(spec_json)));
  });

  py::class_<ManifestEntry>(m, "ManifestEntry")
      .def(py::init<>())
      .def_readwrite("clip_path", &ManifestEntry::clip_path)
      .def_readwrite("transcript", &ManifestEntry::transcript)
      .def_property(
          "gender",
          [](const ManifestEntry& e) { return std::string(gender_name(e.gender)); },
          [](ManifestEntry& e, const std::string& g) { e.gender = gender_from_cell(g); })
      .def_readwrite("accent", &ManifestEntry::accent)
      .def_readwrite("age", &ManifestEntry::age)
      .def_readwrite("duration_s", &ManifestEntry::duration_s)
      .def_readwrite("augment_spec", &ManifestEntry::augment_spec);

  m.def(
      "parse_manifest",
      [](const std::string& tsv, const std::filesystem::path& audio_root) {
        const Manifest manifest = parse_manifest(tsv, audio_root);
        py::list errors;
        for (const auto& err : manifest.row_errors)
          errors.append(py::make_tuple(err.line, err.message));
        return py::make_tuple(manifest.entries, errors);
      },
      py::arg("tsv"), py::arg("audio_root") = std::filesystem::path(),
      "Returns (entries, row_errors).");
  m.def("write_manifest", [](const std::vector<ManifestEntry>& entries) {
    return write_manifest(entries);
  });
  m.def(
      "corpus_stats",
      [](const std::vector<ManifestEntry>& entries, bool by_accent) {
        return stats_to_dict(corpus_stats(entries, by_accent));
      },
      py::arg("entries"), py::arg("by_accent") = false);
  m.def(
      "segment_clip",
      [](const AudioClip& clip, double max_len_s, double silence_rms, double min_silence_s) {
        const SegmentResult r = segment_clip(clip, max_len_s, silence_rms, min_silence_s);
        return py::make_tuple(r.segments, r.used_hard_cuts);
      },
      py::arg("clip"), py::arg("max_len_s"), py::arg("silence_rms") = 0.01,
      py::arg("min_silence_s") = 0.3, "Returns (segments, used_hard_cuts).");

  py::class_<BalancePlan>(m, "BalancePlan")
      .def("to_json", [](const BalancePlan& plan) { return plan.to_json().dump(2); })
      .def_static("from_json", [](const std::string& text) {
        return BalancePlan::from_json(nlohmann::json::parse(text));
      });

  m.def(
      "plan_balance",
      [](const std::vector<ManifestEntry>& entries, const std::string& strategy,
         std::uint64_t seed, bool include_unlabeled, bool by_accent,
         const std::optional<std::map<std::string, double>>& targets) {
        BalanceOptions options;
        options.include_unlabeled = include_unlabeled;
        options.by_accent = by_accent;
        return plan_balance(corpus_stats(entries, by_accent), entries,
                            strategy_from_args(strategy, targets), seed, options);
      },
      py::arg("entries"), py::arg("strategy"), py::arg("seed"),
      py::arg("include_unlabeled") = false, py::arg("by_accent") = false,
      py::arg("targets") = py::none());
  m.def(
      "execute_balance",
      [](const BalancePlan& plan, const std::vector<ManifestEntry>& entries,
         const std::filesystem::path& audio_root, const std::filesystem::path& out_dir,
         int jobs) {
        const ExecuteResult result = execute_balance(plan, entries, audio_root, out_dir, jobs);
        return py::make_tuple(result.entries, result.generated_files);
      },
      py::arg("plan"), py::arg("entries"), py::arg("audio_root"), py::arg("out_dir"),
      py::arg("jobs") = 1, "Returns (balanced_entries, generated_files).");

  m.def("align", [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    return alignment_to_dict(align(ref, hyp));
  });
  m.def("wer", &wer, py::arg("reference"), py::arg("hypothesis"));
  m.def("cer", &cer, py::arg("reference"), py::arg("hypothesis"));
  m.def(
      "group_metrics",
      [](const std::vector<std::tuple<std::string, std::string, std::string>>& rows, int jobs) {
        std::vector<EvalPair> pairs;
        pairs.reserve(rows.size());
        for (const auto& [ref, hyp, stratum] : rows) pairs.push_back({ref, hyp, stratum});
        const GroupMetrics metrics = group_metrics(pairs, jobs);
        py::dict strata;
        for (const auto& [name, sm] : metrics.per_stratum) {
          py::dict entry;
          entry["wer"] = sm.wer;
          entry["cer"] = sm.cer;
          entry["pairs"] = sm.pairs;
          entry["words"] = alignment_to_dict(sm.words);
          entry["chars"] = alignment_to_dict(sm.chars);
          strata[name.c_str()] = entry;
        }
        py::dict out;
        out["per_stratum"] = strata;
        out["bias_gap"] = metrics.bias_gap;
        return out;
      },
      py::arg("pairs"), py::arg("jobs") = 1,
      "pairs: iterable of (reference, hypothesis, stratum).");
}
