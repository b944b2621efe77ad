#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "voxbal/audio_clip.hpp"
#include "voxbal/dsp.hpp"

namespace voxbal {

struct PitchConfig {
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_rms_floor = 0.01;
  double clarity_floor = 0.3;
  // Analysis frames; when unset, 40 ms frames with a 10 ms hop are derived
  // from the clip's rate so the longest candidate lag keeps enough overlap.
  std::optional<FrameParams> frame;

  void validate(int sample_rate) const;
};

struct PitchTrack {
  std::vector<double> f0;       // Hz, meaningful only where voiced
  std::vector<double> clarity;  // [0, 1]
  std::vector<bool> voiced;

  std::size_t frames() const { return f0.size(); }
  std::size_t voiced_count() const;
  // Median F0 over voiced frames; empty when no frame is voiced.
  std::optional<double> median_f0() const;
};

// ASHA average speaking ranges: adult male 85-155 Hz, adult female
// 165-255 Hz, both inclusive.
struct GenderBands {
  double male_lo = 85.0;
  double male_hi = 155.0;
  double female_lo = 165.0;
  double female_hi = 255.0;

  void validate() const;
};

enum class BandLabel { Male, Female, Unclassified };

const char* band_label_name(BandLabel label);
BandLabel band_label_from_name(const std::string& name);

struct BandResult {
  BandLabel label = BandLabel::Unclassified;
  std::optional<double> median_f0;
};

// Per-frame normalized-autocorrelation pitch with parabolic peak refinement.
// A frame is voiced when its rms and its autocorrelation peak pass the
// configured floors.
PitchTrack estimate_pitch(const AudioClip& clip, const PitchConfig& cfg = {});

// Labels the track by which band the median voiced F0 falls into. Medians in
// the gap between bands (or outside both) are Unclassified.
BandResult classify_band(const PitchTrack& track, const GenderBands& bands = {});

struct ClassifierReport {
  long total = 0;
  long correct = 0;
  double accuracy = 0.0;
  // confusion[truth][predicted], indexed by BandLabel order Male, Female,
  // Unclassified.
  std::array<std::array<long, 3>, 3> confusion{};
};

ClassifierReport evaluate_classifier(
    const std::vector<std::pair<BandLabel, BandLabel>>& truth_and_predicted);

}  // namespace voxbal
