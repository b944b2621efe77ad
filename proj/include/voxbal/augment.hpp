#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "voxbal/audio_clip.hpp"

#include "json.hpp"

namespace voxbal {

// The four waveform-level augmentations, parameterized and seeded so a batch
// run is reproducible bit for bit.
struct AugmentSpec {
  struct PitchShift {
    double semitones = 0.0;  // in [-12, 12]
  };
  struct TimeStretch {
    double rate = 1.0;  // in [0.25, 4.0]; 2.0 halves the duration
  };
  struct Noise {
    double snr_db = 20.0;
  };
  struct Reverb {
    double rt60 = 0.3;  // seconds
    double wet = 0.3;   // [0, 1]
  };

  std::variant<PitchShift, TimeStretch, Noise, Reverb> op = PitchShift{};
  std::uint64_t seed = 0;

  std::string op_name() const;
  nlohmann::json to_json() const;
  static AugmentSpec from_json(const nlohmann::json& j);
};

// Adds white Gaussian noise scaled so the measured signal-to-noise power
// ratio equals snr_db; output clamped to [-1, 1].
AudioClip inject_noise(const AudioClip& clip, double snr_db, std::uint64_t seed);

// WSOLA time-scale modification: output length = round(len / rate), pitch
// preserved. 30 ms segments, 10 ms search radius.
AudioClip time_stretch(const AudioClip& clip, double rate, std::uint64_t seed);

// Resample-then-stretch pitch shift: duration preserved within one hop, F0
// scaled by 2^(semitones/12).
AudioClip pitch_shift(const AudioClip& clip, double semitones, std::uint64_t seed);

// Convolves with a seeded synthetic impulse response (white noise under an
// exponential decay hitting -60 dB at rt60) and mixes wet/dry. Output length
// is len + IR length - 1, peak-normalized to stay within [-1, 1].
AudioClip add_reverb(const AudioClip& clip, double rt60, double wet, std::uint64_t seed);

AudioClip apply_augment(const AudioClip& clip, const AugmentSpec& spec);

}  // namespace voxbal
