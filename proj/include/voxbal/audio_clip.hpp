#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "voxbal/errors.hpp"

namespace voxbal {

// Decoded PCM audio. Samples are normalized amplitudes in [-1, 1], one
// vector per channel, all channels the same length.
struct AudioClip {
  std::vector<std::vector<float>> samples;
  int sample_rate = 0;

  AudioClip() = default;
  AudioClip(std::vector<std::vector<float>> chans, int rate)
      : samples(std::move(chans)), sample_rate(rate) {}

  static AudioClip mono(std::vector<float> data, int rate) {
    AudioClip clip;
    clip.samples.push_back(std::move(data));
    clip.sample_rate = rate;
    return clip;
  }

  int channels() const { return static_cast<int>(samples.size()); }
  bool is_mono() const { return samples.size() == 1; }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(length()) / sample_rate : 0.0;
  }

  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(samples.at(c));
  }

  // Checks the type invariants; throws InputError on violation.
  void validate() const {
    if (sample_rate <= 0) throw InputError("invalid-rate", "sample_rate must be positive");
    if (samples.empty()) throw InputError("empty-input", "clip has no channels");
    const std::size_t len = samples[0].size();
    for (const auto& ch : samples) {
      if (ch.size() != len)
        throw InputError("invalid-clip", "channels differ in length");
      for (float s : ch) {
        if (!(s >= -1.0f && s <= 1.0f))
          throw InputError("invalid-clip", "sample outside [-1, 1]");
      }
    }
  }
};

inline void require_mono(const AudioClip& clip, const char* what) {
  if (!clip.is_mono())
    throw InputError("not-mono", std::string(what) + " requires a mono clip (mixdown first)");
}

}  // namespace voxbal
