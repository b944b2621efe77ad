#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "voxbal/audio_clip.hpp"

namespace voxbal {

enum class SampleFormat { Int16, Float32 };

struct WavFormat {
  SampleFormat format = SampleFormat::Int16;
  int sample_rate = 16000;
  int channels = 1;
};

// Header-level description of a WAV payload, obtained without decoding the
// sample data.
struct WavInfo {
  WavFormat format;
  std::uint64_t frames = 0;  // samples per channel
  double duration_s = 0.0;
};

// Decodes a RIFF/WAVE container holding 16-bit integer or 32-bit float PCM.
// 16-bit samples are scaled by 1/32768; float samples are clamped to [-1, 1].
// Unknown chunks are skipped; `fmt ` must appear before `data`.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

// Encodes to a little-endian RIFF/WAVE byte stream. fmt.sample_rate and
// fmt.channels must match the clip.
std::vector<std::uint8_t> encode_wav(const AudioClip& clip, const WavFormat& fmt);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format);

// Parses the header only; used for fast duration lookups on ingest.
WavInfo probe_wav(std::span<const std::uint8_t> bytes);
WavInfo probe_wav_file(const std::filesystem::path& path);

AudioClip load_wav_file(const std::filesystem::path& path);
void save_wav_file(const std::filesystem::path& path, const AudioClip& clip,
                   SampleFormat format = SampleFormat::Int16);

// Mixes all channels down to mono with an unweighted mean.
AudioClip mixdown(const AudioClip& clip);

enum class ResampleQuality { WindowedSinc, Linear };

// Changes the sampling grid of a mono clip. The windowed-sinc path uses a
// Kaiser window (beta 8.6, 32 taps per side); the linear path is a cheap
// fallback. Output length is round(len * target / source).
AudioClip resample(const AudioClip& clip, int target_rate,
                   ResampleQuality quality = ResampleQuality::WindowedSinc);

}  // namespace voxbal
