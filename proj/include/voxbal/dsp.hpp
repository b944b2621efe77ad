#pragma once

#include <complex>
#include <span>
#include <vector>

#include "voxbal/audio_clip.hpp"

namespace voxbal {

enum class Window { Rectangular, Hann };

struct FrameParams {
  int frame_len = 400;  // 25 ms at 16 kHz
  int hop = 160;        // 10 ms at 16 kHz
  Window window = Window::Hann;

  // Standard speech analysis defaults scaled to the clip's rate.
  static FrameParams for_rate(int sample_rate, double frame_ms = 25.0,
                              double hop_ms = 10.0, Window window = Window::Hann);

  void validate() const;
};

struct Spectrogram {
  std::vector<std::vector<double>> magnitudes;  // frames x (frame_len/2 + 1)
  double bin_hz = 0.0;                          // sample_rate / frame_len
  FrameParams params;

  std::size_t frame_count() const { return magnitudes.size(); }
  std::size_t bins() const { return magnitudes.empty() ? 0 : magnitudes[0].size(); }
};

struct TimeFeatures {
  std::vector<double> rms;   // per frame
  std::vector<double> peak;  // per frame
};

// Number of full frames in a signal of the given length; trailing partial
// frames are dropped.
std::size_t frame_count(std::size_t len, const FrameParams& params);

// Views into the clip, one per frame. Valid while the clip is alive.
std::vector<std::span<const float>> frame_signal(const AudioClip& clip,
                                                 const FrameParams& params);

std::vector<double> make_window(Window window, std::size_t n);

// Magnitude spectrum |X_k| for k = 0..N/2 of the windowed frame. Uses a
// radix-2 transform when the length is a power of two, the direct sum
// otherwise.
std::vector<double> dft_magnitude(std::span<const float> frame, Window window);
std::vector<double> dft_magnitude(std::span<const double> frame, Window window);

// In-place complex FFT, length must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse = false);

Spectrogram spectrogram(const AudioClip& clip, const FrameParams& params);
TimeFeatures time_features(const AudioClip& clip, const FrameParams& params);

}  // namespace voxbal
