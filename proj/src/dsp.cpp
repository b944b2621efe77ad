#include "voxbal/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace voxbal {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = -kTwoPi * static_cast<double>(k) * static_cast<double>(i) /
                           static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> magnitudes_impl(std::vector<double> windowed) {
  const std::size_t n = windowed.size();
  const std::size_t bins = n / 2 + 1;
  std::vector<double> mags(bins);
  if (is_power_of_two(n)) {
    std::vector<std::complex<double>> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = windowed[i];
    fft_inplace(data);
    for (std::size_t k = 0; k < bins; ++k) mags[k] = std::abs(data[k]);
  } else {
    const auto spectrum = naive_dft(windowed);
    for (std::size_t k = 0; k < bins; ++k) mags[k] = std::abs(spectrum[k]);
  }
  return mags;
}

}  // namespace

FrameParams FrameParams::for_rate(int sample_rate, double frame_ms, double hop_ms,
                                  Window window) {
  FrameParams p;
  p.frame_len = std::max(2, static_cast<int>(std::lround(sample_rate * frame_ms / 1000.0)));
  p.hop = std::max(1, static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0)));
  p.hop = std::min(p.hop, p.frame_len);
  p.window = window;
  return p;
}

void FrameParams::validate() const {
  if (frame_len < 2) throw InputError("invalid-frame", "frame_len must be >= 2");
  if (hop <= 0 || hop > frame_len)
    throw InputError("invalid-frame", "hop must satisfy 0 < hop <= frame_len");
}

std::size_t frame_count(std::size_t len, const FrameParams& params) {
  params.validate();
  if (len < static_cast<std::size_t>(params.frame_len)) return 0;
  return (len - params.frame_len) / params.hop + 1;
}

std::vector<std::span<const float>> frame_signal(const AudioClip& clip,
                                                 const FrameParams& params) {
  require_mono(clip, "frame_signal");
  const std::span<const float> x = clip.channel(0);
  const std::size_t count = frame_count(x.size(), params);
  std::vector<std::span<const float>> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    frames.push_back(x.subspan(i * params.hop, params.frame_len));
  return frames;
}

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!is_power_of_two(n))
    throw InputError("invalid-frame", "fft length must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& c : data) c *= scale;
  }
}

std::vector<double> dft_magnitude(std::span<const double> frame, Window window) {
  if (frame.size() < 2)
    throw InputError("invalid-frame", "dft_magnitude needs at least 2 samples");
  std::vector<double> windowed(frame.begin(), frame.end());
  if (window == Window::Hann) {
    const auto w = make_window(window, frame.size());
    for (std::size_t i = 0; i < windowed.size(); ++i) windowed[i] *= w[i];
  }
  return magnitudes_impl(std::move(windowed));
}

std::vector<double> dft_magnitude(std::span<const float> frame, Window window) {
  std::vector<double> copy(frame.begin(), frame.end());
  return dft_magnitude(std::span<const double>(copy), window);
}

Spectrogram spectrogram(const AudioClip& clip, const FrameParams& params) {
  require_mono(clip, "spectrogram");
  Spectrogram spec;
  spec.params = params;
  spec.bin_hz = static_cast<double>(clip.sample_rate) / params.frame_len;
  const auto frames = frame_signal(clip, params);
  spec.magnitudes.reserve(frames.size());
  const auto w = make_window(params.window, static_cast<std::size_t>(params.frame_len));
  std::vector<double> windowed(static_cast<std::size_t>(params.frame_len));
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < windowed.size(); ++i) windowed[i] = frame[i] * w[i];
    spec.magnitudes.push_back(magnitudes_impl(windowed));
  }
  return spec;
}

TimeFeatures time_features(const AudioClip& clip, const FrameParams& params) {
  require_mono(clip, "time_features");
  TimeFeatures features;
  const auto frames = frame_signal(clip, params);
  features.rms.reserve(frames.size());
  features.peak.reserve(frames.size());
  for (const auto& frame : frames) {
    double energy = 0.0;
    double peak = 0.0;
    for (float s : frame) {
      energy += static_cast<double>(s) * s;
      peak = std::max(peak, std::abs(static_cast<double>(s)));
    }
    features.rms.push_back(std::sqrt(energy / static_cast<double>(frame.size())));
    features.peak.push_back(peak);
  }
  return features;
}

}  // namespace voxbal
