#include "doctest.h"

#include <cmath>

#include "voxbal/dsp.hpp"
#include "voxbal/rng.hpp"

#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace voxbal;
using namespace voxbal::testsupport;

namespace {

std::vector<double> random_frame(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("frame counts follow the floor formula") {
  FrameParams p{400, 160, Window::Rectangular};
  CHECK(frame_count(400, p) == 1);
  CHECK(frame_count(1600, p) == 8);
  CHECK(frame_count(399, p) == 0);
}

TEST_CASE("frame count formula holds for randomized shapes") {
  Rng rng(0xF4A3EDu);
  for (int trial = 0; trial < 200; ++trial) {
    FrameParams p;
    p.frame_len = 2 + static_cast<int>(rng.below(500));
    p.hop = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.frame_len)));
    const std::size_t len = rng.below(5000);
    const std::size_t expect =
        len >= static_cast<std::size_t>(p.frame_len)
            ? (len - p.frame_len) / p.hop + 1
            : 0;
    CHECK(frame_count(len, p) == expect);
    AudioClip clip = AudioClip::mono(std::vector<float>(len, 0.1f), 16000);
    CHECK(frame_signal(clip, p).size() == expect);
  }
}

TEST_CASE("frame params validate") {
  FrameParams bad{1, 1, Window::Hann};
  CHECK_THROWS_AS(bad.validate(), InputError);
  FrameParams bad_hop{8, 9, Window::Hann};
  CHECK_THROWS_AS(bad_hop.validate(), InputError);
}

TEST_CASE("dft of zeros is zero") {
  std::vector<double> x(64, 0.0);
  for (double m : dft_magnitude(std::span<const double>(x), Window::Rectangular))
    CHECK(m == 0.0);
}

TEST_CASE("dft of a constant is DC only") {
  std::vector<double> x(8, 1.0);
  const auto mags = dft_magnitude(std::span<const double>(x), Window::Rectangular);
  REQUIRE(mags.size() == 5);
  CHECK(mags[0] == doctest::Approx(8.0).epsilon(1e-12));
  for (std::size_t k = 1; k < mags.size(); ++k) CHECK(mags[k] <= 1e-9);
}

TEST_CASE("440 Hz at 16 kHz peaks at bin 28 for N = 1024") {
  const AudioClip tone = make_sine(440.0, 16000, 0.1);
  std::vector<double> frame(tone.samples[0].begin(), tone.samples[0].begin() + 1024);
  const auto mags = dft_magnitude(std::span<const double>(frame), Window::Rectangular);
  std::size_t best = 0;
  for (std::size_t k = 0; k < mags.size(); ++k)
    if (mags[k] > mags[best]) best = k;
  CHECK(best == 28);  // round(440 * 1024 / 16000)
}

TEST_CASE("fast path matches the naive oracle within 1e-9 relative") {
  Rng rng(0xD47Au);
  for (std::size_t n : {8u, 64u, 256u, 1024u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = random_frame(rng, n);
      const auto fast = dft_magnitude(std::span<const double>(x), Window::Rectangular);
      const auto slow = naive_dft_magnitude(x);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t k = 0; k < fast.size(); ++k) {
        const double scale = std::max(1.0, std::abs(slow[k]));
        CHECK(std::abs(fast[k] - slow[k]) / scale <= 1e-9);
      }
    }
  }
}

TEST_CASE("non-power-of-two lengths take the reference path") {
  Rng rng(0xD47Bu);
  for (std::size_t n : {6u, 100u, 321u}) {
    const auto x = random_frame(rng, n);
    const auto got = dft_magnitude(std::span<const double>(x), Window::Rectangular);
    const auto want = naive_dft_magnitude(x);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k)
      CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
  }
}

TEST_CASE("Parseval holds within 1e-6 relative") {
  Rng rng(0x9A125Eu);
  for (std::size_t n : {8u, 64u, 256u, 1024u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = random_frame(rng, n);
      double time_energy = 0.0;
      for (double v : x) time_energy += v * v;
      const auto mags = dft_magnitude(std::span<const double>(x), Window::Rectangular);
      double freq_energy = mags[0] * mags[0] + mags[n / 2] * mags[n / 2];
      for (std::size_t k = 1; k < n / 2; ++k) freq_energy += 2.0 * mags[k] * mags[k];
      freq_energy /= static_cast<double>(n);
      CHECK(std::abs(time_energy - freq_energy) <= 1e-6 * std::max(1.0, time_energy));
    }
  }
}

TEST_CASE("magnitudes scale linearly with positive gain") {
  Rng rng(0x11EA8u);
  const auto x = random_frame(rng, 256);
  const double gain = 3.7;
  std::vector<double> scaled(x);
  for (auto& v : scaled) v *= gain;
  const auto base = dft_magnitude(std::span<const double>(x), Window::Rectangular);
  const auto amplified = dft_magnitude(std::span<const double>(scaled), Window::Rectangular);
  for (std::size_t k = 0; k < base.size(); ++k)
    CHECK(amplified[k] == doctest::Approx(gain * base[k]).epsilon(1e-9));
}

TEST_CASE("spectrogram of silence is all zero") {
  const AudioClip clip = make_silence(16000, 0.5);
  const Spectrogram spec = spectrogram(clip, FrameParams{1024, 512, Window::Hann});
  REQUIRE(spec.frame_count() > 0);
  CHECK(spec.bins() == 513);
  for (const auto& row : spec.magnitudes)
    for (double m : row) CHECK(m == 0.0);
}

TEST_CASE("440 Hz spectrogram rows all peak at bin 28") {
  const AudioClip clip = make_sine(440.0, 16000, 1.0);
  const Spectrogram spec = spectrogram(clip, FrameParams{1024, 512, Window::Hann});
  REQUIRE(spec.frame_count() == (16000 - 1024) / 512 + 1);
  CHECK(spec.bin_hz == doctest::Approx(16000.0 / 1024.0));
  for (const auto& row : spec.magnitudes) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < row.size(); ++k)
      if (row[k] > row[best]) best = k;
    CHECK(best == 28);
  }
}

TEST_CASE("clip shorter than one frame gives an empty spectrogram") {
  const AudioClip clip = make_sine(440.0, 16000, 0.01);
  const Spectrogram spec = spectrogram(clip, FrameParams{1024, 512, Window::Hann});
  CHECK(spec.frame_count() == 0);
}

TEST_CASE("time features of silence are zero") {
  const AudioClip clip = make_silence(16000, 0.2);
  const TimeFeatures f = time_features(clip, FrameParams{400, 160, Window::Rectangular});
  for (double v : f.rms) CHECK(v == 0.0);
  for (double v : f.peak) CHECK(v == 0.0);
}

TEST_CASE("constant 0.5 has rms and peak 0.5") {
  const AudioClip clip = AudioClip::mono(std::vector<float>(1600, 0.5f), 16000);
  const TimeFeatures f = time_features(clip, FrameParams{400, 160, Window::Rectangular});
  REQUIRE(!f.rms.empty());
  for (std::size_t i = 0; i < f.rms.size(); ++i) {
    CHECK(f.rms[i] == doctest::Approx(0.5));
    CHECK(f.peak[i] == doctest::Approx(0.5));
    CHECK(f.rms[i] <= f.peak[i]);
  }
}

TEST_CASE("sine rms is amplitude over sqrt(2)") {
  // 100 Hz at 16 kHz: a 400-sample frame holds 2.5 cycles; use 160 Hz so a
  // frame holds exactly 4 cycles.
  const AudioClip clip = make_sine(160.0, 16000, 0.5, 0.8);
  const TimeFeatures f = time_features(clip, FrameParams{400, 400, Window::Rectangular});
  REQUIRE(!f.rms.empty());
  const double expected = 0.8 / std::sqrt(2.0);
  for (double v : f.rms) CHECK(std::abs(v - expected) <= 0.01 * expected);
}

}  // TEST_SUITE
