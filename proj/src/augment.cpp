#include "voxbal/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "voxbal/audio_io.hpp"
#include "voxbal/dsp.hpp"
#include "voxbal/errors.hpp"
#include "voxbal/rng.hpp"

namespace voxbal {

namespace {

constexpr double kWsolaSegmentMs = 30.0;
constexpr double kWsolaSearchMs = 10.0;

double signal_power(const AudioClip& clip) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& ch : clip.samples) {
    for (float s : ch) acc += static_cast<double>(s) * s;
    n += ch.size();
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

inline double sample_at(std::span<const float> x, long i) {
  return (i >= 0 && i < static_cast<long>(x.size())) ? x[static_cast<std::size_t>(i)] : 0.0;
}

// Similarity between the natural continuation at `ref` and the candidate at
// `cand`, both w samples long. Normalized so loud segments do not dominate.
double segment_similarity(std::span<const float> x, long ref, long cand, int w) {
  double num = 0.0, ea = 0.0, eb = 0.0;
  for (int i = 0; i < w; ++i) {
    const double a = sample_at(x, ref + i);
    const double b = sample_at(x, cand + i);
    num += a * b;
    ea += a * a;
    eb += b * b;
  }
  const double denom = std::sqrt(ea * eb);
  return denom > 0.0 ? num / denom : 0.0;
}

std::vector<float> wsola_channel(std::span<const float> x, int rate_hz, double rate) {
  int w = std::max(64, static_cast<int>(std::lround(rate_hz * kWsolaSegmentMs / 1000.0)));
  w += w & 1;  // even, so the 50% hop is exact
  const int hop_out = w / 2;
  const int radius = std::max(1, static_cast<int>(std::lround(rate_hz * kWsolaSearchMs / 1000.0)));
  const std::size_t target_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) / rate));

  const auto window = make_window(Window::Hann, static_cast<std::size_t>(w));
  std::vector<double> acc(target_len + w, 0.0);
  std::vector<double> wsum(target_len + w, 0.0);

  long prev_chosen = 0;
  for (std::size_t k = 0; static_cast<std::size_t>(k) * hop_out < target_len; ++k) {
    const long out_pos = static_cast<long>(k) * hop_out;
    const long nominal = std::llround(static_cast<double>(out_pos) * rate);
    long chosen = nominal;
    if (k > 0) {
      const long continuation = prev_chosen + hop_out;
      double best = -2.0;
      long best_d = 0;
      for (long d = -radius; d <= radius; ++d) {
        const long cand = nominal + d;
        if (cand + w <= 0 || cand >= static_cast<long>(x.size())) continue;
        const double s = segment_similarity(x, continuation, cand, w);
        if (s > best) {
          best = s;
          best_d = d;
        }
      }
      chosen = nominal + best_d;
    }
    for (int i = 0; i < w; ++i) {
      acc[static_cast<std::size_t>(out_pos) + i] += window[i] * sample_at(x, chosen + i);
      wsum[static_cast<std::size_t>(out_pos) + i] += window[i];
    }
    prev_chosen = chosen;
  }

  std::vector<float> out(target_len);
  for (std::size_t i = 0; i < target_len; ++i) {
    const double v = wsum[i] > 1e-9 ? acc[i] / wsum[i] : 0.0;
    out[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Linear convolution via the complex FFT; sizes here stay small enough that
// the extra factor over a real transform does not matter.
std::vector<double> fft_convolve(std::span<const float> x, std::span<const double> h) {
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> a(n), b(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = static_cast<double>(x[i]);
  for (std::size_t i = 0; i < h.size(); ++i) b[i] = h[i];
  fft_inplace(a);
  fft_inplace(b);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fft_inplace(a, /*inverse=*/true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = a[i].real();
  return out;
}

}  // namespace

AudioClip inject_noise(const AudioClip& clip, double snr_db, std::uint64_t seed) {
  const double p_signal = signal_power(clip);
  if (p_signal <= 0.0)
    throw InputError("undefined-snr", "input has zero signal power");

  const double p_noise_target = p_signal / std::pow(10.0, snr_db / 10.0);

  // One noise stream, channel-major, so the result is a pure function of
  // (clip shape, snr, seed).
  Rng rng(derive_seed(seed, "noise", 0));
  std::vector<std::vector<double>> noise(clip.samples.size());
  double p_noise_actual = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < clip.samples.size(); ++c) {
    noise[c].resize(clip.samples[c].size());
    for (auto& v : noise[c]) {
      v = rng.gaussian();
      p_noise_actual += v * v;
    }
    n += noise[c].size();
  }
  p_noise_actual /= static_cast<double>(n);
  const double scale = std::sqrt(p_noise_target / p_noise_actual);

  AudioClip out = clip;
  for (std::size_t c = 0; c < out.samples.size(); ++c) {
    for (std::size_t i = 0; i < out.samples[c].size(); ++i) {
      const double v = static_cast<double>(out.samples[c][i]) + scale * noise[c][i];
      out.samples[c][i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
  }
  return out;
}

AudioClip time_stretch(const AudioClip& clip, double rate, std::uint64_t seed) {
  (void)seed;  // WSOLA is deterministic; seed kept for the uniform op interface
  if (!(rate >= 0.25 && rate <= 4.0))
    throw InputError("invalid-rate", "stretch rate must be in [0.25, 4.0]");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  for (const auto& ch : clip.samples)
    out.samples.push_back(wsola_channel(ch, clip.sample_rate, rate));
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double semitones, std::uint64_t seed) {
  if (!(semitones >= -12.0 && semitones <= 12.0))
    throw InputError("invalid-shift", "semitones must be in [-12, 12]");
  const double factor = std::pow(2.0, -semitones / 12.0);
  const int shifted_rate =
      std::max(1, static_cast<int>(std::llround(clip.sample_rate * factor)));

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  for (const auto& ch : clip.samples) {
    AudioClip mono = AudioClip::mono(ch, clip.sample_rate);
    AudioClip warped = resample(mono, shifted_rate);
    // Relabel at the original rate: same samples, played faster or slower.
    warped.sample_rate = clip.sample_rate;
    AudioClip restored = time_stretch(warped, factor, seed);
    out.samples.push_back(std::move(restored.samples[0]));
  }
  return out;
}

AudioClip add_reverb(const AudioClip& clip, double rt60, double wet, std::uint64_t seed) {
  if (!(rt60 > 0.0)) throw InputError("invalid-rt60", "rt60 must be positive");
  if (!(wet >= 0.0 && wet <= 1.0))
    throw InputError("invalid-wet", "wet must be in [0, 1]");
  if (clip.length() == 0) throw InputError("empty-input", "cannot reverberate an empty clip");

  // Impulse response: seeded white noise under an exponential decay that
  // reaches -60 dB at rt60, peak-normalized.
  const std::size_t ir_len =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rt60 * clip.sample_rate)));
  Rng rng(derive_seed(seed, "reverb", 0));
  std::vector<double> ir(ir_len);
  double peak = 0.0;
  for (std::size_t i = 0; i < ir_len; ++i) {
    const double decay = std::pow(10.0, -3.0 * static_cast<double>(i) /
                                            (rt60 * clip.sample_rate));
    ir[i] = rng.gaussian() * decay;
    peak = std::max(peak, std::abs(ir[i]));
  }
  if (peak > 0.0)
    for (auto& v : ir) v /= peak;

  const std::size_t out_len = clip.length() + ir_len - 1;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.reserve(clip.samples.size());
  double mix_peak = 0.0;
  std::vector<std::vector<double>> mixed(clip.samples.size());
  for (std::size_t c = 0; c < clip.samples.size(); ++c) {
    const auto reverberant = fft_convolve(clip.samples[c], ir);
    auto& mix = mixed[c];
    mix.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
      const double dry = i < clip.samples[c].size() ? clip.samples[c][i] : 0.0;
      mix[i] = (1.0 - wet) * dry + wet * reverberant[i];
      mix_peak = std::max(mix_peak, std::abs(mix[i]));
    }
  }
  const double norm = mix_peak > 1.0 ? 1.0 / mix_peak : 1.0;
  for (auto& mix : mixed) {
    std::vector<float> ch(out_len);
    for (std::size_t i = 0; i < out_len; ++i)
      ch[i] = static_cast<float>(std::clamp(mix[i] * norm, -1.0, 1.0));
    out.samples.push_back(std::move(ch));
  }
  return out;
}

std::string AugmentSpec::op_name() const {
  if (std::holds_alternative<PitchShift>(op)) return "pitch_shift";
  if (std::holds_alternative<TimeStretch>(op)) return "time_stretch";
  if (std::holds_alternative<Noise>(op)) return "noise";
  return "reverb";
}

nlohmann::json AugmentSpec::to_json() const {
  nlohmann::json params;
  if (const auto* p = std::get_if<PitchShift>(&op)) {
    params["semitones"] = p->semitones;
  } else if (const auto* t = std::get_if<TimeStretch>(&op)) {
    params["rate"] = t->rate;
  } else if (const auto* n = std::get_if<Noise>(&op)) {
    params["snr_db"] = n->snr_db;
  } else if (const auto* r = std::get_if<Reverb>(&op)) {
    params["rt60"] = r->rt60;
    params["wet"] = r->wet;
  }
  return nlohmann::json{{"op", op_name()}, {"params", params}, {"seed", seed}};
}

AugmentSpec AugmentSpec::from_json(const nlohmann::json& j) {
  try {
    AugmentSpec spec;
    const std::string op = j.at("op").get<std::string>();
    const nlohmann::json& params = j.at("params");
    if (op == "pitch_shift") {
      spec.op = PitchShift{params.at("semitones").get<double>()};
    } else if (op == "time_stretch") {
      spec.op = TimeStretch{params.at("rate").get<double>()};
    } else if (op == "noise") {
      spec.op = Noise{params.at("snr_db").get<double>()};
    } else if (op == "reverb") {
      spec.op = Reverb{params.at("rt60").get<double>(), params.at("wet").get<double>()};
    } else {
      throw InputError("invalid-spec", "unknown augment op: " + op);
    }
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid-spec", std::string("bad augment spec: ") + e.what());
  }
}

AudioClip apply_augment(const AudioClip& clip, const AugmentSpec& spec) {
  if (const auto* p = std::get_if<AugmentSpec::PitchShift>(&spec.op))
    return pitch_shift(clip, p->semitones, spec.seed);
  if (const auto* t = std::get_if<AugmentSpec::TimeStretch>(&spec.op))
    return time_stretch(clip, t->rate, spec.seed);
  if (const auto* n = std::get_if<AugmentSpec::Noise>(&spec.op))
    return inject_noise(clip, n->snr_db, spec.seed);
  const auto& r = std::get<AugmentSpec::Reverb>(spec.op);
  return add_reverb(clip, r.rt60, r.wet, spec.seed);
}

}  // namespace voxbal
