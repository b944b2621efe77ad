#include "voxbal/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "voxbal/errors.hpp"

namespace voxbal {

namespace {

// A periodic signal correlates equally well at every multiple of its period,
// and on sharp-peaked waveforms the sampled value at the true period can sit
// up to ~3/T below the value at a multiple (half-sample phase error on a
// V-shaped peak). The fundamental is therefore taken as the smallest-lag
// local peak within this tolerance of the global maximum.
constexpr double kPeakTolerance = 0.08;

// Normalized cross-correlation between x[0..m) and x[lag..lag+m).
double ncc_at_lag(std::span<const double> x, std::size_t lag) {
  const std::size_t m = x.size() - lag;
  double num = 0.0, e0 = 0.0, e1 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = x[i];
    const double b = x[i + lag];
    num += a * b;
    e0 += a * a;
    e1 += b * b;
  }
  const double denom = std::sqrt(e0 * e1);
  return denom > 0.0 ? num / denom : 0.0;
}

}  // namespace

void PitchConfig::validate(int sample_rate) const {
  if (!(f0_min > 0.0) || !(f0_min < f0_max))
    throw InputError("invalid-config", "need 0 < f0_min < f0_max");
  if (!(f0_max < sample_rate / 2.0))
    throw InputError("invalid-config", "f0_max must be below Nyquist");
  if (sample_rate < 4.0 * f0_max)
    throw InputError("invalid-config", "sample rate too low for f0_max");
  if (voicing_rms_floor < 0.0 || clarity_floor < 0.0 || clarity_floor > 1.0)
    throw InputError("invalid-config", "bad voicing thresholds");
  if (frame) frame->validate();
}

std::size_t PitchTrack::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

std::optional<double> PitchTrack::median_f0() const {
  std::vector<double> values;
  values.reserve(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i)
    if (voiced[i]) values.push_back(f0[i]);
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

void GenderBands::validate() const {
  const bool ordered = male_lo < male_hi && female_lo < female_hi;
  const bool disjoint = male_hi < female_lo || female_hi < male_lo;
  if (!ordered || !disjoint)
    throw InputError("invalid-bands", "bands must be disjoint intervals of positive width");
}

PitchTrack estimate_pitch(const AudioClip& clip, const PitchConfig& cfg) {
  require_mono(clip, "estimate_pitch");
  cfg.validate(clip.sample_rate);

  const FrameParams params =
      cfg.frame ? *cfg.frame : FrameParams::for_rate(clip.sample_rate, 40.0, 10.0,
                                                     Window::Rectangular);
  const double rate = clip.sample_rate;
  std::size_t lag_min = static_cast<std::size_t>(std::floor(rate / cfg.f0_max));
  std::size_t lag_max = static_cast<std::size_t>(std::ceil(rate / cfg.f0_min));
  lag_min = std::max<std::size_t>(lag_min, 2);
  // Keep at least a quarter frame of overlap at the longest lag.
  lag_max = std::min(lag_max, static_cast<std::size_t>(params.frame_len) * 3 / 4);
  if (lag_max <= lag_min + 1)
    throw InputError("invalid-config", "frame too short for the configured f0 range");

  const auto frames = frame_signal(clip, params);
  PitchTrack track;
  track.f0.assign(frames.size(), 0.0);
  track.clarity.assign(frames.size(), 0.0);
  track.voiced.assign(frames.size(), false);

  std::vector<double> x(static_cast<std::size_t>(params.frame_len));
  std::vector<double> ncc(lag_max + 1, 0.0);
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const auto& frame = frames[fi];
    double mean = 0.0;
    for (float s : frame) mean += s;
    mean /= static_cast<double>(frame.size());
    double energy = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      x[i] = frame[i] - mean;
      energy += x[i] * x[i];
    }
    const double rms = std::sqrt(energy / static_cast<double>(frame.size()));
    if (rms < cfg.voicing_rms_floor) continue;

    std::size_t global_best = lag_min;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      ncc[lag] = ncc_at_lag(x, lag);
      if (ncc[lag] > ncc[global_best]) global_best = lag;
    }
    const double threshold = (1.0 - kPeakTolerance) * ncc[global_best];
    std::size_t best_lag = global_best;
    for (std::size_t lag = lag_min + 1; lag < lag_max; ++lag) {
      if (ncc[lag] >= ncc[lag - 1] && ncc[lag] >= ncc[lag + 1] && ncc[lag] >= threshold) {
        best_lag = lag;
        break;
      }
    }
    const double clarity = std::clamp(ncc[best_lag], 0.0, 1.0);
    track.clarity[fi] = clarity;
    if (clarity < cfg.clarity_floor) continue;

    double refined = static_cast<double>(best_lag);
    if (best_lag > lag_min && best_lag < lag_max) {
      const double y0 = ncc[best_lag - 1];
      const double y1 = ncc[best_lag];
      const double y2 = ncc[best_lag + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::abs(denom) > 1e-12) {
        const double delta = 0.5 * (y0 - y2) / denom;
        if (std::abs(delta) <= 1.0) refined += delta;
      }
    }
    track.f0[fi] = std::clamp(rate / refined, cfg.f0_min, cfg.f0_max);
    track.voiced[fi] = true;
  }
  return track;
}

BandResult classify_band(const PitchTrack& track, const GenderBands& bands) {
  bands.validate();
  BandResult result;
  result.median_f0 = track.median_f0();
  if (!result.median_f0) return result;
  const double f0 = *result.median_f0;
  if (f0 >= bands.male_lo && f0 <= bands.male_hi)
    result.label = BandLabel::Male;
  else if (f0 >= bands.female_lo && f0 <= bands.female_hi)
    result.label = BandLabel::Female;
  else
    result.label = BandLabel::Unclassified;
  return result;
}

const char* band_label_name(BandLabel label) {
  switch (label) {
    case BandLabel::Male:
      return "male";
    case BandLabel::Female:
      return "female";
    default:
      return "unclassified";
  }
}

BandLabel band_label_from_name(const std::string& name) {
  if (name == "male") return BandLabel::Male;
  if (name == "female") return BandLabel::Female;
  if (name == "unclassified") return BandLabel::Unclassified;
  throw InputError("invalid-label", "unknown band label: " + name);
}

ClassifierReport evaluate_classifier(
    const std::vector<std::pair<BandLabel, BandLabel>>& truth_and_predicted) {
  if (truth_and_predicted.empty())
    throw InputError("empty-evaluation", "no labeled pairs to evaluate");
  ClassifierReport report;
  report.total = static_cast<long>(truth_and_predicted.size());
  for (const auto& [truth, predicted] : truth_and_predicted) {
    report.confusion[static_cast<int>(truth)][static_cast<int>(predicted)] += 1;
    if (truth == predicted) report.correct += 1;
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

}  // namespace voxbal
