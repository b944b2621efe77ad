#include "voxbal/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace voxbal {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::size_t remaining() const { return bytes.size() - pos; }

  bool read_tag(char out[4]) {
    if (remaining() < 4) return false;
    std::memcpy(out, bytes.data() + pos, 4);
    pos += 4;
    return true;
  }

  bool read_u32(std::uint32_t& out) {
    if (remaining() < 4) return false;
    out = static_cast<std::uint32_t>(bytes[pos]) |
          static_cast<std::uint32_t>(bytes[pos + 1]) << 8 |
          static_cast<std::uint32_t>(bytes[pos + 2]) << 16 |
          static_cast<std::uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    return true;
  }

  bool read_u16(std::uint16_t& out) {
    if (remaining() < 2) return false;
    out = static_cast<std::uint16_t>(bytes[pos] | bytes[pos + 1] << 8);
    pos += 2;
    return true;
  }
};

struct FmtChunk {
  std::uint16_t audio_format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits_per_sample = 0;
};

struct ParsedWav {
  FmtChunk fmt;
  std::span<const std::uint8_t> data;
};

bool tag_is(const char tag[4], const char* want) {
  return std::memcmp(tag, want, 4) == 0;
}

// Walks the chunk list. When want_data is false the data payload span still
// points at the chunk but its contents are never touched, so probing stays
// header-only.
ParsedWav parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r{bytes};
  char tag[4];
  std::uint32_t riff_size = 0;
  if (!r.read_tag(tag) || !tag_is(tag, "RIFF"))
    throw InputError("malformed-container", "missing RIFF magic");
  if (!r.read_u32(riff_size))
    throw InputError("malformed-container", "truncated RIFF header");
  if (!r.read_tag(tag) || !tag_is(tag, "WAVE"))
    throw InputError("malformed-container", "missing WAVE magic");

  ParsedWav out;
  bool have_fmt = false;
  bool have_data = false;
  while (r.remaining() >= 8) {
    char chunk_id[4];
    std::uint32_t chunk_size = 0;
    r.read_tag(chunk_id);
    r.read_u32(chunk_size);
    if (tag_is(chunk_id, "fmt ")) {
      if (chunk_size < 16 || r.remaining() < chunk_size)
        throw InputError("malformed-container", "bad fmt chunk");
      ByteReader f{bytes.subspan(r.pos, chunk_size)};
      f.read_u16(out.fmt.audio_format);
      f.read_u16(out.fmt.channels);
      f.read_u32(out.fmt.sample_rate);
      std::uint32_t byte_rate = 0;
      f.read_u32(byte_rate);
      f.read_u16(out.fmt.block_align);
      f.read_u16(out.fmt.bits_per_sample);
      have_fmt = true;
    } else if (tag_is(chunk_id, "data")) {
      if (!have_fmt)
        throw InputError("malformed-container", "data chunk before fmt chunk");
      if (chunk_size > r.remaining())
        throw InputError("truncated-input", "data chunk size exceeds remaining bytes");
      out.data = bytes.subspan(r.pos, chunk_size);
      have_data = true;
      // data is usually last, but keep scanning so trailing fmt anomalies
      // are still tolerated as unknown chunks.
    }
    // Chunks are word-aligned: odd sizes carry one pad byte.
    std::uint64_t advance = static_cast<std::uint64_t>(chunk_size) + (chunk_size & 1u);
    if (advance > r.remaining()) {
      if (tag_is(chunk_id, "data"))
        break;  // missing pad byte at EOF is harmless
      throw InputError("truncated-input", "chunk size exceeds remaining bytes");
    }
    r.pos += static_cast<std::size_t>(advance);
  }
  if (!have_fmt) throw InputError("malformed-container", "missing fmt chunk");
  if (!have_data) throw InputError("malformed-container", "missing data chunk");
  if (out.fmt.channels == 0)
    throw InputError("malformed-container", "zero channels");
  if (out.fmt.sample_rate == 0)
    throw InputError("malformed-container", "zero sample rate");
  return out;
}

SampleFormat classify_encoding(const FmtChunk& fmt) {
  if (fmt.audio_format == kFormatPcm && fmt.bits_per_sample == 16)
    return SampleFormat::Int16;
  if (fmt.audio_format == kFormatIeeeFloat && fmt.bits_per_sample == 32)
    return SampleFormat::Float32;
  throw InputError("unsupported-format",
                   "only 16-bit PCM and 32-bit float are supported (format " +
                       std::to_string(fmt.audio_format) + ", " +
                       std::to_string(fmt.bits_per_sample) + " bits)");
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

void append_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

// Modified Bessel function of the first kind, order zero. Series converges
// quickly for the beta values used here.
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

constexpr double kKaiserBeta = 8.6;

// Kaiser window sampled on [0, 1], linearly interpolated at evaluation time.
// The table error is far below the filter's own stopband ripple.
class KaiserTable {
 public:
  KaiserTable() {
    const double norm = 1.0 / bessel_i0(kKaiserBeta);
    for (std::size_t i = 0; i < kSize; ++i) {
      const double u = static_cast<double>(i) / (kSize - 1);
      values_[i] = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) * norm;
    }
  }

  double operator()(double u) const {
    u = std::abs(u);
    if (u >= 1.0) return 0.0;
    const double x = u * (kSize - 1);
    const std::size_t i = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(i);
    return values_[i] + (values_[std::min(i + 1, kSize - 1)] - values_[i]) * frac;
  }

 private:
  static constexpr std::size_t kSize = 4097;
  std::array<double, kSize> values_{};
};

const KaiserTable& kaiser_table() {
  static const KaiserTable table;
  return table;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  const ParsedWav wav = parse_container(bytes);
  const SampleFormat format = classify_encoding(wav.fmt);
  const int channels = wav.fmt.channels;
  const std::size_t bytes_per_sample = format == SampleFormat::Int16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = wav.data.size() / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(wav.fmt.sample_rate);
  clip.samples.assign(channels, std::vector<float>(frames));
  const std::uint8_t* p = wav.data.data();
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const std::uint8_t* s = p + i * frame_bytes + c * bytes_per_sample;
      float value;
      if (format == SampleFormat::Int16) {
        const std::int16_t raw =
            static_cast<std::int16_t>(s[0] | static_cast<std::uint16_t>(s[1]) << 8);
        value = static_cast<float>(raw) / 32768.0f;
      } else {
        float raw;
        std::memcpy(&raw, s, 4);
        if (std::isnan(raw)) raw = 0.0f;
        value = std::clamp(raw, -1.0f, 1.0f);
      }
      clip.samples[c][i] = value;
    }
  }
  return clip;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, const WavFormat& fmt) {
  if (clip.length() == 0 || clip.channels() == 0)
    throw InputError("empty-input", "cannot encode an empty clip");
  if (fmt.sample_rate != clip.sample_rate)
    throw InputError("invalid-format", "format sample_rate differs from clip");
  if (fmt.channels != clip.channels())
    throw InputError("invalid-format", "format channel count differs from clip");

  const int channels = clip.channels();
  const std::size_t frames = clip.length();
  const bool is_float = fmt.format == SampleFormat::Float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * block_align);
  // Float PCM carries a fact chunk per the WAVE spec.
  const std::uint32_t riff_size = 4 + (8 + 16) + (is_float ? 8 + 4 : 0) + 8 + data_size;

  std::vector<std::uint8_t> out;
  out.reserve(8 + riff_size);
  append_tag(out, "RIFF");
  append_u32(out, riff_size);
  append_tag(out, "WAVE");
  append_tag(out, "fmt ");
  append_u32(out, 16);
  append_u16(out, is_float ? kFormatIeeeFloat : kFormatPcm);
  append_u16(out, static_cast<std::uint16_t>(channels));
  append_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  append_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block_align);
  append_u16(out, block_align);
  append_u16(out, bits);
  if (is_float) {
    append_tag(out, "fact");
    append_u32(out, 4);
    append_u32(out, static_cast<std::uint32_t>(frames));
  }
  append_tag(out, "data");
  append_u32(out, data_size);
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const float s = clip.samples[c][i];
      if (is_float) {
        std::uint8_t raw[4];
        std::memcpy(raw, &s, 4);
        out.insert(out.end(), raw, raw + 4);
      } else {
        long v = std::lround(static_cast<double>(s) * 32768.0);
        v = std::clamp(v, -32768L, 32767L);
        append_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format) {
  return encode_wav(clip, WavFormat{format, clip.sample_rate, clip.channels()});
}

WavInfo probe_wav(std::span<const std::uint8_t> bytes) {
  const ParsedWav wav = parse_container(bytes);
  WavInfo info;
  info.format.format = classify_encoding(wav.fmt);
  info.format.sample_rate = static_cast<int>(wav.fmt.sample_rate);
  info.format.channels = wav.fmt.channels;
  const std::size_t bytes_per_sample =
      info.format.format == SampleFormat::Int16 ? 2 : 4;
  info.frames = wav.data.size() / (bytes_per_sample * wav.fmt.channels);
  info.duration_s = static_cast<double>(info.frames) / wav.fmt.sample_rate;
  return info;
}

namespace {
std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("io-error", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}
}  // namespace

WavInfo probe_wav_file(const std::filesystem::path& path) {
  // Headers live in the first few KB; reading the whole file would defeat
  // the point of a probe on long recordings.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("io-error", "cannot open " + path.string());
  std::vector<std::uint8_t> head(64 * 1024);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));

  // The data chunk payload is usually not inside `head`, so re-walk the
  // chunks here tolerating a truncated tail.
  ByteReader r{std::span<const std::uint8_t>(head)};
  char tag[4];
  std::uint32_t u32 = 0;
  if (!r.read_tag(tag) || !tag_is(tag, "RIFF") || !r.read_u32(u32) ||
      !r.read_tag(tag) || !tag_is(tag, "WAVE"))
    throw InputError("malformed-container", "missing RIFF/WAVE magic in " + path.string());
  const std::uint64_t file_size = std::filesystem::file_size(path);
  FmtChunk fmt;
  bool have_fmt = false;
  std::uint64_t abs_pos = 12;
  while (abs_pos + 8 <= file_size && r.remaining() >= 8) {
    r.read_tag(tag);
    r.read_u32(u32);
    abs_pos += 8;
    if (tag_is(tag, "fmt ")) {
      if (u32 < 16 || r.remaining() < 16)
        throw InputError("malformed-container", "bad fmt chunk in " + path.string());
      ByteReader f{std::span<const std::uint8_t>(head).subspan(r.pos, 16)};
      f.read_u16(fmt.audio_format);
      f.read_u16(fmt.channels);
      f.read_u32(fmt.sample_rate);
      std::uint32_t byte_rate;
      f.read_u32(byte_rate);
      f.read_u16(fmt.block_align);
      f.read_u16(fmt.bits_per_sample);
      have_fmt = true;
    } else if (tag_is(tag, "data")) {
      if (!have_fmt)
        throw InputError("malformed-container", "data chunk before fmt chunk in " + path.string());
      if (abs_pos + u32 > file_size)
        throw InputError("truncated-input", "data chunk size exceeds file size in " + path.string());
      if (fmt.channels == 0 || fmt.sample_rate == 0)
        throw InputError("malformed-container", "bad fmt values in " + path.string());
      WavInfo info;
      info.format.format = classify_encoding(fmt);
      info.format.sample_rate = static_cast<int>(fmt.sample_rate);
      info.format.channels = fmt.channels;
      const std::size_t bps = info.format.format == SampleFormat::Int16 ? 2 : 4;
      info.frames = u32 / (bps * fmt.channels);
      info.duration_s = static_cast<double>(info.frames) / fmt.sample_rate;
      return info;
    }
    const std::uint64_t advance = static_cast<std::uint64_t>(u32) + (u32 & 1u);
    abs_pos += advance;
    if (advance > r.remaining()) break;
    r.pos += static_cast<std::size_t>(advance);
  }
  throw InputError("malformed-container", "missing fmt/data chunk in " + path.string());
}

AudioClip load_wav_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_wav(bytes);
}

void save_wav_file(const std::filesystem::path& path, const AudioClip& clip,
                   SampleFormat format) {
  const auto bytes = encode_wav(clip, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("io-error", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("io-error", "short write to " + path.string());
}

AudioClip mixdown(const AudioClip& clip) {
  if (clip.channels() == 0)
    throw InputError("empty-input", "cannot mix down a clip with no channels");
  if (clip.is_mono()) return clip;
  const std::size_t len = clip.length();
  std::vector<float> mono(len);
  const double scale = 1.0 / clip.channels();
  for (std::size_t i = 0; i < len; ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.samples) acc += ch[i];
    mono[i] = static_cast<float>(acc * scale);
  }
  return AudioClip::mono(std::move(mono), clip.sample_rate);
}

AudioClip resample(const AudioClip& clip, int target_rate, ResampleQuality quality) {
  if (target_rate <= 0) throw InputError("invalid-rate", "target rate must be positive");
  require_mono(clip, "resample");
  if (target_rate == clip.sample_rate) return clip;

  const std::span<const float> in = clip.channel(0);
  const std::size_t in_len = in.size();
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) * target_rate / clip.sample_rate));
  std::vector<float> out(out_len);
  if (in_len == 0) return AudioClip::mono(std::move(out), target_rate);

  if (quality == ResampleQuality::Linear) {
    for (std::size_t i = 0; i < out_len; ++i) {
      const double t = i * step;
      const std::size_t n0 = static_cast<std::size_t>(t);
      const double frac = t - static_cast<double>(n0);
      const double a = n0 < in_len ? in[n0] : 0.0;
      const double b = n0 + 1 < in_len ? in[n0 + 1] : 0.0;
      out[i] = static_cast<float>(a + (b - a) * frac);
    }
    return AudioClip::mono(std::move(out), target_rate);
  }

  // Windowed sinc: cutoff at the lower Nyquist, kernel stretched accordingly
  // when downsampling.
  constexpr int kTapsPerSide = 32;
  const double fc = std::min(1.0, static_cast<double>(target_rate) / clip.sample_rate);
  const double half_width = kTapsPerSide / fc;
  const KaiserTable& window = kaiser_table();
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = i * step;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - half_width)));
    const long hi = std::min(static_cast<long>(in_len) - 1,
                             static_cast<long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long n = lo; n <= hi; ++n) {
      const double x = t - static_cast<double>(n);
      acc += in[static_cast<std::size_t>(n)] * fc * sinc(fc * x) * window(x / half_width);
    }
    out[i] = static_cast<float>(std::clamp(acc, -1.0, 1.0));
  }
  return AudioClip::mono(std::move(out), target_rate);
}

}  // namespace voxbal
