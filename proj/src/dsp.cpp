#include "ser/dsp.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ser/kernels.hpp"

namespace ser::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT over interleaved (re, im) pairs.
void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
  const size_t n = re.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / double(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (size_t j = 0; j < len / 2; ++j) {
        const size_t a = i + j, b = i + j + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

}  // namespace

void DspConfig::validate(int pool_factor) const {
  if (sample_rate <= 0) throw std::invalid_argument("dsp config: sample_rate must be positive");
  if (frame_ms <= 0 || hop_ms <= 0)
    throw std::invalid_argument("dsp config: frame_ms and hop_ms must be positive");
  if (!power_of_two(n_fft)) throw std::invalid_argument("dsp config: n_fft must be a power of two");
  if (frame_len() > n_fft)
    throw std::invalid_argument("dsp config: frame length " + std::to_string(frame_len()) +
                                " exceeds n_fft " + std::to_string(n_fft));
  if (n_mels < 2) throw std::invalid_argument("dsp config: n_mels must be at least 2");
  if (target_frames <= 0) throw std::invalid_argument("dsp config: target_frames must be positive");
  if (!(log_floor > 0.0)) throw std::invalid_argument("dsp config: log_floor must be positive");
  if (pool_factor > 0) {
    if (n_mels % pool_factor != 0)
      throw std::invalid_argument("dsp config: n_mels " + std::to_string(n_mels) +
                                  " not divisible by pooling factor " + std::to_string(pool_factor));
    if (target_frames % pool_factor != 0)
      throw std::invalid_argument("dsp config: target_frames " + std::to_string(target_frames) +
                                  " not divisible by pooling factor " + std::to_string(pool_factor));
  }
}

std::string DspConfig::canonical() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "dspv1;sr=%d;frame_ms=%d;hop_ms=%d;n_fft=%d;n_mels=%d;target=%d;floor=%.17g;win=hann",
                sample_rate, frame_ms, hop_ms, n_fft, n_mels, target_frames, log_floor);
  return buf;
}

int frame_count(i64 n_samples, int frame_len, int hop_len) {
  if (n_samples < frame_len) throw std::invalid_argument("utterance too short");
  return static_cast<int>((n_samples - frame_len) / hop_len) + 1;
}

Tensor frame_signal(const std::vector<double>& samples, const DspConfig& cfg) {
  const int L = cfg.frame_len(), H = cfg.hop_len();
  const int nf = frame_count(static_cast<i64>(samples.size()), L, H);
  Tensor frames({nf, L});
  std::vector<double> window(static_cast<size_t>(L));
  for (int i = 0; i < L; ++i) window[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / L);
  kernels::parallel_range(nf, [&](i64 f0, i64 f1) {
    for (i64 f = f0; f < f1; ++f) {
      const double* src = samples.data() + f * H;
      double* dst = frames.data() + f * L;
      for (int i = 0; i < L; ++i) dst[i] = src[i] * window[static_cast<size_t>(i)];
    }
  });
  return frames;
}

std::vector<double> power_spectrum(const double* frame, int len, int n_fft) {
  if (!power_of_two(n_fft)) throw std::invalid_argument("power_spectrum: n_fft must be a power of two");
  if (len > n_fft) throw std::invalid_argument("power_spectrum: frame longer than n_fft");
  std::vector<double> re(static_cast<size_t>(n_fft), 0.0), im(static_cast<size_t>(n_fft), 0.0);
  for (int i = 0; i < len; ++i) re[static_cast<size_t>(i)] = frame[i];
  fft_radix2(re, im);
  std::vector<double> power(static_cast<size_t>(n_fft / 2 + 1));
  for (int k = 0; k <= n_fft / 2; ++k)
    power[static_cast<size_t>(k)] = re[static_cast<size_t>(k)] * re[static_cast<size_t>(k)] +
                                    im[static_cast<size_t>(k)] * im[static_cast<size_t>(k)];
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(const DspConfig& cfg) {
  if (cfg.n_mels < 2) throw std::invalid_argument("mel_filterbank: n_mels must be at least 2");
  const int bins = cfg.n_fft / 2 + 1;
  const double fmax = cfg.sample_rate / 2.0;
  std::vector<double> centers(static_cast<size_t>(cfg.n_mels) + 2);
  const double mel_hi = hz_to_mel(fmax);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    centers[static_cast<size_t>(i)] = mel_to_hz(mel_hi * i / (cfg.n_mels + 1));

  Tensor fb({cfg.n_mels, bins});
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = centers[static_cast<size_t>(m)];
    const double mid = centers[static_cast<size_t>(m) + 1];
    const double hi = centers[static_cast<size_t>(m) + 2];
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const double f = double(k) * cfg.sample_rate / cfg.n_fft;
      double w = 0.0;
      if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      if (w > 0.0) any = true;
      fb.at2(m, k) = w;
    }
    if (!any)
      throw std::invalid_argument("mel_filterbank: filter " + std::to_string(m) +
                                  " has empty support; n_mels too large for n_fft resolution");
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Utterance& u, const DspConfig& cfg) {
  cfg.validate();
  if (u.sample_rate != cfg.sample_rate)
    throw std::invalid_argument("mel_spectrogram: utterance not at config sample rate (resample on ingest)");
  const Tensor frames = frame_signal(u.samples, cfg);
  const Tensor fb = mel_filterbank(cfg);
  const int nf = frames.dim(0), L = frames.dim(1), bins = cfg.n_fft / 2 + 1;
  MelSpectrogram out;
  out.values = Tensor({cfg.n_mels, nf});
  out.config_fingerprint = cfg.fingerprint();
  kernels::parallel_range(nf, [&](i64 f0, i64 f1) {
    for (i64 f = f0; f < f1; ++f) {
      const std::vector<double> power = power_spectrum(frames.data() + f * L, L, cfg.n_fft);
      for (int m = 0; m < cfg.n_mels; ++m) {
        double acc = 0.0;
        const double* row = fb.data() + i64(m) * bins;
        for (int k = 0; k < bins; ++k) acc += row[k] * power[static_cast<size_t>(k)];
        out.values.at2(m, static_cast<int>(f)) = std::log(acc + cfg.log_floor);
      }
    }
  });
  return out;
}

MelSpectrogram pad_or_truncate(const MelSpectrogram& spec, int target_frames, double log_floor) {
  if (target_frames <= 0) throw std::invalid_argument("pad_or_truncate: target_frames must be positive");
  const int mels = spec.n_mels(), nf = spec.n_frames();
  const double pad = std::log(log_floor);
  MelSpectrogram out;
  out.config_fingerprint = spec.config_fingerprint;
  out.values = Tensor({mels, target_frames});
  const int keep = std::min(nf, target_frames);
  for (int m = 0; m < mels; ++m) {
    for (int t = 0; t < keep; ++t) out.values.at2(m, t) = spec.values.at2(m, t);
    for (int t = keep; t < target_frames; ++t) out.values.at2(m, t) = pad;
  }
  return out;
}

std::vector<double> resample_linear(const std::vector<double>& x, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw std::invalid_argument("resample: rates must be positive");
  if (from_rate == to_rate || x.empty()) return x;
  const double ratio = double(from_rate) / to_rate;
  const auto n_out = static_cast<size_t>(std::floor(double(x.size() - 1) / ratio)) + 1;
  std::vector<double> out(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    const double pos = double(i) * ratio;
    const auto i0 = static_cast<size_t>(pos);
    const double frac = pos - double(i0);
    const double a = x[i0];
    const double b = i0 + 1 < x.size() ? x[i0 + 1] : x[i0];
    out[i] = a + (b - a) * frac;
  }
  return out;
}

}  // namespace ser::dsp
