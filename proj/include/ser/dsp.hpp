#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ser/tensor.hpp"

namespace ser::dsp {

/// One audio segment. Samples are mono, normalized to [-1, 1] on ingest.
struct Utterance {
  std::string id;
  std::string speaker;
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

struct DspConfig {
  int sample_rate = 16000;
  int frame_ms = 25;
  int hop_ms = 10;
  int n_fft = 512;
  int n_mels = 64;
  int target_frames = 1280;
  double log_floor = 1e-10;

  int frame_len() const { return frame_ms * sample_rate / 1000; }
  int hop_len() const { return hop_ms * sample_rate / 1000; }

  /// Throws std::invalid_argument on inconsistent settings. pool_factor is
  /// the classifier's cumulative pooling (2*2*4*4); n_mels and target_frames
  /// must divide by it so the feature map collapses to integer shapes.
  void validate(int pool_factor = 64) const;

  std::string canonical() const;
  std::uint64_t fingerprint() const { return fnv1a(canonical()); }
};

/// Log-mel energy grid, [n_mels x n_frames].
struct MelSpectrogram {
  Tensor values;
  std::uint64_t config_fingerprint = 0;

  int n_mels() const { return values.ndim() == 2 ? values.dim(0) : 0; }
  int n_frames() const { return values.ndim() == 2 ? values.dim(1) : 0; }
};

/// floor((n - frame_len) / hop_len) + 1; requires n >= frame_len.
int frame_count(i64 n_samples, int frame_len, int hop_len);

/// Slices the signal into hop-offset frames and applies a periodic Hann
/// window. Returns [n_frames x frame_len]. Throws "utterance too short" if
/// the signal does not cover one frame.
Tensor frame_signal(const std::vector<double>& samples, const DspConfig& cfg);

/// |DFT_k|^2 for k = 0..n_fft/2 of the frame zero-padded to n_fft
/// (n_fft must be a power of two >= len).
std::vector<double> power_spectrum(const double* frame, int len, int n_fft);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters with centers equally spaced on the mel scale between
/// 0 Hz and sample_rate/2, evaluated at FFT bin centers.
/// Returns [n_mels x (n_fft/2 + 1)]. Throws if any filter has empty support.
Tensor mel_filterbank(const DspConfig& cfg);

/// log(filterbank * power_spectrum + log_floor) per frame.
MelSpectrogram mel_spectrogram(const Utterance& u, const DspConfig& cfg);

/// Fixes the time axis at target_frames: right-pads with log(log_floor)
/// columns or keeps the first target_frames columns.
MelSpectrogram pad_or_truncate(const MelSpectrogram& spec, int target_frames, double log_floor);

/// Linear-interpolation resampler used on ingest.
std::vector<double> resample_linear(const std::vector<double>& x, int from_rate, int to_rate);

}  // namespace ser::dsp
