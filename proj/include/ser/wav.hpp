#pragma once

#include <string>
#include <vector>

#include "ser/dsp.hpp"

namespace ser::wav {

/// Decoded PCM audio, one vector per channel, samples scaled to [-1, 1].
struct WavData {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
};

/// Reads a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
WavData read(const std::string& path);

/// Writes mono 16-bit PCM; used by tests and fixture tooling.
void write_pcm16(const std::string& path, const std::vector<double>& mono, int sample_rate);

/// Ingest: decode, average channels to mono, resample to target_rate, clamp
/// to [-1, 1].
dsp::Utterance load_utterance(const std::string& path, const std::string& id,
                              const std::string& speaker, int target_rate);

}  // namespace ser::wav
