// serl/tf.h
// Time-frequency transforms: forward/inverse STFT, channel extraction and
// recombination, shared by the policy, reward, and metrics code.

// Copyright 2026  The serl authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SERL_TF_H_
#define SERL_TF_H_

#include <complex>
#include <cstdint>
#include <vector>

#include "serl/common.h"

namespace serl {

enum class SignalLabel { kNoisy, kClean, kEnhanced };

// Mono waveform at a fixed sample rate. Samples are nominally full scale in
// [-1, 1]; WAV output clamps, in-memory processing does not.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
  SignalLabel label = SignalLabel::kNoisy;

  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class WindowKind { kHann };

// Analysis framing. Construction validates the (window, hop) pair: inversion
// by weighted overlap-add needs every sample covered by a nonzero window
// value, which we guarantee by requiring hop <= window / 2.
class FrameSpec {
 public:
  FrameSpec(int sample_rate_hz, double window_ms, double hop_ms,
            WindowKind window_kind = WindowKind::kHann);

  int sample_rate_hz() const { return sample_rate_hz_; }
  double window_ms() const { return window_ms_; }
  double hop_ms() const { return hop_ms_; }
  WindowKind window_kind() const { return window_kind_; }

  int window_samples() const { return window_samples_; }
  int hop_samples() const { return hop_samples_; }
  int num_bins() const { return window_samples_ / 2 + 1; }

  // Periodic Hann, w[n] = 0.5 * (1 - cos(2 pi n / W)).
  std::vector<double> AnalysisWindow() const;

  bool operator==(const FrameSpec& other) const = default;

 private:
  int sample_rate_hz_;
  double window_ms_;
  double hop_ms_;
  WindowKind window_kind_;
  int window_samples_;
  int hop_samples_;
};

// Real F x T x C tensor, C in {1, 3}. Channel order for C=3 is
// (magnitude, real, imaginary). Storage is (f, t, c) row-major.
struct ChannelTensor {
  int freq_bins = 0;
  int frames = 0;
  int channels = 0;
  std::vector<double> data;

  static ChannelTensor Zeros(int freq_bins, int frames, int channels);

  double& at(int f, int t, int c) {
    return data[(static_cast<size_t>(f) * frames + t) * channels + c];
  }
  double at(int f, int t, int c) const {
    return data[(static_cast<size_t>(f) * frames + t) * channels + c];
  }
  size_t size() const { return data.size(); }
  bool SameShape(const ChannelTensor& other) const {
    return freq_bins == other.freq_bins && frames == other.frames &&
           channels == other.channels;
  }
};

// Complex F x T spectrogram, (f, t) row-major.
struct Spectrogram {
  int freq_bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> data;

  static Spectrogram Zeros(int freq_bins, int frames);

  std::complex<double>& at(int f, int t) {
    return data[static_cast<size_t>(f) * frames + t];
  }
  std::complex<double> at(int f, int t) const {
    return data[static_cast<size_t>(f) * frames + t];
  }
};

// One analysed utterance: the complex spectrogram, the derived channel
// tensor, and everything needed to invert back to the time domain.
struct TFRepresentation {
  Spectrogram complex_spec;
  ChannelTensor channels;
  FrameSpec frame_spec;
  int original_length_samples = 0;
};

// Forward STFT. The signal is padded with window/2 zeros at the front
// (centered frames) and zero-filled at the tail; the frame count is
// T = ceil(len / hop) + 1. Rejects waveforms shorter than one window.
TFRepresentation Stft(const Waveform& w, const FrameSpec& spec,
                      int num_channels);

// Weighted overlap-add inverse, normalized by the summed squared window;
// output is truncated to original_length_samples. Exact inverse of Stft
// for any FrameSpec that passed construction.
Waveform Istft(const TFRepresentation& tf);

// C=1 -> (magnitude); C=3 -> (magnitude, real, imaginary).
ChannelTensor ExtractChannels(const Spectrogram& spec, int num_channels);

// Inverse of ExtractChannels. For C=3 the complex value is rebuilt from the
// real and imaginary channels directly. For C=1 the magnitude channel is
// combined with the unit phase of phase_source (zero bins get phase 1), so
// a null phase_source is an error.
Spectrogram RecombineChannels(const ChannelTensor& channels,
                              const Spectrogram* phase_source);

}  // namespace serl

#endif  // SERL_TF_H_
