// serl/tf.cc

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

#include "serl/tf.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace serl {
namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW plan creation is not thread safe; execution on distinct buffers is.
// Plans are created FFTW_UNALIGNED so the new-array execute functions accept
// arbitrary caller buffers.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

FftPlans& PlansFor(int window_samples) {
  static std::map<int, FftPlans>* cache = new std::map<int, FftPlans>();
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache->find(window_samples);
  if (it != cache->end()) return it->second;
  std::vector<double> real(window_samples, 0.0);
  std::vector<fftw_complex> cplx(window_samples / 2 + 1);
  FftPlans plans;
  plans.forward =
      fftw_plan_dft_r2c_1d(window_samples, real.data(), cplx.data(),
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.inverse =
      fftw_plan_dft_c2r_1d(window_samples, cplx.data(), real.data(),
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  SERL_REQUIRE(plans.forward != nullptr && plans.inverse != nullptr,
               "fftw plan creation failed for window ", window_samples);
  return cache->emplace(window_samples, plans).first->second;
}

int NumFrames(int length, int window, int hop) {
  // ceil(length / hop) + 1 centered frames.
  return static_cast<int>((length + hop - 1) / hop) + 1;
}

}  // namespace

FrameSpec::FrameSpec(int sample_rate_hz, double window_ms, double hop_ms,
                     WindowKind window_kind)
    : sample_rate_hz_(sample_rate_hz),
      window_ms_(window_ms),
      hop_ms_(hop_ms),
      window_kind_(window_kind) {
  SERL_REQUIRE(sample_rate_hz > 0, "sample rate must be positive, got ",
               sample_rate_hz);
  SERL_REQUIRE(window_ms > 0.0, "window_ms must be positive, got ", window_ms);
  SERL_REQUIRE(hop_ms > 0.0, "hop_ms must be positive, got ", hop_ms);
  SERL_REQUIRE(hop_ms <= window_ms, "hop (", hop_ms, " ms) exceeds window (",
               window_ms, " ms)");
  window_samples_ =
      static_cast<int>(std::lround(window_ms * sample_rate_hz / 1000.0));
  hop_samples_ =
      static_cast<int>(std::lround(hop_ms * sample_rate_hz / 1000.0));
  SERL_REQUIRE(window_samples_ >= 2, "window of ", window_samples_,
               " samples is too short");
  SERL_REQUIRE(hop_samples_ >= 1, "hop rounds to zero samples");
  // Exact weighted overlap-add inversion needs every sample covered by a
  // window value bounded away from zero.
  SERL_REQUIRE(2 * hop_samples_ <= window_samples_,
               "overlap-add violation: hop ", hop_samples_,
               " > half the window ", window_samples_);
}

std::vector<double> FrameSpec::AnalysisWindow() const {
  std::vector<double> w(window_samples_);
  for (int n = 0; n < window_samples_; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / window_samples_));
  }
  return w;
}

ChannelTensor ChannelTensor::Zeros(int freq_bins, int frames, int channels) {
  ChannelTensor t;
  t.freq_bins = freq_bins;
  t.frames = frames;
  t.channels = channels;
  t.data.assign(static_cast<size_t>(freq_bins) * frames * channels, 0.0);
  return t;
}

Spectrogram Spectrogram::Zeros(int freq_bins, int frames) {
  Spectrogram s;
  s.freq_bins = freq_bins;
  s.frames = frames;
  s.data.assign(static_cast<size_t>(freq_bins) * frames, {0.0, 0.0});
  return s;
}

TFRepresentation Stft(const Waveform& w, const FrameSpec& spec,
                      int num_channels) {
  SERL_REQUIRE(!w.samples.empty(), "stft: empty waveform");
  SERL_REQUIRE(w.sample_rate_hz == spec.sample_rate_hz(),
               "stft: waveform sample rate ", w.sample_rate_hz,
               " does not match FrameSpec ", spec.sample_rate_hz());
  const int window = spec.window_samples();
  const int hop = spec.hop_samples();
  const int length = static_cast<int>(w.samples.size());
  SERL_REQUIRE(length >= window, "stft: waveform of ", length,
               " samples is shorter than one window (", window, ")");
  for (double s : w.samples) {
    SERL_REQUIRE(std::isfinite(s), "stft: non-finite sample");
  }

  const int num_bins = spec.num_bins();
  const int frames = NumFrames(length, window, hop);
  const int pad_front = window / 2;
  const int padded_len = (frames - 1) * hop + window;

  std::vector<double> padded(padded_len, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), padded.begin() + pad_front);

  const std::vector<double> win = spec.AnalysisWindow();
  FftPlans& plans = PlansFor(window);

  Spectrogram spec_out = Spectrogram::Zeros(num_bins, frames);
  std::vector<double> frame(window);
  std::vector<fftw_complex> out(num_bins);
  for (int t = 0; t < frames; ++t) {
    const double* src = padded.data() + static_cast<size_t>(t) * hop;
    for (int n = 0; n < window; ++n) frame[n] = src[n] * win[n];
    fftw_execute_dft_r2c(plans.forward, frame.data(), out.data());
    for (int f = 0; f < num_bins; ++f) {
      spec_out.at(f, t) = {out[f][0], out[f][1]};
    }
  }

  ChannelTensor ch = ExtractChannels(spec_out, num_channels);
  return TFRepresentation{std::move(spec_out), std::move(ch), spec, length};
}

Waveform Istft(const TFRepresentation& tf) {
  const FrameSpec& spec = tf.frame_spec;
  const int window = spec.window_samples();
  const int hop = spec.hop_samples();
  const int num_bins = spec.num_bins();
  const int frames = tf.complex_spec.frames;
  SERL_REQUIRE(tf.complex_spec.freq_bins == num_bins,
               "istft: spectrogram has ", tf.complex_spec.freq_bins,
               " bins, FrameSpec expects ", num_bins);
  SERL_REQUIRE(frames > 0, "istft: empty spectrogram");
  const int length = tf.original_length_samples;
  SERL_REQUIRE(length > 0, "istft: missing original length");

  const int pad_front = window / 2;
  const int padded_len = (frames - 1) * hop + window;
  SERL_REQUIRE(pad_front + length <= padded_len,
               "istft: frame count too small for original length");

  const std::vector<double> win = spec.AnalysisWindow();
  FftPlans& plans = PlansFor(window);

  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> den(padded_len, 0.0);
  std::vector<fftw_complex> in(num_bins);
  std::vector<double> frame(window);
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < num_bins; ++f) {
      in[f][0] = tf.complex_spec.at(f, t).real();
      in[f][1] = tf.complex_spec.at(f, t).imag();
    }
    fftw_execute_dft_c2r(plans.inverse, in.data(), frame.data());
    double* dst = acc.data() + static_cast<size_t>(t) * hop;
    double* dend = den.data() + static_cast<size_t>(t) * hop;
    for (int n = 0; n < window; ++n) {
      dst[n] += win[n] * frame[n] / window;  // fftw c2r is unnormalized
      dend[n] += win[n] * win[n];
    }
  }

  Waveform out;
  out.sample_rate_hz = spec.sample_rate_hz();
  out.label = SignalLabel::kEnhanced;
  out.samples.resize(length);
  for (int n = 0; n < length; ++n) {
    const int idx = n + pad_front;
    SERL_REQUIRE(den[idx] > 1e-12, "istft: uncovered sample at ", n);
    out.samples[n] = acc[idx] / den[idx];
  }
  return out;
}

ChannelTensor ExtractChannels(const Spectrogram& spec, int num_channels) {
  SERL_REQUIRE(num_channels == 1 || num_channels == 3,
               "unsupported channel count ", num_channels);
  ChannelTensor ch =
      ChannelTensor::Zeros(spec.freq_bins, spec.frames, num_channels);
  for (int f = 0; f < spec.freq_bins; ++f) {
    for (int t = 0; t < spec.frames; ++t) {
      const std::complex<double> v = spec.at(f, t);
      ch.at(f, t, 0) = std::abs(v);
      if (num_channels == 3) {
        ch.at(f, t, 1) = v.real();
        ch.at(f, t, 2) = v.imag();
      }
    }
  }
  return ch;
}

Spectrogram RecombineChannels(const ChannelTensor& channels,
                              const Spectrogram* phase_source) {
  SERL_REQUIRE(channels.channels == 1 || channels.channels == 3,
               "unsupported channel count ", channels.channels);
  Spectrogram out = Spectrogram::Zeros(channels.freq_bins, channels.frames);
  if (channels.channels == 3) {
    for (int f = 0; f < channels.freq_bins; ++f) {
      for (int t = 0; t < channels.frames; ++t) {
        out.at(f, t) = {channels.at(f, t, 1), channels.at(f, t, 2)};
      }
    }
    return out;
  }
  SERL_REQUIRE(phase_source != nullptr,
               "recombine: C=1 requires a phase source");
  SERL_REQUIRE(phase_source->freq_bins == channels.freq_bins &&
                   phase_source->frames == channels.frames,
               "recombine: phase source shape mismatch");
  for (int f = 0; f < channels.freq_bins; ++f) {
    for (int t = 0; t < channels.frames; ++t) {
      const std::complex<double> p = phase_source->at(f, t);
      const double pm = std::abs(p);
      const std::complex<double> unit =
          pm > 0.0 ? p / pm : std::complex<double>(1.0, 0.0);
      out.at(f, t) = channels.at(f, t, 0) * unit;
    }
  }
  return out;
}

}  // namespace serl
