// serl/policy.cc

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

#include "serl/policy.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace serl {
namespace {

constexpr double kFeatureEps = 1e-6;
constexpr double kFeatureScale = 0.25;
constexpr double kTwoPi = 6.28318530717958647692;

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Silence feature value: what an out-of-range (or all-zero) cell reads.
double LogMagFeature(double magnitude) {
  return kFeatureScale * std::log10(magnitude + kFeatureEps);
}

void CheckChannelCount(int c) {
  SERL_REQUIRE(c == 1 || c == 3, "unsupported channel count ", c);
}

}  // namespace

void ToyMaskNetGrad::SetZero() {
  w1.setZero();
  b1.setZero();
  w2.setZero();
  b2.setZero();
}

void ToyMaskNetGrad::Add(const ToyMaskNetGrad& other, double scale) {
  w1 += scale * other.w1;
  b1 += scale * other.b1;
  w2 += scale * other.w2;
  b2 += scale * other.b2;
}

double ToyMaskNetGrad::SquaredNorm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() +
         b2.squaredNorm();
}

ToyMaskNet::ToyMaskNet(int channels, int hidden_units, double mask_max)
    : channels_(channels), hidden_units_(hidden_units), mask_max_(mask_max) {
  CheckChannelCount(channels);
  SERL_REQUIRE(hidden_units >= 1, "hidden_units must be >= 1");
  SERL_REQUIRE(mask_max > 0.0, "mask_max must be > 0");
  w1_ = Eigen::MatrixXd::Zero(hidden_units, kFeatureDim);
  b1_ = Eigen::VectorXd::Zero(hidden_units);
  w2_ = Eigen::MatrixXd::Zero(channels, hidden_units);
  b2_ = Eigen::VectorXd::Zero(channels);
}

ToyMaskNet ToyMaskNet::Identity(int channels, int hidden_units,
                                double mask_max) {
  return ToyMaskNet(channels, hidden_units, mask_max);
}

ToyMaskNet ToyMaskNet::Random(int channels, uint64_t seed, int hidden_units,
                              double mask_max) {
  ToyMaskNet net(channels, hidden_units, mask_max);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(kFeatureDim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_units));
  for (int i = 0; i < net.w1_.rows(); ++i)
    for (int j = 0; j < net.w1_.cols(); ++j) net.w1_(i, j) = s1 * dist(rng);
  for (int i = 0; i < net.w2_.rows(); ++i)
    for (int j = 0; j < net.w2_.cols(); ++j) net.w2_(i, j) = s2 * dist(rng);
  return net;
}

ChannelTensor ToyMaskNet::Forward(const TFRepresentation& x,
                                  ForwardCache* cache) const {
  const ChannelTensor& in = x.channels;
  SERL_REQUIRE(in.channels == channels_, "policy expects ", channels_,
               " channels, input has ", in.channels);
  const int freq_bins = in.freq_bins;
  const int frames = in.frames;
  const Eigen::Index n = static_cast<Eigen::Index>(freq_bins) * frames;

  Eigen::MatrixXd features(kFeatureDim, n);
  const double silence = LogMagFeature(0.0);
  for (int f = 0; f < freq_bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      const Eigen::Index col = static_cast<Eigen::Index>(f) * frames + t;
      int k = 0;
      for (int df = -1; df <= 1; ++df) {
        for (int dt = -1; dt <= 1; ++dt) {
          const int ff = f + df;
          const int tt = t + dt;
          features(k++, col) =
              (ff >= 0 && ff < freq_bins && tt >= 0 && tt < frames)
                  ? LogMagFeature(in.at(ff, tt, 0))
                  : silence;
        }
      }
      features(k, col) =
          freq_bins > 1 ? static_cast<double>(f) / (freq_bins - 1) - 0.5 : 0.0;
    }
  }

  Eigen::MatrixXd hidden =
      ((w1_ * features).colwise() + b1_).array().tanh().matrix();
  Eigen::MatrixXd z = (w2_ * hidden).colwise() + b2_;
  Eigen::MatrixXd sig =
      z.array().unaryExpr([](double v) { return Sigmoid(v); }).matrix();

  ChannelTensor masks = ChannelTensor::Zeros(freq_bins, frames, channels_);
  for (int f = 0; f < freq_bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      const Eigen::Index col = static_cast<Eigen::Index>(f) * frames + t;
      masks.at(f, t, 0) = mask_max_ * sig(0, col);
      for (int c = 1; c < channels_; ++c) {
        masks.at(f, t, c) = mask_max_ * (sig(c, col) - 0.5);
      }
    }
  }

  if (cache != nullptr) {
    cache->features = std::move(features);
    cache->hidden = std::move(hidden);
    cache->sig = std::move(sig);
    cache->freq_bins = freq_bins;
    cache->frames = frames;
  }
  return masks;
}

void ToyMaskNet::Backward(const ForwardCache& cache,
                          const ChannelTensor& dmasks,
                          ToyMaskNetGrad* grad) const {
  SERL_REQUIRE(dmasks.freq_bins == cache.freq_bins &&
                   dmasks.frames == cache.frames &&
                   dmasks.channels == channels_,
               "backward: gradient shape mismatch");
  const Eigen::Index n = cache.hidden.cols();
  Eigen::MatrixXd dz(channels_, n);
  for (int f = 0; f < cache.freq_bins; ++f) {
    for (int t = 0; t < cache.frames; ++t) {
      const Eigen::Index col =
          static_cast<Eigen::Index>(f) * cache.frames + t;
      for (int c = 0; c < channels_; ++c) {
        const double s = cache.sig(c, col);
        dz(c, col) = dmasks.at(f, t, c) * mask_max_ * s * (1.0 - s);
      }
    }
  }
  grad->w2 += dz * cache.hidden.transpose();
  grad->b2 += dz.rowwise().sum();
  Eigen::MatrixXd dh = w2_.transpose() * dz;
  Eigen::MatrixXd dpre =
      (dh.array() * (1.0 - cache.hidden.array().square())).matrix();
  grad->w1 += dpre * cache.features.transpose();
  grad->b1 += dpre.rowwise().sum();
}

void ToyMaskNet::ApplyStep(const ToyMaskNetGrad& grad, double learning_rate) {
  w1_ -= learning_rate * grad.w1;
  b1_ -= learning_rate * grad.b1;
  w2_ -= learning_rate * grad.w2;
  b2_ -= learning_rate * grad.b2;
}

ToyMaskNetGrad ToyMaskNet::ZeroGrad() const {
  ToyMaskNetGrad g;
  g.w1 = Eigen::MatrixXd::Zero(hidden_units_, kFeatureDim);
  g.b1 = Eigen::VectorXd::Zero(hidden_units_);
  g.w2 = Eigen::MatrixXd::Zero(channels_, hidden_units_);
  g.b2 = Eigen::VectorXd::Zero(channels_);
  return g;
}

std::string ToyMaskNet::ArchitectureId() const {
  return StrCat("toymasknet-v1:h", hidden_units_, ":c", channels_);
}

std::vector<double> ToyMaskNet::FlattenParams() const {
  std::vector<double> out;
  out.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  for (int i = 0; i < w1_.rows(); ++i)
    for (int j = 0; j < w1_.cols(); ++j) out.push_back(w1_(i, j));
  for (int i = 0; i < b1_.size(); ++i) out.push_back(b1_(i));
  for (int i = 0; i < w2_.rows(); ++i)
    for (int j = 0; j < w2_.cols(); ++j) out.push_back(w2_(i, j));
  for (int i = 0; i < b2_.size(); ++i) out.push_back(b2_(i));
  return out;
}

void ToyMaskNet::SetParams(const std::vector<double>& params) {
  const size_t expected = static_cast<size_t>(w1_.size()) + b1_.size() +
                          w2_.size() + b2_.size();
  SERL_REQUIRE(params.size() == expected, "parameter count mismatch: got ",
               params.size(), ", expected ", expected);
  size_t k = 0;
  for (int i = 0; i < w1_.rows(); ++i)
    for (int j = 0; j < w1_.cols(); ++j) w1_(i, j) = params[k++];
  for (int i = 0; i < b1_.size(); ++i) b1_(i) = params[k++];
  for (int i = 0; i < w2_.rows(); ++i)
    for (int j = 0; j < w2_.cols(); ++j) w2_(i, j) = params[k++];
  for (int i = 0; i < b2_.size(); ++i) b2_(i) = params[k++];
}

Policy::Policy(ToyMaskNet net, FrameSpec frame_spec, PolicyRole role)
    : net_(std::move(net)),
      frame_spec_(frame_spec),
      role_(role),
      architecture_id_(net_.ArchitectureId()) {}

Policy Policy::Snapshot(PolicyRole new_role) const {
  SERL_REQUIRE(role_ == PolicyRole::kRlTrainable,
               "snapshot: source policy must be RL-trainable");
  SERL_REQUIRE(new_role != PolicyRole::kRlTrainable,
               "snapshot: snapshots are frozen");
  return Policy(net_, frame_spec_, new_role);
}

void Policy::ApplyStep(const ToyMaskNetGrad& grad, double learning_rate) {
  SERL_REQUIRE(role_ == PolicyRole::kRlTrainable,
               "refusing to update a frozen policy");
  net_.ApplyStep(grad, learning_rate);
}

ChannelTensor PredictMean(const Policy& policy, const TFRepresentation& x,
                          ToyMaskNet::ForwardCache* cache) {
  return policy.net().Forward(x, cache);
}

MaskAction SampleAction(const ChannelTensor& mean_masks, double sigma,
                        std::mt19937_64& rng) {
  SERL_REQUIRE(sigma > 0.0, "sample_action: sigma must be > 0");
  MaskAction action;
  action.mean_masks = mean_masks;
  action.sampled_masks = mean_masks;
  action.sigma = sigma;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : action.sampled_masks.data) v += noise(rng);
  action.log_prob =
      GaussianMeanLogProb(action.mean_masks, action.sampled_masks, sigma);
  return action;
}

MaskAction SampleAction(const ChannelTensor& mean_masks, double sigma,
                        uint64_t seed) {
  std::mt19937_64 rng(seed);
  return SampleAction(mean_masks, sigma, rng);
}

double GaussianMeanLogProb(const ChannelTensor& mean, const ChannelTensor& a,
                           double sigma) {
  SERL_REQUIRE(mean.SameShape(a), "log_prob: shape mismatch");
  SERL_REQUIRE(sigma > 0.0, "log_prob: sigma must be > 0");
  SERL_REQUIRE(!mean.data.empty(), "log_prob: empty tensors");
  double ss = 0.0;
  for (size_t i = 0; i < mean.data.size(); ++i) {
    const double d = a.data[i] - mean.data[i];
    ss += d * d;
  }
  const double n = static_cast<double>(mean.data.size());
  return -ss / (2.0 * sigma * sigma * n) - std::log(sigma * std::sqrt(kTwoPi));
}

ChannelTensor GaussianMeanLogProbGradMean(const ChannelTensor& mean,
                                          const ChannelTensor& a,
                                          double sigma) {
  SERL_REQUIRE(mean.SameShape(a), "log_prob grad: shape mismatch");
  const double n = static_cast<double>(mean.data.size());
  ChannelTensor grad = mean;
  for (size_t i = 0; i < mean.data.size(); ++i) {
    grad.data[i] = (a.data[i] - mean.data[i]) / (sigma * sigma * n);
  }
  return grad;
}

double LogLikelihood(const Policy& policy, const TFRepresentation& x,
                     const ChannelTensor& a, double sigma) {
  const ChannelTensor mean = PredictMean(policy, x);
  SERL_REQUIRE(mean.SameShape(a), "log_likelihood: action shape mismatch");
  return GaussianMeanLogProb(mean, a, sigma);
}

ChannelTensor ApplyMasks(const ChannelTensor& masks,
                         const TFRepresentation& x) {
  SERL_REQUIRE(masks.SameShape(x.channels), "apply_masks: shape mismatch");
  for (double v : masks.data) {
    SERL_REQUIRE(std::isfinite(v), "apply_masks: non-finite mask");
  }
  const int freq_bins = masks.freq_bins;
  const int frames = masks.frames;
  ChannelTensor out =
      ChannelTensor::Zeros(freq_bins, frames, masks.channels);
  if (masks.channels == 1) {
    for (int f = 0; f < freq_bins; ++f) {
      for (int t = 0; t < frames; ++t) {
        out.at(f, t, 0) = masks.at(f, t, 0) * x.channels.at(f, t, 0);
      }
    }
    return out;
  }
  for (int f = 0; f < freq_bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      // M0 .* |X| on the noisy phase is M0 .* X elementwise.
      const std::complex<double> v = x.complex_spec.at(f, t);
      const double re = masks.at(f, t, 0) * v.real() + masks.at(f, t, 1);
      const double im = masks.at(f, t, 0) * v.imag() + masks.at(f, t, 2);
      out.at(f, t, 0) = std::hypot(re, im);
      out.at(f, t, 1) = re;
      out.at(f, t, 2) = im;
    }
  }
  return out;
}

ChannelTensor ApplyMasksBackward(const ChannelTensor& dchannels,
                                 const ChannelTensor& masks,
                                 const TFRepresentation& x) {
  SERL_REQUIRE(dchannels.SameShape(masks), "apply_masks grad: shape mismatch");
  SERL_REQUIRE(masks.SameShape(x.channels), "apply_masks grad: input mismatch");
  const int freq_bins = masks.freq_bins;
  const int frames = masks.frames;
  ChannelTensor grad =
      ChannelTensor::Zeros(freq_bins, frames, masks.channels);
  if (masks.channels == 1) {
    for (int f = 0; f < freq_bins; ++f) {
      for (int t = 0; t < frames; ++t) {
        grad.at(f, t, 0) = dchannels.at(f, t, 0) * x.channels.at(f, t, 0);
      }
    }
    return grad;
  }
  for (int f = 0; f < freq_bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      const std::complex<double> v = x.complex_spec.at(f, t);
      const double re = masks.at(f, t, 0) * v.real() + masks.at(f, t, 1);
      const double im = masks.at(f, t, 0) * v.imag() + masks.at(f, t, 2);
      const double mag = std::hypot(re, im);
      double dre = dchannels.at(f, t, 1);
      double dim = dchannels.at(f, t, 2);
      if (mag > 1e-300) {
        dre += dchannels.at(f, t, 0) * re / mag;
        dim += dchannels.at(f, t, 0) * im / mag;
      }
      grad.at(f, t, 0) = dre * v.real() + dim * v.imag();
      grad.at(f, t, 1) = dre;
      grad.at(f, t, 2) = dim;
    }
  }
  return grad;
}

TFRepresentation EnhancedRepresentation(const ChannelTensor& masks,
                                        const TFRepresentation& x) {
  ChannelTensor channels = ApplyMasks(masks, x);
  Spectrogram complex_spec =
      RecombineChannels(channels, &x.complex_spec);
  return TFRepresentation{std::move(complex_spec), std::move(channels),
                          x.frame_spec, x.original_length_samples};
}

Waveform Enhance(const Policy& policy, const Waveform& x, bool deterministic,
                 double sigma, std::mt19937_64* rng) {
  const TFRepresentation tf = Stft(x, policy.frame_spec(), policy.channels());
  ChannelTensor masks = PredictMean(policy, tf);
  if (!deterministic) {
    SERL_REQUIRE(rng != nullptr, "enhance: stochastic mode needs an rng");
    masks = SampleAction(masks, sigma, *rng).sampled_masks;
  }
  Waveform out = Istft(EnhancedRepresentation(masks, tf));
  out.label = SignalLabel::kEnhanced;
  return out;
}

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'E', 'R', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void PutRaw(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T GetRaw(std::ifstream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  SERL_REQUIRE(is.good(), "truncated checkpoint ", path);
  return v;
}

}  // namespace

void SaveCheckpoint(const Policy& policy, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  SERL_REQUIRE(os.good(), "cannot open checkpoint ", path, " for writing");
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutRaw(os, kCheckpointVersion);
  const std::string& arch = policy.architecture_id();
  PutRaw(os, static_cast<uint32_t>(arch.size()));
  os.write(arch.data(), static_cast<std::streamsize>(arch.size()));
  const FrameSpec& fs = policy.frame_spec();
  PutRaw(os, static_cast<int32_t>(fs.sample_rate_hz()));
  PutRaw(os, fs.window_ms());
  PutRaw(os, fs.hop_ms());
  PutRaw(os, static_cast<uint32_t>(fs.window_kind()));
  PutRaw(os, static_cast<int32_t>(policy.channels()));
  PutRaw(os, static_cast<int32_t>(policy.net().hidden_units()));
  PutRaw(os, policy.net().mask_max());
  PutRaw(os, static_cast<uint32_t>(policy.role()));
  const std::vector<double> params = policy.net().FlattenParams();
  PutRaw(os, static_cast<uint64_t>(params.size()));
  os.write(reinterpret_cast<const char*>(params.data()),
           static_cast<std::streamsize>(params.size() * sizeof(double)));
  SERL_REQUIRE(os.good(), "write failed for checkpoint ", path);
}

Policy LoadCheckpoint(const std::string& path,
                      const std::string& expected_architecture_id) {
  std::ifstream is(path, std::ios::binary);
  SERL_REQUIRE(is.good(), "cannot open checkpoint ", path);
  char magic[8];
  is.read(magic, sizeof(magic));
  SERL_REQUIRE(is.good() && std::memcmp(magic, kCheckpointMagic, 8) == 0, path,
               ": not a serl checkpoint");
  const uint32_t version = GetRaw<uint32_t>(is, path);
  SERL_REQUIRE(version == kCheckpointVersion, path,
               ": unsupported checkpoint version ", version);
  const uint32_t arch_len = GetRaw<uint32_t>(is, path);
  SERL_REQUIRE(arch_len < 4096, path, ": implausible architecture id");
  std::string arch(arch_len, '\0');
  is.read(arch.data(), arch_len);
  SERL_REQUIRE(is.good(), "truncated checkpoint ", path);
  const int32_t sample_rate = GetRaw<int32_t>(is, path);
  const double window_ms = GetRaw<double>(is, path);
  const double hop_ms = GetRaw<double>(is, path);
  const uint32_t window_kind = GetRaw<uint32_t>(is, path);
  const int32_t channels = GetRaw<int32_t>(is, path);
  const int32_t hidden = GetRaw<int32_t>(is, path);
  const double mask_max = GetRaw<double>(is, path);
  const uint32_t role = GetRaw<uint32_t>(is, path);
  const uint64_t count = GetRaw<uint64_t>(is, path);
  std::vector<double> params(count);
  is.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  SERL_REQUIRE(is.good(), "truncated checkpoint ", path);

  ToyMaskNet net = ToyMaskNet::Identity(channels, hidden, mask_max);
  SERL_REQUIRE(net.ArchitectureId() == arch, path,
               ": architecture id mismatch in archive: header says ", arch,
               ", parameters describe ", net.ArchitectureId());
  if (!expected_architecture_id.empty()) {
    SERL_REQUIRE(arch == expected_architecture_id, path,
                 ": architecture id mismatch: checkpoint has ", arch,
                 ", expected ", expected_architecture_id);
  }
  net.SetParams(params);
  FrameSpec spec(sample_rate, window_ms, hop_ms,
                 static_cast<WindowKind>(window_kind));
  return Policy(std::move(net), spec, static_cast<PolicyRole>(role));
}

}  // namespace serl
