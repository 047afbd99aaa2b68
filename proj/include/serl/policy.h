// serl/policy.h
// Mask-predicting policies: deterministic mean prediction, Gaussian action
// sampling with log-likelihoods, the channel transforms that turn masks into
// an enhanced spectrogram, and parameter snapshots/checkpoints.

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

#ifndef SERL_POLICY_H_
#define SERL_POLICY_H_

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "serl/tf.h"

namespace serl {

// One sampled mask action: the policy mean, the noisy sample, and the mean
// per-element Gaussian log-density of the sample under the emitting policy.
struct MaskAction {
  ChannelTensor mean_masks;
  ChannelTensor sampled_masks;
  double sigma = 0.0;
  double log_prob = 0.0;
};

enum class PolicyRole { kSftFrozen, kRlOld, kRlTrainable };

// Parameter gradients for ToyMaskNet, in the same shapes as the weights.
struct ToyMaskNetGrad {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;

  void SetZero();
  void Add(const ToyMaskNetGrad& other, double scale);
  double SquaredNorm() const;
};

// Per-bin two-layer perceptron over log-magnitude context features.
//
// Features per TF bin: the 3x3 neighborhood of 0.25*log10(|X| + 1e-6) from
// the magnitude channel (out-of-range cells use silence), plus the
// normalized frequency index, 10 inputs total. One tanh hidden layer, then
// per-channel outputs:
//   channel 0   (multiplicative magnitude mask): mask_max * sigmoid(z)
//   channels 1+ (additive complex masks):        mask_max * (sigmoid(z) - 0.5)
// so that all-zero parameters emit the identity transform.
class ToyMaskNet {
 public:
  struct ForwardCache {
    Eigen::MatrixXd features;  // D x N
    Eigen::MatrixXd hidden;    // H x N
    Eigen::MatrixXd sig;       // C x N, post-sigmoid values
    int freq_bins = 0, frames = 0;
  };

  static constexpr int kFeatureDim = 10;

  // Zero weights: all-ones magnitude masks, zero additive masks.
  static ToyMaskNet Identity(int channels, int hidden_units = 16,
                             double mask_max = 2.0);
  // Small random init for training, deterministic in the seed.
  static ToyMaskNet Random(int channels, uint64_t seed, int hidden_units = 16,
                           double mask_max = 2.0);

  ChannelTensor Forward(const TFRepresentation& x,
                        ForwardCache* cache = nullptr) const;
  // Accumulates parameter gradients for dL/dmasks into grad.
  void Backward(const ForwardCache& cache, const ChannelTensor& dmasks,
                ToyMaskNetGrad* grad) const;
  void ApplyStep(const ToyMaskNetGrad& grad, double learning_rate);

  ToyMaskNetGrad ZeroGrad() const;

  int channels() const { return channels_; }
  int hidden_units() const { return hidden_units_; }
  double mask_max() const { return mask_max_; }
  std::string ArchitectureId() const;

  // Flat parameter vector (w1 row-major, b1, w2 row-major, b2); used by the
  // checkpoint format and bit-level comparisons.
  std::vector<double> FlattenParams() const;
  void SetParams(const std::vector<double>& params);

 private:
  ToyMaskNet(int channels, int hidden_units, double mask_max);

  int channels_;
  int hidden_units_;
  double mask_max_;
  Eigen::MatrixXd w1_;  // H x D
  Eigen::VectorXd b1_;  // H
  Eigen::MatrixXd w2_;  // C x H
  Eigen::VectorXd b2_;  // C
};

// A mask predictor bound to its framing, channel convention, and role.
// Frozen roles never receive updates; only the RL-trainable instance may be
// stepped.
class Policy {
 public:
  Policy(ToyMaskNet net, FrameSpec frame_spec, PolicyRole role);

  const FrameSpec& frame_spec() const { return frame_spec_; }
  int channels() const { return net_.channels(); }
  PolicyRole role() const { return role_; }
  const std::string& architecture_id() const { return architecture_id_; }
  const ToyMaskNet& net() const { return net_; }

  // Deep parameter copy with a new role. Only the trainable instance may be
  // snapshotted.
  Policy Snapshot(PolicyRole new_role) const;

  // Gradient step; rejected unless role is RL-trainable.
  void ApplyStep(const ToyMaskNetGrad& grad, double learning_rate);

 private:
  ToyMaskNet net_;
  FrameSpec frame_spec_;
  PolicyRole role_;
  std::string architecture_id_;
};

// Deterministic mean mask prediction; errors on channel mismatch.
ChannelTensor PredictMean(const Policy& policy, const TFRepresentation& x,
                          ToyMaskNet::ForwardCache* cache = nullptr);

// mean + N(0, sigma^2) i.i.d. per element.
MaskAction SampleAction(const ChannelTensor& mean_masks, double sigma,
                        std::mt19937_64& rng);
MaskAction SampleAction(const ChannelTensor& mean_masks, double sigma,
                        uint64_t seed);

// Mean per-element log-density of `a` under N(mean, sigma^2 I).
double GaussianMeanLogProb(const ChannelTensor& mean, const ChannelTensor& a,
                           double sigma);

// Gradient of GaussianMeanLogProb with respect to the mean.
ChannelTensor GaussianMeanLogProbGradMean(const ChannelTensor& mean,
                                          const ChannelTensor& a,
                                          double sigma);

// Mean log-density of action `a` under policy's predicted mean for x.
double LogLikelihood(const Policy& policy, const TFRepresentation& x,
                     const ChannelTensor& a, double sigma);

// Channel transform g_c. C=1: magnitude mask, Y0 = M0 .* |X|. C=3: the
// masked magnitude is re-projected onto the noisy phase and the complex
// masks are added, Yre = M0 .* Re(X) + M1, Yim = M0 .* Im(X) + M2, with the
// magnitude channel recomputed from the result.
ChannelTensor ApplyMasks(const ChannelTensor& masks,
                         const TFRepresentation& x);

// dL/dmasks given dL/d(enhanced channels); recomputes the forward transform.
// The C=1 path assumes nonnegative magnitude masks.
ChannelTensor ApplyMasksBackward(const ChannelTensor& dchannels,
                                 const ChannelTensor& masks,
                                 const TFRepresentation& x);

// Enhanced spectrogram representation for the given masks (channels plus
// recombined complex spectrogram, noisy phase for C=1).
TFRepresentation EnhancedRepresentation(const ChannelTensor& masks,
                                        const TFRepresentation& x);

// Full pipeline: stft -> masks -> apply -> recombine -> istft. Deterministic
// mode uses mean masks; otherwise actions are sampled at `sigma` from `rng`.
Waveform Enhance(const Policy& policy, const Waveform& x, bool deterministic,
                 double sigma = 0.0, std::mt19937_64* rng = nullptr);

// Checkpointing: binary archive with a version header, architecture id,
// FrameSpec, channel count, and raw parameters. Loading verifies the
// architecture id when expected_architecture_id is non-empty.
void SaveCheckpoint(const Policy& policy, const std::string& path);
Policy LoadCheckpoint(const std::string& path,
                      const std::string& expected_architecture_id = "");

}  // namespace serl

#endif  // SERL_POLICY_H_
