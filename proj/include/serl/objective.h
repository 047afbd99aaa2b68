// serl/objective.h
// Loss and objective math for RL fine-tuning: the KL-penalized per-utterance
// objective, the critic-free clipped policy-gradient surrogate, the
// channel-weighted spectrogram MSE, and their combination.

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

#ifndef SERL_OBJECTIVE_H_
#define SERL_OBJECTIVE_H_

#include "serl/common.h"
#include "serl/tf.h"

namespace serl {

// Fine-tuning hyperparameters. Defaults are the published training setup.
struct HyperParams {
  double alpha = 0.7;           // magnitude-channel weight in the MSE
  double beta = 0.0001;         // KL penalty weight
  double lambda = 1.0;          // supervised-loss weight in the overall loss
  double epsilon = 0.01;        // clip range for the likelihood ratio
  double sigma = 0.01;          // stddev of the Gaussian action noise
  double learning_rate = 1e-6;  // SGD step size

  void Validate() const;
};

// Per-utterance objective: reward minus the beta-weighted KL penalty.
struct ObjectiveValue {
  double reward = 0.0;
  double kl = 0.0;
  double j_theta = 0.0;
};

// Closed-form KL between N(mu_rl, sigma^2 I) and N(mu_sft, sigma^2 I),
// normalized per element: mean of (mu_rl - mu_sft)^2 / (2 sigma^2).
double KlGaussianPolicies(const ChannelTensor& mu_rl,
                          const ChannelTensor& mu_sft, double sigma);

// r - beta * kl. Requires kl >= 0.
double JTheta(double reward, double kl, double beta);

// Clipped surrogate, negated so the trainer minimizes it. The likelihood
// ratio is exp(logp_new - logp_old) with the log-ratio clamped to +-20
// before exponentiation.
double PpoClipLoss(double logp_new, double logp_old, double j_theta,
                   double epsilon);

// d PpoClipLoss / d logp_new. Zero on the clipped-inactive branch and when
// the log-ratio clamp is active.
double PpoClipLossGradLogpNew(double logp_new, double logp_old, double j_theta,
                              double epsilon);

// Per-channel MSE, each channel averaged over the F x T bins.
// C=1: L0. C=3: alpha * L0 + (1 - alpha) * (L1 + L2).
double MseChannelLoss(const ChannelTensor& estimate,
                      const ChannelTensor& reference, double alpha);

// Gradient of MseChannelLoss with respect to the estimate tensor.
ChannelTensor MseChannelLossGrad(const ChannelTensor& estimate,
                                 const ChannelTensor& reference, double alpha);

// ppo_loss + lambda * mse_loss.
double OverallLoss(double ppo_loss, double mse_loss, double lambda);

}  // namespace serl

#endif  // SERL_OBJECTIVE_H_
