// serl/objective.cc

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

#include "serl/objective.h"

#include <algorithm>
#include <cmath>

namespace serl {
namespace {

constexpr double kLogRatioClamp = 20.0;

// Whether the unclipped branch of min(ratio*J, clip(ratio)*J) is the active
// one, i.e. whether gradient flows through the ratio.
bool UnclippedActive(double ratio, double j_theta, double epsilon) {
  if (j_theta > 0.0) return ratio <= 1.0 + epsilon;
  if (j_theta < 0.0) return ratio >= 1.0 - epsilon;
  return false;
}

}  // namespace

void HyperParams::Validate() const {
  SERL_REQUIRE(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0,1], got ",
               alpha);
  SERL_REQUIRE(beta >= 0.0, "beta must be >= 0, got ", beta);
  SERL_REQUIRE(lambda >= 0.0, "lambda must be >= 0, got ", lambda);
  SERL_REQUIRE(epsilon > 0.0, "epsilon must be > 0, got ", epsilon);
  SERL_REQUIRE(sigma > 0.0, "sigma must be > 0, got ", sigma);
  SERL_REQUIRE(learning_rate > 0.0, "learning_rate must be > 0, got ",
               learning_rate);
}

double KlGaussianPolicies(const ChannelTensor& mu_rl,
                          const ChannelTensor& mu_sft, double sigma) {
  SERL_REQUIRE(mu_rl.SameShape(mu_sft), "kl: mask shape mismatch");
  SERL_REQUIRE(sigma > 0.0, "kl: sigma must be > 0");
  SERL_REQUIRE(!mu_rl.data.empty(), "kl: empty mask tensors");
  double sum = 0.0;
  for (size_t i = 0; i < mu_rl.data.size(); ++i) {
    const double d = mu_rl.data[i] - mu_sft.data[i];
    sum += d * d;
  }
  return sum / (2.0 * sigma * sigma * static_cast<double>(mu_rl.data.size()));
}

double JTheta(double reward, double kl, double beta) {
  SERL_REQUIRE(kl >= 0.0, "j_theta: kl must be >= 0, got ", kl);
  return reward - beta * kl;
}

double PpoClipLoss(double logp_new, double logp_old, double j_theta,
                   double epsilon) {
  SERL_REQUIRE(std::isfinite(logp_new) && std::isfinite(logp_old) &&
                   std::isfinite(j_theta),
               "ppo_clip_loss: non-finite input");
  const double log_ratio =
      std::clamp(logp_new - logp_old, -kLogRatioClamp, kLogRatioClamp);
  const double ratio = std::exp(log_ratio);
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  const double surrogate = std::min(ratio * j_theta, clipped * j_theta);
  return -surrogate;
}

double PpoClipLossGradLogpNew(double logp_new, double logp_old, double j_theta,
                              double epsilon) {
  const double log_ratio = logp_new - logp_old;
  if (log_ratio <= -kLogRatioClamp || log_ratio >= kLogRatioClamp) return 0.0;
  const double ratio = std::exp(log_ratio);
  if (!UnclippedActive(ratio, j_theta, epsilon)) return 0.0;
  // loss = -ratio * j; d ratio / d logp_new = ratio.
  return -j_theta * ratio;
}

double MseChannelLoss(const ChannelTensor& estimate,
                      const ChannelTensor& reference, double alpha) {
  SERL_REQUIRE(estimate.SameShape(reference), "mse: shape mismatch");
  const int c_count = estimate.channels;
  SERL_REQUIRE(c_count == 1 || c_count == 3, "mse: unsupported channel count ",
               c_count);
  const double n_bins =
      static_cast<double>(estimate.freq_bins) * estimate.frames;
  SERL_REQUIRE(n_bins > 0, "mse: empty tensors");
  double per_channel[3] = {0.0, 0.0, 0.0};
  for (int f = 0; f < estimate.freq_bins; ++f) {
    for (int t = 0; t < estimate.frames; ++t) {
      for (int c = 0; c < c_count; ++c) {
        const double d = reference.at(f, t, c) - estimate.at(f, t, c);
        per_channel[c] += d * d;
      }
    }
  }
  for (int c = 0; c < c_count; ++c) per_channel[c] /= n_bins;
  if (c_count == 1) return per_channel[0];
  return alpha * per_channel[0] +
         (1.0 - alpha) * (per_channel[1] + per_channel[2]);
}

ChannelTensor MseChannelLossGrad(const ChannelTensor& estimate,
                                 const ChannelTensor& reference, double alpha) {
  SERL_REQUIRE(estimate.SameShape(reference), "mse grad: shape mismatch");
  const int c_count = estimate.channels;
  SERL_REQUIRE(c_count == 1 || c_count == 3,
               "mse grad: unsupported channel count ", c_count);
  const double n_bins =
      static_cast<double>(estimate.freq_bins) * estimate.frames;
  double weight[3] = {1.0, 0.0, 0.0};
  if (c_count == 3) {
    weight[0] = alpha;
    weight[1] = weight[2] = 1.0 - alpha;
  }
  ChannelTensor grad = ChannelTensor::Zeros(estimate.freq_bins,
                                            estimate.frames, c_count);
  for (int f = 0; f < estimate.freq_bins; ++f) {
    for (int t = 0; t < estimate.frames; ++t) {
      for (int c = 0; c < c_count; ++c) {
        grad.at(f, t, c) = weight[c] * 2.0 *
                           (estimate.at(f, t, c) - reference.at(f, t, c)) /
                           n_bins;
      }
    }
  }
  return grad;
}

double OverallLoss(double ppo_loss, double mse_loss, double lambda) {
  SERL_REQUIRE(std::isfinite(ppo_loss) && std::isfinite(mse_loss),
               "overall_loss: non-finite input");
  return ppo_loss + lambda * mse_loss;
}

}  // namespace serl
