// serl/reward.h
// Reward models and reward signals: a deterministic pseudo-MOS estimator for
// desk-scale runs, adapters for external non-intrusive MOS and intrusive
// PESQ tools, and the relative-improvement rewards derived from them.

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

#ifndef SERL_REWARD_H_
#define SERL_REWARD_H_

#include <optional>
#include <string>
#include <vector>

#include "serl/tf.h"

namespace serl {

// External scorer process. Invoked as `command <listfile>` where the list
// file holds one item per line (a WAV path, or "est<TAB>ref" for intrusive
// metrics); the process must print one decimal score per line, in input
// order.
struct AdapterConfig {
  std::string command;
};

// Runs an adapter over the given list lines and parses one score per line.
// Non-zero exit, wrong line count, or unparsable output raise errors; there
// is no silent fallback.
std::vector<double> RunAdapter(const AdapterConfig& adapter,
                               const std::vector<std::string>& list_lines);

// Deterministic non-intrusive stand-in for a learned MOS predictor.
// Frames the signal (32 ms window, 16 ms hop), takes the lowest-decile frame
// energies as a blind noise floor and the remainder as signal, and maps the
// resulting SNR through 1 + 4 / (1 + exp(-(snr_db - 10) / 5)). Monotone
// non-decreasing in the blind SNR; digital silence scores 1. Requires at
// least 0.2 s of audio.
double PseudoMosScore(const Waveform& w);

// Affine stand-in for PESQ used in tests and desk-scale runs: SI-SDR mapped
// through -0.5 + 0.125 * (si_sdr_db + 10), clamped to [-0.5, 4.5].
double PseudoPesq(const Waveform& est, const Waveform& ref);

// Non-intrusive MOS scorer: the built-in pseudo estimator or an external
// adapter. External scores are clamped to [1, 5].
class MosEstimator {
 public:
  static MosEstimator Pseudo();
  static MosEstimator External(AdapterConfig adapter);

  bool is_external() const { return adapter_.has_value(); }
  double Score(const Waveform& w) const;
  double ScoreFile(const std::string& path) const;
  std::vector<double> ScoreFiles(const std::vector<std::string>& paths) const;

 private:
  MosEstimator() = default;
  std::optional<AdapterConfig> adapter_;
};

// Intrusive PESQ scorer: external adapter or the documented pseudo map.
class PesqScorer {
 public:
  static PesqScorer Pseudo();
  static PesqScorer External(AdapterConfig adapter);

  bool is_external() const { return adapter_.has_value(); }
  double Score(const Waveform& est, const Waveform& ref) const;
  std::vector<double> ScoreFiles(
      const std::vector<std::pair<std::string, std::string>>& est_ref) const;

 private:
  PesqScorer() = default;
  std::optional<AdapterConfig> adapter_;
};

enum class RewardKind { kMos, kPesq, kComb };

struct RewardSignal {
  RewardKind kind = RewardKind::kMos;
  double value = 0.0;
};

// Relative-improvement reward of the fine-tuned output over the frozen SFT
// baseline output. kPesq and kComb need the clean reference.
RewardSignal RelativeReward(const Waveform& enhanced_rl,
                            const Waveform& enhanced_sft,
                            const Waveform* clean, RewardKind kind,
                            const MosEstimator& mos, const PesqScorer& pesq);

}  // namespace serl

#endif  // SERL_REWARD_H_
