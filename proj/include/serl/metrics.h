// serl/metrics.h
// Evaluation metrics and the benchmark harness: SI-SDR, segmental SNR,
// adapter-based PESQ/STOI/MOS scoring, paired significance tests, and
// CSV/table report emission.

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

#ifndef SERL_METRICS_H_
#define SERL_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serl/reward.h"
#include "serl/tf.h"

namespace serl {

// Scale-invariant SDR in dB: the reference is optimally scaled onto the
// estimate's projection, value = 10 log10(|a ref|^2 / |est - a ref|^2).
// Capped at +100 dB when the residual is numerically zero (and at -100 dB
// for a numerically zero projection). Errors on a silent reference.
double SiSdr(const Waveform& est, const Waveform& ref);

// Segmental SNR in dB: per-frame 10 log10(|ref|^2 / |ref - est|^2), each
// frame clamped to [-10, 35], averaged over frames whose reference energy
// exceeds 1e-8 of the peak frame energy. Non-overlapping 32 ms frames by
// default; incomplete tail frames are dropped. Errors when no frame is
// active.
double Ssnr(const Waveform& est, const Waveform& ref, double frame_ms = 32.0,
            double hop_ms = 32.0);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int n = 0;
  // Zero-variance differences: p = 1 for a zero mean, p = 0 otherwise.
  bool degenerate = false;
};

// Two-sided paired t-test over per-utterance score pairs.
TTestResult PairedTTest(const std::vector<double>& scores_a,
                        const std::vector<double>& scores_b);

struct MetricRow {
  std::string utterance_id;
  double pesq = 0.0;
  double ssnr_db = 0.0;
  double si_sdr_db = 0.0;
  std::optional<double> stoi;
  std::optional<double> mos;
};

struct MetricAggregate {
  double pesq = 0.0;
  double ssnr_db = 0.0;
  double si_sdr_db = 0.0;
  std::optional<double> stoi;
  std::optional<double> mos;
};

struct EvalReport {
  std::vector<MetricRow> rows;        // model outputs vs reference
  std::vector<MetricRow> noisy_rows;  // unprocessed noisy vs reference
  MetricAggregate aggregate;
  MetricAggregate noisy_aggregate;
  // Paired model-vs-noisy tests keyed by metric name.
  std::map<std::string, TTestResult> comparisons;
  // Utterances missing from one of the directories; excluded from rows.
  std::vector<std::string> missing;
};

struct EvalScorers {
  const PesqScorer* pesq = nullptr;        // required
  const MosEstimator* mos = nullptr;       // optional
  const AdapterConfig* stoi = nullptr;     // optional, adapter only
};

// Scores every utterance id found in the reference directory against the
// model output directory (matched by file name), with a Noisy baseline from
// noisy_dir. Ids present in only some directories are listed in `missing`
// and excluded from aggregates.
EvalReport Evaluate(const std::string& est_dir, const std::string& ref_dir,
                    const std::string& noisy_dir, const EvalScorers& scorers);

// One row per utterance plus aggregate footer rows.
std::string RenderCsv(const EvalReport& report);

// Aligned table with the Noisy row first, plus significance annotations.
std::string RenderTable(const EvalReport& report, const std::string& model_name);

}  // namespace serl

#endif  // SERL_METRICS_H_
