// serl/reward.cc

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

#include "serl/reward.h"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "serl/metrics.h"
#include "serl/wav.h"

namespace serl {
namespace {

constexpr double kPseudoMosFrameMs = 32.0;
constexpr double kPseudoMosHopMs = 16.0;
constexpr double kMinScorableSeconds = 0.2;

std::string UniqueTempPath(const std::string& suffix) {
  static std::atomic<uint64_t> counter{0};
  const uint64_t n = counter.fetch_add(1);
  return (std::filesystem::temp_directory_path() /
          StrCat("serl-", ::getpid(), "-", n, suffix))
      .string();
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

double ParseScoreLine(const std::string& line, const AdapterConfig& adapter) {
  size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(line, &pos);
  } catch (const std::exception&) {
    Fail("adapter '", adapter.command, "' produced non-numeric output: '",
         line, "'");
  }
  for (size_t i = pos; i < line.size(); ++i) {
    SERL_REQUIRE(std::isspace(static_cast<unsigned char>(line[i])),
                 "adapter '", adapter.command, "' produced trailing garbage: '",
                 line, "'");
  }
  SERL_REQUIRE(std::isfinite(value), "adapter '", adapter.command,
               "' produced a non-finite score");
  return value;
}

}  // namespace

std::vector<double> RunAdapter(const AdapterConfig& adapter,
                               const std::vector<std::string>& list_lines) {
  SERL_REQUIRE(!adapter.command.empty(), "adapter command is empty");
  SERL_REQUIRE(!list_lines.empty(), "adapter called with no inputs");

  const std::string list_path = UniqueTempPath(".list");
  {
    std::ofstream os(list_path, std::ios::trunc);
    SERL_REQUIRE(os.good(), "cannot write adapter list file ", list_path);
    for (const std::string& line : list_lines) os << line << "\n";
  }

  const std::string cmdline =
      StrCat(adapter.command, " ", ShellQuote(list_path), " 2>/dev/null");
  FILE* pipe = ::popen(cmdline.c_str(), "r");
  SERL_REQUIRE(pipe != nullptr, "failed to launch adapter '", adapter.command,
               "'");
  std::string output;
  char buf[4096];
  size_t got = 0;
  while ((got = ::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    output.append(buf, got);
  }
  const int status = ::pclose(pipe);
  std::filesystem::remove(list_path);
  SERL_REQUIRE(status == 0, "adapter '", adapter.command,
               "' failed with status ", status);

  std::vector<double> scores;
  std::istringstream is(output);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    scores.push_back(ParseScoreLine(line, adapter));
  }
  SERL_REQUIRE(scores.size() == list_lines.size(), "adapter '",
               adapter.command, "' returned ", scores.size(), " scores for ",
               list_lines.size(), " inputs");
  return scores;
}

double PseudoMosScore(const Waveform& w) {
  SERL_REQUIRE(!w.samples.empty(), "pseudo-mos: empty waveform");
  SERL_REQUIRE(w.DurationSeconds() >= kMinScorableSeconds,
               "pseudo-mos: signal of ", w.DurationSeconds(),
               " s is shorter than ", kMinScorableSeconds, " s");
  const int frame =
      static_cast<int>(std::lround(kPseudoMosFrameMs * w.sample_rate_hz / 1e3));
  const int hop =
      static_cast<int>(std::lround(kPseudoMosHopMs * w.sample_rate_hz / 1e3));
  const int length = static_cast<int>(w.samples.size());
  SERL_REQUIRE(length >= frame, "pseudo-mos: too few samples");

  std::vector<double> powers;
  for (int start = 0; start + frame <= length; start += hop) {
    double e = 0.0;
    for (int n = 0; n < frame; ++n) {
      const double s = w.samples[start + n];
      e += s * s;
    }
    powers.push_back(e / frame);
  }
  SERL_REQUIRE(powers.size() >= 2, "pseudo-mos: too few frames");

  std::sort(powers.begin(), powers.end());
  const size_t floor_count = std::max<size_t>(1, powers.size() / 10);
  double noise_p = 0.0;
  for (size_t i = 0; i < floor_count; ++i) noise_p += powers[i];
  noise_p /= static_cast<double>(floor_count);
  double signal_p = 0.0;
  for (size_t i = floor_count; i < powers.size(); ++i) signal_p += powers[i];
  signal_p /= static_cast<double>(powers.size() - floor_count);

  if (signal_p < 1e-12) return 1.0;  // digital silence
  const double snr_db = 10.0 * std::log10(signal_p / std::max(noise_p, 1e-15));
  const double mos = 1.0 + 4.0 / (1.0 + std::exp(-(snr_db - 10.0) / 5.0));
  return std::clamp(mos, 1.0, 5.0);
}

double PseudoPesq(const Waveform& est, const Waveform& ref) {
  const double si_sdr = SiSdr(est, ref);
  return std::clamp(-0.5 + 0.125 * (si_sdr + 10.0), -0.5, 4.5);
}

MosEstimator MosEstimator::Pseudo() { return MosEstimator(); }

MosEstimator MosEstimator::External(AdapterConfig adapter) {
  MosEstimator m;
  m.adapter_ = std::move(adapter);
  return m;
}

double MosEstimator::Score(const Waveform& w) const {
  if (!adapter_.has_value()) return PseudoMosScore(w);
  const std::string path = UniqueTempPath(".wav");
  WriteWav(path, w);
  double score = 0.0;
  try {
    score = ScoreFile(path);
  } catch (...) {
    std::filesystem::remove(path);
    throw;
  }
  std::filesystem::remove(path);
  return score;
}

double MosEstimator::ScoreFile(const std::string& path) const {
  return ScoreFiles({path}).front();
}

std::vector<double> MosEstimator::ScoreFiles(
    const std::vector<std::string>& paths) const {
  if (!adapter_.has_value()) {
    std::vector<double> scores;
    scores.reserve(paths.size());
    for (const std::string& p : paths) scores.push_back(PseudoMosScore(ReadWav(p)));
    return scores;
  }
  std::vector<double> scores = RunAdapter(*adapter_, paths);
  for (double& s : scores) s = std::clamp(s, 1.0, 5.0);
  return scores;
}

PesqScorer PesqScorer::Pseudo() { return PesqScorer(); }

PesqScorer PesqScorer::External(AdapterConfig adapter) {
  PesqScorer p;
  p.adapter_ = std::move(adapter);
  return p;
}

double PesqScorer::Score(const Waveform& est, const Waveform& ref) const {
  SERL_REQUIRE(est.sample_rate_hz == ref.sample_rate_hz,
               "pesq: sample rate mismatch");
  // Align by trimming to the common length.
  Waveform e = est;
  Waveform r = ref;
  const size_t common = std::min(e.samples.size(), r.samples.size());
  SERL_REQUIRE(common > 0, "pesq: empty input");
  e.samples.resize(common);
  r.samples.resize(common);
  if (!adapter_.has_value()) return PseudoPesq(e, r);
  const std::string est_path = UniqueTempPath("-est.wav");
  const std::string ref_path = UniqueTempPath("-ref.wav");
  WriteWav(est_path, e);
  WriteWav(ref_path, r);
  double score = 0.0;
  try {
    score = ScoreFiles({{est_path, ref_path}}).front();
  } catch (...) {
    std::filesystem::remove(est_path);
    std::filesystem::remove(ref_path);
    throw;
  }
  std::filesystem::remove(est_path);
  std::filesystem::remove(ref_path);
  return score;
}

std::vector<double> PesqScorer::ScoreFiles(
    const std::vector<std::pair<std::string, std::string>>& est_ref) const {
  if (!adapter_.has_value()) {
    std::vector<double> scores;
    scores.reserve(est_ref.size());
    for (const auto& [est, ref] : est_ref) {
      scores.push_back(Score(ReadWav(est), ReadWav(ref)));
    }
    return scores;
  }
  std::vector<std::string> lines;
  lines.reserve(est_ref.size());
  for (const auto& [est, ref] : est_ref) lines.push_back(StrCat(est, "\t", ref));
  return RunAdapter(*adapter_, lines);
}

RewardSignal RelativeReward(const Waveform& enhanced_rl,
                            const Waveform& enhanced_sft,
                            const Waveform* clean, RewardKind kind,
                            const MosEstimator& mos, const PesqScorer& pesq) {
  RewardSignal signal;
  signal.kind = kind;
  const bool needs_clean = kind == RewardKind::kPesq || kind == RewardKind::kComb;
  SERL_REQUIRE(!needs_clean || clean != nullptr,
               "relative_reward: pesq/comb rewards need a clean reference");
  double r_mos = 0.0;
  double r_pesq = 0.0;
  if (kind == RewardKind::kMos || kind == RewardKind::kComb) {
    r_mos = mos.Score(enhanced_rl) - mos.Score(enhanced_sft);
  }
  if (needs_clean) {
    r_pesq = pesq.Score(enhanced_rl, *clean) - pesq.Score(enhanced_sft, *clean);
  }
  switch (kind) {
    case RewardKind::kMos:
      signal.value = r_mos;
      break;
    case RewardKind::kPesq:
      signal.value = r_pesq;
      break;
    case RewardKind::kComb:
      signal.value = r_mos + r_pesq;
      break;
  }
  SERL_REQUIRE(std::isfinite(signal.value), "relative_reward: non-finite value");
  return signal;
}

}  // namespace serl
