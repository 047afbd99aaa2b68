// serl/wav.h
// Minimal RIFF/WAVE I/O: mono 16-bit PCM only, the one container format the
// toolchain reads and writes.

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

#ifndef SERL_WAV_H_
#define SERL_WAV_H_

#include <string>

#include "serl/tf.h"

namespace serl {

// Reads a mono 16-bit PCM WAV file. Samples map to [-1, 1) as s / 32768.
Waveform ReadWav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] full scale
// (round(x * 32768), saturated). Byte-deterministic for identical input.
void WriteWav(const std::string& path, const Waveform& w);

}  // namespace serl

#endif  // SERL_WAV_H_
