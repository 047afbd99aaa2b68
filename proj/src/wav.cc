// serl/wav.cc

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

#include "serl/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace serl {
namespace {

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  SERL_REQUIRE(in.good(), "cannot open wav file ", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  SERL_REQUIRE(bytes.size() >= 44, path, ": truncated wav header");
  SERL_REQUIRE(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                   std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
               path, ": not a RIFF/WAVE file");

  int sample_rate = 0;
  bool fmt_seen = false;
  const uint8_t* data_ptr = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t chunk_len = ReadU32(chunk + 4);
    const uint8_t* body = chunk + 8;
    SERL_REQUIRE(pos + 8 + chunk_len <= bytes.size(), path,
                 ": chunk overruns file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      SERL_REQUIRE(chunk_len >= 16, path, ": short fmt chunk");
      const uint16_t format = ReadU16(body);
      const uint16_t channels = ReadU16(body + 2);
      sample_rate = static_cast<int>(ReadU32(body + 4));
      const uint16_t bits = ReadU16(body + 14);
      SERL_REQUIRE(format == 1, path, ": only PCM wav supported, format=",
                   format);
      SERL_REQUIRE(channels == 1, path, ": only mono wav supported, channels=",
                   channels);
      SERL_REQUIRE(bits == 16, path, ": only 16-bit wav supported, bits=",
                   bits);
      fmt_seen = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_ptr = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word aligned
  }
  SERL_REQUIRE(fmt_seen, path, ": missing fmt chunk");
  SERL_REQUIRE(data_ptr != nullptr, path, ": missing data chunk");
  SERL_REQUIRE(data_len % 2 == 0, path, ": odd data length");

  Waveform w;
  w.sample_rate_hz = sample_rate;
  w.samples.resize(data_len / 2);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const int16_t s =
        static_cast<int16_t>(ReadU16(data_ptr + 2 * i));
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  SERL_REQUIRE(!w.samples.empty(), path, ": empty wav");
  return w;
}

void WriteWav(const std::string& path, const Waveform& w) {
  SERL_REQUIRE(!w.samples.empty(), "refusing to write empty wav ", path);
  SERL_REQUIRE(w.sample_rate_hz > 0, "bad sample rate for ", path);

  const uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_len);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<uint32_t>(w.sample_rate_hz));
  PutU32(out, static_cast<uint32_t>(w.sample_rate_hz) * 2);  // byte rate
  PutU16(out, 2);   // block align
  PutU16(out, 16);  // bits per sample
  PutTag(out, "data");
  PutU32(out, data_len);
  for (double x : w.samples) {
    SERL_REQUIRE(std::isfinite(x), "non-finite sample writing ", path);
    long q = std::lround(x * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  SERL_REQUIRE(os.good(), "cannot open ", path, " for writing");
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  SERL_REQUIRE(os.good(), "write failed for ", path);
}

}  // namespace serl
