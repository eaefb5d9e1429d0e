// synth/synth-io.cc

// Copyright 2026  adaptlab authors

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

#include "synth/synth-io.h"

#include <cstdio>
#include <fstream>

#include "base/adaptlab-error.h"
#include "base/binary-io.h"

namespace adaptlab {

void SaveDataset(const Dataset &data, const std::string &path) {
  ByteWriter w;
  w.PutString(data.speaker_id);
  w.PutU64(data.size());
  w.PutU32(static_cast<uint32_t>(data.dim()));
  for (size_t t = 0; t < data.size(); ++t) {
    w.PutU32(static_cast<uint32_t>(data.labels[t]));
    w.PutF64s(data.features.Row(t));
  }
  WriteContainer(path, RecordType::kDataset, w.bytes());
}

Dataset LoadDataset(const std::string &path) {
  const auto payload = ReadContainer(path, RecordType::kDataset);
  ByteReader r(payload);
  Dataset data;
  data.speaker_id = r.GetString();
  const uint64_t n = r.GetU64();
  const uint32_t d = r.GetU32();
  if (n * (4 + 8ull * d) != r.remaining())
    throw FormatError(path + ": dataset size does not match payload");
  data.features.Resize(n, d);
  data.labels.resize(n);
  for (size_t t = 0; t < n; ++t) {
    data.labels[t] = static_cast<int>(r.GetU32());
    r.GetF64s(data.features.Row(t));
  }
  return data;
}

void ExportCsv(const Dataset &data, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "speaker_id,label";
  for (size_t k = 0; k < data.dim(); ++k) os << ",f" << k;
  os << "\n";
  char buf[32];
  for (size_t t = 0; t < data.size(); ++t) {
    os << data.speaker_id << "," << data.labels[t];
    for (double v : data.features.Row(t)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace adaptlab
