// synth/synth-io.h

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

#ifndef ADAPTLAB_SYNTH_SYNTH_IO_H_
#define ADAPTLAB_SYNTH_SYNTH_IO_H_

#include <string>

#include "nnet/nnet-types.h"

namespace adaptlab {

// Dataset payload (record type kDataset):
//   u32 length + bytes  speaker id
//   u64 N, u32 D
//   N times: u32 label, f64 features[D]

void SaveDataset(const Dataset &data, const std::string &path);
Dataset LoadDataset(const std::string &path);

/// CSV with header "speaker_id,label,f0,...,f<D-1>"; reals printed with 17
/// significant digits.
void ExportCsv(const Dataset &data, const std::string &path);

}  // namespace adaptlab

#endif  // ADAPTLAB_SYNTH_SYNTH_IO_H_
