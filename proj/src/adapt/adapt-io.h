// adapt/adapt-io.h

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

#ifndef ADAPTLAB_ADAPT_ADAPT_IO_H_
#define ADAPTLAB_ADAPT_ADAPT_IO_H_

#include <string>

#include "adapt/adapt.h"

namespace adaptlab {

// Speaker artifact payload (record type kSpeakerArtifact):
//
//   u8  method flags: bit0 LIN, bit1 LHUC, bit2 KLD
//   f64 rho (0 when KLD is absent)
//   u64 SpecHash() of the SI network the artifact was adapted from
//   spec block (as in network checkpoints)
//   LIN present:   f64 A[d * d], f64 b[d]
//   LHUC present:  f64 r^l[hidden_dims[l]] for each hidden layer
//   KLD-only:      the full parameter block (as in network checkpoints)

void SaveSpeakerModel(const SpeakerModel &model, const NetworkSpec &spec,
                      const std::string &path);

/// Loads an artifact and rejects it (FormatError) when its spec hash does
/// not match `si_spec`.
SpeakerModel LoadSpeakerModel(const std::string &path, const NetworkSpec &si_spec);

}  // namespace adaptlab

#endif  // ADAPTLAB_ADAPT_ADAPT_IO_H_
