// adapt/adapt-io.cc

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

#include "adapt/adapt-io.h"

#include "base/adaptlab-error.h"
#include "base/binary-io.h"
#include "nnet/nnet-io.h"

namespace adaptlab {

namespace {
constexpr uint8_t kFlagLin = 1, kFlagLhuc = 2, kFlagKld = 4;
}

void SaveSpeakerModel(const SpeakerModel &model, const NetworkSpec &spec,
                      const std::string &path) {
  const AdaptMethod &m = model.method;
  m.Check();
  ByteWriter w;
  w.PutU8((m.use_lin ? kFlagLin : 0) | (m.use_lhuc ? kFlagLhuc : 0) |
          (m.kld ? kFlagKld : 0));
  w.PutF64(m.kld ? m.kld->rho : 0.0);
  w.PutU64(model.spec_hash);
  EncodeSpec(spec, &w);
  if (m.use_lin) {
    if (!model.lin) throw ShapeError("LIN artifact without LIN parameters");
    w.PutF64s(model.lin->a.data());
    w.PutF64s(model.lin->b);
  }
  if (m.use_lhuc) {
    if (!model.lhuc) throw ShapeError("LHUC artifact without gate parameters");
    for (const auto &r : model.lhuc->r) w.PutF64s(r);
  }
  if (!m.freeze_base()) {
    if (!model.full) throw ShapeError("KLD artifact without network parameters");
    EncodeParams(spec, *model.full, &w);
  }
  WriteContainer(path, RecordType::kSpeakerArtifact, w.bytes());
}

SpeakerModel LoadSpeakerModel(const std::string &path, const NetworkSpec &si_spec) {
  const auto payload = ReadContainer(path, RecordType::kSpeakerArtifact);
  ByteReader r(payload);
  SpeakerModel sm;
  const uint8_t flags = r.GetU8();
  if (flags & ~(kFlagLin | kFlagLhuc | kFlagKld))
    throw FormatError(path + ": unknown method flags");
  const double rho = r.GetF64();
  sm.method.use_lin = flags & kFlagLin;
  sm.method.use_lhuc = flags & kFlagLhuc;
  if (flags & kFlagKld) sm.method.kld = KldConfig{rho};
  try {
    sm.method.Check();
  } catch (const ConfigError &e) {
    throw FormatError(path + ": " + e.what());
  }
  sm.method.schedule.learning_rate = DefaultLearningRate(sm.method);
  sm.spec_hash = r.GetU64();
  if (sm.spec_hash != SpecHash(si_spec))
    throw FormatError(path + ": artifact was adapted from a network with a "
                      "different spec");
  const NetworkSpec spec = DecodeSpec(&r);
  if (!(spec == si_spec)) throw FormatError(path + ": spec block mismatch");

  if (sm.method.use_lin) {
    LinParams lin{Matrix(spec.input_dim, spec.input_dim), Vector(spec.input_dim)};
    r.GetF64s(lin.a.data());
    r.GetF64s(lin.b);
    sm.lin = std::move(lin);
  }
  if (sm.method.use_lhuc) {
    LhucParams lhuc;
    for (int d : spec.hidden_dims) {
      Vector v(d);
      r.GetF64s(v);
      lhuc.r.push_back(std::move(v));
    }
    sm.lhuc = std::move(lhuc);
  }
  if (!sm.method.freeze_base()) sm.full = DecodeParams(spec, &r);
  if (!r.AtEnd()) throw FormatError(path + ": trailing bytes in payload");
  return sm;
}

}  // namespace adaptlab
