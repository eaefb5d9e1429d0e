// nnet/nnet-io.cc

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

#include "nnet/nnet-io.h"

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {

void EncodeSpec(const NetworkSpec &spec, ByteWriter *w) {
  w->PutU32(static_cast<uint32_t>(spec.input_dim));
  w->PutU32(static_cast<uint32_t>(spec.hidden_dims.size()));
  for (int d : spec.hidden_dims) w->PutU32(static_cast<uint32_t>(d));
  w->PutU32(static_cast<uint32_t>(spec.output_dim));
  w->PutU8(static_cast<uint8_t>(spec.hidden_activation));
}

NetworkSpec DecodeSpec(ByteReader *r) {
  NetworkSpec spec;
  spec.input_dim = static_cast<int>(r->GetU32());
  const uint32_t num_hidden = r->GetU32();
  if (num_hidden > r->remaining() / 4)
    throw FormatError("implausible hidden layer count " + std::to_string(num_hidden));
  for (uint32_t l = 0; l < num_hidden; ++l)
    spec.hidden_dims.push_back(static_cast<int>(r->GetU32()));
  spec.output_dim = static_cast<int>(r->GetU32());
  const uint8_t act = r->GetU8();
  if (act > 3) throw FormatError("unknown activation id " + std::to_string(act));
  spec.hidden_activation = static_cast<Activation>(act);
  try {
    spec.Check();
  } catch (const ConfigError &e) {
    throw FormatError(std::string("invalid spec block: ") + e.what());
  }
  return spec;
}

void EncodeParams(const NetworkSpec &spec, const NetworkParams &params,
                  ByteWriter *w) {
  if (static_cast<int>(params.layers.size()) != spec.NumLayers())
    throw ShapeError("params do not match spec");
  for (const Layer &layer : params.layers) {
    w->PutU8(layer.trainable ? 1 : 0);
    w->PutF64s(layer.weight.data());
    w->PutF64s(layer.bias);
  }
}

NetworkParams DecodeParams(const NetworkSpec &spec, ByteReader *r) {
  NetworkParams params;
  for (int l = 0; l < spec.NumLayers(); ++l) {
    Layer layer;
    layer.trainable = r->GetU8() != 0;
    const size_t in = spec.LayerInputDim(l), out = spec.LayerOutputDim(l);
    if (8 * (in * out + out) > r->remaining())
      throw TruncatedError("layer " + std::to_string(l) + " truncated");
    layer.weight.Resize(in, out);
    r->GetF64s(layer.weight.data());
    layer.bias.resize(out);
    r->GetF64s(layer.bias);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

uint64_t SpecHash(const NetworkSpec &spec) {
  ByteWriter w;
  EncodeSpec(spec, &w);
  const auto &b = w.bytes();
  return HashString(std::string_view(reinterpret_cast<const char *>(b.data()), b.size()));
}

uint32_t ParamsChecksum(const NetworkParams &params) {
  ByteWriter w;
  for (const Layer &layer : params.layers) {
    w.PutF64s(layer.weight.data());
    w.PutF64s(layer.bias);
  }
  return Crc32(w.bytes());
}

void SaveParams(const NetworkSpec &spec, const NetworkParams &params,
                const std::string &path) {
  ByteWriter w;
  EncodeSpec(spec, &w);
  EncodeParams(spec, params, &w);
  WriteContainer(path, RecordType::kNetwork, w.bytes());
}

Model LoadParams(const std::string &path) {
  const auto payload = ReadContainer(path, RecordType::kNetwork);
  ByteReader r(payload);
  Model model;
  model.spec = DecodeSpec(&r);
  model.base = DecodeParams(model.spec, &r);
  if (!r.AtEnd()) throw FormatError(path + ": trailing bytes in payload");
  return model;
}

}  // namespace adaptlab
