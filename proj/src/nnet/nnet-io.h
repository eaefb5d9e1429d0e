// nnet/nnet-io.h

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

#ifndef ADAPTLAB_NNET_NNET_IO_H_
#define ADAPTLAB_NNET_NNET_IO_H_

#include <cstdint>
#include <string>

#include "base/binary-io.h"
#include "nnet/nnet-types.h"

namespace adaptlab {

// Network checkpoint payload (record type kNetwork, see base/binary-io.h for
// the surrounding frame):
//
//   spec block:
//     u32 input_dim
//     u32 L (number of hidden layers)
//     u32 hidden_dims[L]
//     u32 output_dim
//     u8  activation id (0 sigmoid, 1 tanh, 2 relu, 3 identity)
//   then for each of the L+1 affine layers, bottom to top:
//     u8  trainable flag
//     f64 weight[in * out]   (row-major, in x out)
//     f64 bias[out]

void EncodeSpec(const NetworkSpec &spec, ByteWriter *w);
NetworkSpec DecodeSpec(ByteReader *r);

void EncodeParams(const NetworkSpec &spec, const NetworkParams &params,
                  ByteWriter *w);
NetworkParams DecodeParams(const NetworkSpec &spec, ByteReader *r);

/// FNV-1a over the encoded spec block.
uint64_t SpecHash(const NetworkSpec &spec);

/// CRC-32 over the encoded parameter tensors (trainable flags excluded).
uint32_t ParamsChecksum(const NetworkParams &params);

void SaveParams(const NetworkSpec &spec, const NetworkParams &params,
                const std::string &path);
inline void SaveParams(const Model &model, const std::string &path) {
  SaveParams(model.spec, model.base, path);
}

/// Loads a checkpoint into a plain model (no LIN/LHUC insertions).
Model LoadParams(const std::string &path);

}  // namespace adaptlab

#endif  // ADAPTLAB_NNET_NNET_IO_H_
