// nnet/nnet-types.h

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

#ifndef ADAPTLAB_NNET_NNET_TYPES_H_
#define ADAPTLAB_NNET_NNET_TYPES_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnet/matrix.h"

namespace adaptlab {

enum class Activation : uint8_t {
  kSigmoid = 0,
  kTanh = 1,
  kRelu = 2,
  kIdentity = 3,
};

std::string_view ActivationName(Activation a);
Activation ParseActivation(std::string_view name);

/// Layered dense classifier shape: input -> hidden_dims... -> softmax(output).
struct NetworkSpec {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 0;
  Activation hidden_activation = Activation::kSigmoid;

  int NumHidden() const { return static_cast<int>(hidden_dims.size()); }
  /// Hidden layers plus the softmax layer.
  int NumLayers() const { return NumHidden() + 1; }
  int LayerInputDim(int l) const { return l == 0 ? input_dim : hidden_dims[l - 1]; }
  int LayerOutputDim(int l) const {
    return l < NumHidden() ? hidden_dims[l] : output_dim;
  }

  /// Throws ConfigError unless L >= 1 and every dim >= 1.
  void Check() const;

  bool operator==(const NetworkSpec &) const = default;
};

/// One labelled feature vector.
struct Sample {
  Vector features;
  int label = 0;
};

/// N samples stored as an N x D feature matrix plus labels.
struct Dataset {
  std::string speaker_id;
  Matrix features;
  std::vector<int> labels;

  static Dataset FromSamples(const std::vector<Sample> &samples,
                             std::string speaker_id = "");

  size_t size() const { return labels.size(); }
  size_t dim() const { return features.cols(); }
  Sample sample(size_t i) const;

  /// Samples [begin, begin + count).
  Dataset Slice(size_t begin, size_t count) const;

  /// Throws ShapeError if N == 0 or features/labels disagree, or if a label
  /// falls outside [0, num_classes) when num_classes > 0.
  void Check(int num_classes = 0) const;
};

/// Affine layer y = W^T x + b with W stored input x output (row k holds the
/// fan-out weights of input unit k).
struct Layer {
  Matrix weight;
  Vector bias;
  bool trainable = true;
};

struct NetworkParams {
  std::vector<Layer> layers;

  void SetTrainable(bool trainable) {
    for (auto &layer : layers) layer.trainable = trainable;
  }
  size_t NumParams() const;
};

/// Identity-initialised input transform x' = A x + b (linear activation).
struct LinParams {
  Matrix a;  // input_dim x input_dim, stored like Layer::weight: x' = A^T x + b
  Vector b;

  size_t NumParams() const { return a.size() + b.size(); }
};

/// Hidden-unit amplitude parameters: one vector r^l per hidden layer.
struct LhucParams {
  std::vector<Vector> r;

  size_t NumParams() const {
    size_t n = 0;
    for (const auto &v : r) n += v.size();
    return n;
  }
};

/// 2 / (1 + exp(-r)): sigmoid with amplitude 2, range (0, 2).
inline double LhucAmplitude(double r) { return 2.0 / (1.0 + std::exp(-r)); }

/// A network plus optional speaker-dependent insertions. Which parts train
/// is decided by Layer::trainable and the two *_trainable flags.
struct Model {
  NetworkSpec spec;
  NetworkParams base;
  std::optional<LinParams> lin;
  std::optional<LhucParams> lhuc;
  bool lin_trainable = true;
  bool lhuc_trainable = true;

  /// Verifies every tensor shape against spec; the message names the layer.
  void Check() const;
};

/// Glorot-uniform weights and zero biases, drawn from a seeded generator.
NetworkParams InitParams(const NetworkSpec &spec, uint64_t seed);

/// Exact bitwise equality of all tensors (treats -0.0 != 0.0, NaN == same NaN).
bool BitIdentical(const NetworkParams &a, const NetworkParams &b);
bool BitIdentical(std::span<const double> a, std::span<const double> b);

}  // namespace adaptlab

#endif  // ADAPTLAB_NNET_NNET_TYPES_H_
