// nnet/nnet-types.cc

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

#include "nnet/nnet-types.h"

#include <cstring>

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

Activation ParseActivation(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

void NetworkSpec::Check() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (output_dim < 1) throw ConfigError("output_dim must be >= 1");
  if (hidden_dims.empty()) throw ConfigError("need at least one hidden layer");
  for (size_t l = 0; l < hidden_dims.size(); ++l)
    if (hidden_dims[l] < 1)
      throw ConfigError("hidden layer " + std::to_string(l) + " has dim < 1");
  if (static_cast<int>(hidden_activation) > 3)
    throw ConfigError("bad activation id");
}

Dataset Dataset::FromSamples(const std::vector<Sample> &samples,
                             std::string speaker_id) {
  Dataset d;
  d.speaker_id = std::move(speaker_id);
  if (samples.empty()) return d;
  const size_t dim = samples.front().features.size();
  d.features.Resize(samples.size(), dim);
  d.labels.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != dim)
      throw ShapeError("sample " + std::to_string(i) + " has dimension " +
                       std::to_string(samples[i].features.size()) +
                       ", expected " + std::to_string(dim));
    std::copy(samples[i].features.begin(), samples[i].features.end(),
              d.features.Row(i).begin());
    d.labels.push_back(samples[i].label);
  }
  return d;
}

Sample Dataset::sample(size_t i) const {
  auto row = features.Row(i);
  return {Vector(row.begin(), row.end()), labels[i]};
}

Dataset Dataset::Slice(size_t begin, size_t count) const {
  if (begin + count > size())
    throw ShapeError("slice [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") exceeds dataset of " +
                     std::to_string(size()));
  Dataset d;
  d.speaker_id = speaker_id;
  d.features = features.RowRange(begin, count);
  d.labels.assign(labels.begin() + begin, labels.begin() + begin + count);
  return d;
}

void Dataset::Check(int num_classes) const {
  if (labels.empty()) throw ShapeError("dataset is empty");
  if (features.rows() != labels.size())
    throw ShapeError("dataset has " + std::to_string(features.rows()) +
                     " feature rows but " + std::to_string(labels.size()) +
                     " labels");
  if (num_classes > 0)
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] < 0 || labels[i] >= num_classes)
        throw ShapeError("label " + std::to_string(labels[i]) + " of sample " +
                         std::to_string(i) + " outside [0, " +
                         std::to_string(num_classes) + ")");
}

size_t NetworkParams::NumParams() const {
  size_t n = 0;
  for (const auto &layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void Model::Check() const {
  spec.Check();
  if (static_cast<int>(base.layers.size()) != spec.NumLayers())
    throw ShapeError("model has " + std::to_string(base.layers.size()) +
                     " layers, spec wants " + std::to_string(spec.NumLayers()));
  for (int l = 0; l < spec.NumLayers(); ++l) {
    const auto &layer = base.layers[l];
    const size_t in = spec.LayerInputDim(l), out = spec.LayerOutputDim(l);
    if (layer.weight.rows() != in || layer.weight.cols() != out ||
        layer.bias.size() != out)
      throw ShapeError("layer " + std::to_string(l) + ": weight " +
                       std::to_string(layer.weight.rows()) + "x" +
                       std::to_string(layer.weight.cols()) + ", bias " +
                       std::to_string(layer.bias.size()) + "; expected " +
                       std::to_string(in) + "x" + std::to_string(out));
  }
  if (lin) {
    const size_t d = spec.input_dim;
    if (lin->a.rows() != d || lin->a.cols() != d || lin->b.size() != d)
      throw ShapeError("LIN layer does not match input_dim " + std::to_string(d));
  }
  if (lhuc) {
    if (static_cast<int>(lhuc->r.size()) != spec.NumHidden())
      throw ShapeError("LHUC has " + std::to_string(lhuc->r.size()) +
                       " gate vectors for " + std::to_string(spec.NumHidden()) +
                       " hidden layers");
    for (int l = 0; l < spec.NumHidden(); ++l)
      if (static_cast<int>(lhuc->r[l].size()) != spec.hidden_dims[l])
        throw ShapeError("LHUC gate vector for hidden layer " +
                         std::to_string(l) + " has wrong length");
  }
}

NetworkParams InitParams(const NetworkSpec &spec, uint64_t seed) {
  spec.Check();
  Rng rng(seed);
  NetworkParams params;
  for (int l = 0; l < spec.NumLayers(); ++l) {
    const int in = spec.LayerInputDim(l), out = spec.LayerOutputDim(l);
    const double limit = std::sqrt(6.0 / (in + out));
    Layer layer;
    layer.weight.Resize(in, out);
    for (double &w : layer.weight.data()) w = rng.Uniform(-limit, limit);
    layer.bias.assign(out, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

bool BitIdentical(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

bool BitIdentical(const NetworkParams &a, const NetworkParams &b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t l = 0; l < a.layers.size(); ++l) {
    const auto &x = a.layers[l], &y = b.layers[l];
    if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols())
      return false;
    if (!BitIdentical(x.weight.data(), y.weight.data()) ||
        !BitIdentical(x.bias, y.bias))
      return false;
  }
  return true;
}

}  // namespace adaptlab
