// nnet/nnet-compute.h

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

#ifndef ADAPTLAB_NNET_NNET_COMPUTE_H_
#define ADAPTLAB_NNET_NNET_COMPUTE_H_

#include <optional>
#include <span>
#include <vector>

#include "nnet/matrix.h"
#include "nnet/nnet-types.h"

namespace adaptlab {

/// Floor applied to posteriors inside log().
inline constexpr double kLogFloor = 1e-30;

/// Max-subtracted softmax; writes the probabilities over `logits` in place.
void SoftmaxInPlace(std::span<double> logits);
Vector Softmax(std::span<const double> logits);

/// Activations of one forward pass, kept for Backward().
struct ForwardCache {
  Matrix features;                  // raw batch, kept only when LIN is present
  Matrix input;                     // features after the LIN transform
  std::vector<Matrix> activation;   // phi(z^l) per hidden layer
  std::vector<Matrix> gated;        // a(r^l) o phi(z^l), filled only with LHUC
  std::vector<Vector> gate;         // a(r^l), filled only with LHUC
  Matrix posteriors;

  const Matrix &HiddenOutput(int l) const {
    return gated.empty() ? activation[l] : gated[l];
  }
};

/// Forward pass of `model` on a B x input_dim batch. With LHUC present the
/// hidden outputs are h^l = a(r^l) o phi(W^l^T h^(l-1) + b^l); otherwise
/// h^l = phi(W^l^T h^(l-1) + b^l). Softmax is applied at the output.
void Forward(const Model &model, const Matrix &features, ForwardCache *cache);

/// Posterior batch (N x S) for a feature matrix or a dataset.
Matrix Forward(const Model &model, const Matrix &features);
Matrix Forward(const Model &model, const Dataset &data);

/// Spec-level form: plain network with optional gates.
Matrix Forward(const NetworkParams &params, const NetworkSpec &spec,
               const Dataset &batch, const LhucParams *gates = nullptr);

/// -(1/N) sum_t sum_y target(t,y) log(max(posterior(t,y), kLogFloor)).
double CrossEntropy(const Matrix &posteriors, const Matrix &targets);

/// Fraction of rows whose argmax (lowest index on ties) differs from label.
double ErrorRate(const Matrix &posteriors, std::span<const int> labels);
double ErrorRate(const Model &model, const Dataset &data);

Matrix OneHot(std::span<const int> labels, int num_classes);

struct LayerGradient {
  Matrix weight;  // empty when the layer is frozen
  Vector bias;
};

/// Gradients of CrossEntropy with the same shapes as the trainable tensors
/// they differentiate; tensors that are frozen are left empty.
struct GradientSet {
  std::vector<LayerGradient> layers;
  std::optional<LinParams> lin;
  std::optional<LhucParams> lhuc;
};

/// Exact gradients of CrossEntropy(cache.posteriors, targets) for every
/// trainable tensor of `model`. Target rows must sum to 1, which makes the
/// logit gradient (posterior - target) / N.
void Backward(const Model &model, const ForwardCache &cache,
              const Matrix &targets, GradientSet *grads);
GradientSet Backward(const Model &model, const Matrix &features,
                     const Matrix &targets);
GradientSet Backward(const NetworkParams &params, const NetworkSpec &spec,
                     const Dataset &batch, const Matrix &targets,
                     const LhucParams *gates = nullptr);

struct LearningRates {
  double base = 0.0;
  double lin = 0.0;
  double lhuc = 0.0;

  static LearningRates Uniform(double lr) { return {lr, lr, lr}; }
};

/// p <- p - lr * g on trainable tensors only. Throws NumericError naming the
/// tensor if any gradient entry is non-finite; nothing is updated then.
void SgdStep(Model *model, const GradientSet &grads, const LearningRates &lr);

}  // namespace adaptlab

#endif  // ADAPTLAB_NNET_NNET_COMPUTE_H_
