// oracle/oracle.h

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

#ifndef ADAPTLAB_ORACLE_ORACLE_H_
#define ADAPTLAB_ORACLE_ORACLE_H_

// Deliberately naive reference implementations used as ground truth for the
// engine: straight-line forward/loss and a central finite-difference gradient.
// Nothing here calls into nnet-compute except CheckGradients(), which
// compares the engine's Backward() against these routines.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nnet/nnet-compute.h"
#include "nnet/nnet-types.h"

namespace adaptlab {
namespace oracle {

/// Triple-loop forward pass (LIN and LHUC honoured when present).
Matrix ReferenceForward(const Model &model, const Matrix &features);

/// Explicit double sum  -(1/N) sum_t sum_y target log(max(p, floor)).
double ReferenceLoss(const Matrix &posteriors, const Matrix &targets);

/// The KLD-regularised criterion written as two separate sums:
/// (1 - rho) * CE(hard labels) + rho * CE(SI posteriors).
double ReferenceKldLoss(const Matrix &posteriors, std::span<const int> labels,
                        const Matrix &si_posteriors, double rho);

/// Named view onto one parameter tensor.
struct ParamTensor {
  std::string name;
  std::span<double> values;
};

/// Every tensor of the model in a fixed order: layer<l>.weight,
/// layer<l>.bias, ..., lin.a, lin.b, lhuc.r<l>. Frozen tensors are listed
/// only when include_frozen is set.
std::vector<ParamTensor> ModelTensors(Model *model, bool include_frozen = false);

/// Central differences (f(p+eps) - f(p-eps)) / (2 eps), one coordinate at a
/// time. Throws NumericError if the loss is non-finite at a perturbed point.
std::vector<Vector> NumericGradient(const std::function<double()> &loss,
                                    std::span<const ParamTensor> tensors,
                                    double epsilon);

/// |a - n| / max(|a|, |n|, 1e-8)
double RelativeError(double analytic, double numeric);

struct TensorReport {
  std::string name;
  double max_rel_error = 0.0;
  size_t worst_index = 0;
  size_t checked = 0;  // coordinates with max(|a|, |n|) > 1e-8
};

struct GradCheckReport {
  std::vector<TensorReport> tensors;
  std::string worst;  // "<tensor>[<index>]"
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  std::string ToString() const;
};

/// Compares the engine's analytic gradients for every trainable tensor with
/// NumericGradient over ReferenceLoss(ReferenceForward(.)). Coordinates with
/// both |g| <= 1e-8 are skipped.
GradCheckReport CheckGradients(const Model &model, const Matrix &features,
                               const Matrix &targets, double epsilon,
                               double tolerance);

/// A seeded random problem for gradient checking: a net of at most 3 hidden
/// layers x 16 units with LIN and LHUC inserted at non-trivial values, a
/// batch of at most 8 samples and blended (non one-hot) targets.
struct GradCheckFixture {
  Model model;
  Matrix features;
  Matrix targets;
};
GradCheckFixture MakeFixture(uint64_t seed);

}  // namespace oracle
}  // namespace adaptlab

#endif  // ADAPTLAB_ORACLE_ORACLE_H_
