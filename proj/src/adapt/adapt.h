// adapt/adapt.h

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

#ifndef ADAPTLAB_ADAPT_ADAPT_H_
#define ADAPTLAB_ADAPT_ADAPT_H_

// Speaker adaptation of a trained speaker-independent (SI) network:
//
//   LIN   identity-initialised linear input layer, SI network frozen.
//   LHUC  per-unit amplitudes a(r) = 2 / (1 + exp(-r)) after every hidden
//         layer, SI network frozen.
//   KLD   the whole SI network retrained against the blended target
//         (1 - rho) * onehot(label) + rho * p_SI(y | x). rho = 0 is plain
//         retraining (RSI).
//
// Combinations that include LIN or LHUC keep the SI network frozen; adding
// KLD to them only swaps the hard targets for the blended ones.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "nnet/nnet-compute.h"
#include "nnet/nnet-train.h"
#include "nnet/nnet-types.h"

namespace adaptlab {

struct KldConfig {
  double rho = 0.25;
};

inline constexpr double kDefaultLinLearningRate = 0.00001;
inline constexpr double kDefaultKldLearningRate = 0.001;
inline constexpr double kDefaultLhucLearningRate = 0.01;

struct AdaptMethod {
  bool use_lin = false;
  bool use_lhuc = false;
  std::optional<KldConfig> kld;
  TrainSchedule schedule;

  /// The SI network is frozen whenever a layer is inserted.
  bool freeze_base() const { return use_lin || use_lhuc; }
  bool is_rsi() const {
    return !use_lin && !use_lhuc && kld && kld->rho == 0.0;
  }

  /// "lin", "lhuc", "kld", "rsi", "lin+lhuc", "lin+kld", "lhuc+kld",
  /// "lin+lhuc+kld".
  std::string Name() const;

  /// Throws ConfigError unless at least one component is enabled and rho,
  /// when present, lies in [0, 1].
  void Check() const;

  /// Parses a method name, sets rho for KLD-bearing methods (ignored for
  /// "rsi", which is KLD with rho = 0) and installs the default learning
  /// rate for that combination.
  static AdaptMethod Parse(std::string_view name, double rho = 0.25);
};

/// LIN 1e-5, KLD/RSI 1e-3, LHUC 1e-2; combinations take the smallest rate
/// among their constituents.
double DefaultLearningRate(const AdaptMethod &method);

/// Elementwise 2 / (1 + exp(-r)).
Vector LhucGate(std::span<const double> r);

LinParams InitLin(int input_dim);
LhucParams InitLhuc(const NetworkSpec &spec);

/// Copy of `si` with an identity LIN layer prepended; only LIN trains.
Model InsertLin(const Model &si);

/// Copy of `si` with zero-initialised LHUC gates after every hidden layer;
/// only the gates train.
Model InsertLhuc(const Model &si);

/// Row t is (1 - rho) * onehot(labels[t]) + rho * si_posteriors.row(t).
/// Throws ConfigError for rho outside [0, 1], ShapeError on row mismatch.
Matrix BlendTargets(std::span<const int> labels, const Matrix &si_posteriors,
                    double rho);

/// SI posteriors for `data`, computed once before adaptation starts.
Matrix CacheSiPosteriors(const Model &si, const Dataset &data);

/// Per-speaker artifact: only the tensors the method trained.
struct SpeakerModel {
  AdaptMethod method;
  uint64_t spec_hash = 0;
  std::optional<LinParams> lin;
  std::optional<LhucParams> lhuc;
  std::optional<NetworkParams> full;  // KLD/RSI only

  size_t NumParams() const;

  /// Rebuilds the adapted network on top of `si`. Throws FormatError if the
  /// artifact was produced from a network with a different spec.
  Model Materialize(const Model &si) const;
};

struct AdaptResult {
  SpeakerModel speaker;
  Model model;  // the adapted network, ready for Forward()
  TrainResult trace;
};

/// Builds the model for `method` on top of `si` (insertions, freeze mask)
/// without training it.
Model PrepareModel(const Model &si, const AdaptMethod &method);

/// Adapts `si` to one speaker. `si_posteriors`, when given, must be the SI
/// posteriors of `train` (row-aligned); otherwise they are computed here.
/// Throws ShapeError on an empty adaptation set, ConfigError on an invalid
/// method.
AdaptResult Adapt(const Model &si, const AdaptMethod &method,
                  const Dataset &train, const Dataset &cv,
                  const Matrix *si_posteriors = nullptr);

struct ParamCount {
  size_t adapted = 0;
  size_t total = 0;  // SI network plus inserted tensors
};

ParamCount ParameterCount(const AdaptMethod &method, const NetworkSpec &spec);

}  // namespace adaptlab

#endif  // ADAPTLAB_ADAPT_ADAPT_H_
