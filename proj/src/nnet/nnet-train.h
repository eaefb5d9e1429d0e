// nnet/nnet-train.h

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

#ifndef ADAPTLAB_NNET_NNET_TRAIN_H_
#define ADAPTLAB_NNET_NNET_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nnet/nnet-compute.h"

namespace adaptlab {

struct TrainSchedule {
  double learning_rate = 0.001;
  // Per-group overrides; unset groups use learning_rate.
  std::optional<double> lin_learning_rate;
  std::optional<double> lhuc_learning_rate;
  int max_epochs = 100;
  int batch_size = 8;
  /// Stop once CV error has not improved for this many consecutive epochs
  /// and return the best-CV parameters. 0 disables early stopping: training
  /// runs all max_epochs and keeps the final parameters.
  int patience = 10;
  uint64_t seed = 1;

  LearningRates Rates() const {
    return {learning_rate, lin_learning_rate.value_or(learning_rate),
            lhuc_learning_rate.value_or(learning_rate)};
  }
};

struct EpochStats {
  int epoch = 0;            // 0 = before any update
  double train_loss = 0.0;  // mean minibatch loss seen during the epoch
  double train_error = 0.0;
  double cv_loss = 0.0;
  double cv_error = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> trace;
  int best_epoch = 0;
  double best_cv_error = 0.0;
  bool stopped_early = false;
};

/// Maps a training set to its N x S target distribution. Called once per
/// Train() call; the targets stay fixed for the run.
using TargetFn = std::function<Matrix(const Dataset &)>;

TargetFn HardTargets(int num_classes);

/// Minibatch SGD over the trainable tensors of `model`. Deterministic in
/// (model, data, schedule). CV loss is measured against hard targets.
/// Throws NumericError if the loss or a gradient becomes non-finite.
TrainResult Train(Model *model, const Dataset &train, const Dataset &cv,
                  const TrainSchedule &schedule, const TargetFn &target_fn);

}  // namespace adaptlab

#endif  // ADAPTLAB_NNET_NNET_TRAIN_H_
