// nnet/nnet-train.cc

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

#include "nnet/nnet-train.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {

TargetFn HardTargets(int num_classes) {
  return [num_classes](const Dataset &d) { return OneHot(d.labels, num_classes); };
}

namespace {

void Evaluate(const Model &model, const Dataset &data, const Matrix &targets,
              double *loss, double *error) {
  const Matrix post = Forward(model, data.features);
  *loss = CrossEntropy(post, targets);
  *error = ErrorRate(post, data.labels);
}

void GatherRows(const Matrix &src, std::span<const size_t> idx, Matrix *dst) {
  if (dst->rows() != idx.size() || dst->cols() != src.cols())
    dst->Resize(idx.size(), src.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    auto s = src.Row(idx[i]);
    std::copy(s.begin(), s.end(), dst->Row(i).begin());
  }
}

}  // namespace

TrainResult Train(Model *model, const Dataset &train, const Dataset &cv,
                  const TrainSchedule &schedule, const TargetFn &target_fn) {
  const int num_classes = model->spec.output_dim;
  model->Check();
  train.Check(num_classes);
  cv.Check(num_classes);
  if (schedule.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (schedule.max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (schedule.patience < 0) throw ConfigError("patience must be >= 0");
  const LearningRates rates = schedule.Rates();

  const Matrix targets = target_fn(train);
  if (targets.rows() != train.size() ||
      targets.cols() != static_cast<size_t>(num_classes))
    throw ShapeError("target function returned wrong shape");
  const Matrix cv_targets = OneHot(cv.labels, num_classes);

  TrainResult result;
  EpochStats initial;
  Evaluate(*model, train, targets, &initial.train_loss, &initial.train_error);
  Evaluate(*model, cv, cv_targets, &initial.cv_loss, &initial.cv_error);
  result.trace.push_back(initial);
  result.best_cv_error = initial.cv_error;

  const bool early_stopping = schedule.patience > 0;
  Model best;
  if (early_stopping) best = *model;

  Rng rng(schedule.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  ForwardCache cache;
  GradientSet grads;
  Matrix batch_x, batch_t;

  for (int epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    rng.Shuffle(std::span<size_t>(order));
    double loss_sum = 0.0;
    size_t wrong = 0;
    for (size_t start = 0; start < order.size(); start += schedule.batch_size) {
      const size_t n = std::min<size_t>(schedule.batch_size, order.size() - start);
      std::span<const size_t> idx(order.data() + start, n);
      GatherRows(train.features, idx, &batch_x);
      GatherRows(targets, idx, &batch_t);
      Forward(*model, batch_x, &cache);
      const double loss = CrossEntropy(cache.posteriors, batch_t);
      if (!std::isfinite(loss))
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ", sample offset " + std::to_string(start) +
                           ": loss = " + std::to_string(loss));
      loss_sum += loss * static_cast<double>(n);
      for (size_t i = 0; i < n; ++i) {
        auto p = cache.posteriors.Row(i);
        if (std::max_element(p.begin(), p.end()) - p.begin() !=
            train.labels[idx[i]])
          ++wrong;
      }
      Backward(*model, cache, batch_t, &grads);
      SgdStep(model, grads, rates);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_error = static_cast<double>(wrong) / static_cast<double>(train.size());
    Evaluate(*model, cv, cv_targets, &stats.cv_loss, &stats.cv_error);
    result.trace.push_back(stats);

    if (stats.cv_error < result.best_cv_error) {
      result.best_cv_error = stats.cv_error;
      result.best_epoch = epoch;
      if (early_stopping) best = *model;
    } else if (early_stopping && epoch - result.best_epoch >= schedule.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (early_stopping) {
    *model = std::move(best);
  } else {
    result.best_epoch = static_cast<int>(result.trace.size()) - 1;
    result.best_cv_error = result.trace.back().cv_error;
  }
  return result;
}

}  // namespace adaptlab
