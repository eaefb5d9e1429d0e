// nnet/nnet-compute.cc

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

#include "nnet/nnet-compute.h"

#include <algorithm>
#include <cmath>

#include "base/adaptlab-error.h"

namespace adaptlab {

namespace {

// y += alpha * x
inline void Axpy(double alpha, const double *x, double *y, size_t n) {
#pragma omp simd
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double Dot(const double *x, const double *y, size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void EnsureShape(Matrix *m, size_t rows, size_t cols) {
  if (m->rows() != rows || m->cols() != cols) m->Resize(rows, cols);
}

// y = x * w + bias, with w stored in x out.
void AffineForward(const Matrix &x, const Matrix &w, const Vector &bias,
                   Matrix *y) {
  const size_t in = w.rows(), out = w.cols();
  EnsureShape(y, x.rows(), out);
  for (size_t b = 0; b < x.rows(); ++b) {
    double *yr = y->Row(b).data();
    std::copy(bias.begin(), bias.end(), yr);
    const double *xr = x.Row(b).data();
    for (size_t k = 0; k < in; ++k) Axpy(xr[k], w.Row(k).data(), yr, out);
  }
}

// dx = dy * w^T
void AffineBackwardInput(const Matrix &dy, const Matrix &w, Matrix *dx) {
  const size_t in = w.rows(), out = w.cols();
  EnsureShape(dx, dy.rows(), in);
  for (size_t b = 0; b < dy.rows(); ++b) {
    const double *dyr = dy.Row(b).data();
    double *dxr = dx->Row(b).data();
    for (size_t k = 0; k < in; ++k) dxr[k] = Dot(dyr, w.Row(k).data(), out);
  }
}

// gw = x^T * dy, gb = colsum(dy)
void AffineBackwardParams(const Matrix &x, const Matrix &dy, Matrix *gw,
                          Vector *gb) {
  const size_t in = x.cols(), out = dy.cols();
  EnsureShape(gw, in, out);
  std::fill(gw->data().begin(), gw->data().end(), 0.0);
  gb->assign(out, 0.0);
  for (size_t b = 0; b < x.rows(); ++b) {
    const double *xr = x.Row(b).data();
    const double *dyr = dy.Row(b).data();
    for (size_t k = 0; k < in; ++k) Axpy(xr[k], dyr, gw->Row(k).data(), out);
    Axpy(1.0, dyr, gb->data(), out);
  }
}

void ApplyActivation(Activation act, std::span<double> v) {
  switch (act) {
    case Activation::kSigmoid:
      for (double &x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Activation::kTanh:
      for (double &x : v) x = std::tanh(x);
      break;
    case Activation::kRelu:
      for (double &x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kIdentity:
      break;
  }
}

// d *= phi'(z), expressed through the activation value y = phi(z).
void MultiplyActivationDerivative(Activation act, std::span<const double> y,
                                  std::span<double> d) {
  switch (act) {
    case Activation::kSigmoid:
      for (size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
      break;
    case Activation::kTanh:
      for (size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - y[i] * y[i];
      break;
    case Activation::kRelu:
      for (size_t i = 0; i < d.size(); ++i) d[i] = y[i] > 0.0 ? d[i] : 0.0;
      break;
    case Activation::kIdentity:
      break;
  }
}

void CheckCongruent(const Matrix &a, const Matrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace

void SoftmaxInPlace(std::span<double> v) {
  if (v.empty()) return;
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double &x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  const double inv = 1.0 / sum;
  for (double &x : v) x *= inv;
}

Vector Softmax(std::span<const double> logits) {
  Vector v(logits.begin(), logits.end());
  SoftmaxInPlace(v);
  return v;
}

void Forward(const Model &model, const Matrix &features, ForwardCache *cache) {
  const NetworkSpec &spec = model.spec;
  model.Check();
  if (features.cols() != static_cast<size_t>(spec.input_dim))
    throw ShapeError("layer 0: input has dimension " +
                     std::to_string(features.cols()) + ", network expects " +
                     std::to_string(spec.input_dim));
  const int num_hidden = spec.NumHidden();
  if (model.lin) {
    cache->features = features;
    AffineForward(features, model.lin->a, model.lin->b, &cache->input);
  } else {
    cache->features = Matrix();
    cache->input = features;
  }

  cache->activation.resize(num_hidden);
  if (model.lhuc) {
    cache->gated.resize(num_hidden);
    cache->gate.resize(num_hidden);
  } else {
    cache->gated.clear();
    cache->gate.clear();
  }
  const Matrix *h = &cache->input;
  for (int l = 0; l < num_hidden; ++l) {
    const Layer &layer = model.base.layers[l];
    Matrix &act = cache->activation[l];
    AffineForward(*h, layer.weight, layer.bias, &act);
    ApplyActivation(spec.hidden_activation, act.data());
    if (model.lhuc) {
      Vector &g = cache->gate[l];
      const Vector &r = model.lhuc->r[l];
      g.resize(r.size());
      for (size_t j = 0; j < r.size(); ++j) g[j] = LhucAmplitude(r[j]);
      Matrix &out = cache->gated[l];
      EnsureShape(&out, act.rows(), act.cols());
      for (size_t b = 0; b < act.rows(); ++b) {
        auto a = act.Row(b);
        auto o = out.Row(b);
        for (size_t j = 0; j < a.size(); ++j) o[j] = g[j] * a[j];
      }
      h = &out;
    } else {
      h = &act;
    }
  }
  const Layer &top = model.base.layers[num_hidden];
  AffineForward(*h, top.weight, top.bias, &cache->posteriors);
  for (size_t b = 0; b < cache->posteriors.rows(); ++b)
    SoftmaxInPlace(cache->posteriors.Row(b));
}

Matrix Forward(const Model &model, const Matrix &features) {
  ForwardCache cache;
  Forward(model, features, &cache);
  return std::move(cache.posteriors);
}

Matrix Forward(const Model &model, const Dataset &data) {
  return Forward(model, data.features);
}

Matrix Forward(const NetworkParams &params, const NetworkSpec &spec,
               const Dataset &batch, const LhucParams *gates) {
  Model model{spec, params, std::nullopt,
              gates ? std::optional<LhucParams>(*gates) : std::nullopt};
  model.Check();
  return Forward(model, batch.features);
}

double CrossEntropy(const Matrix &posteriors, const Matrix &targets) {
  CheckCongruent(posteriors, targets, "cross_entropy shape mismatch");
  if (posteriors.rows() == 0) throw ShapeError("cross_entropy of empty batch");
  double total = 0.0;
  for (size_t t = 0; t < posteriors.rows(); ++t) {
    auto p = posteriors.Row(t);
    auto q = targets.Row(t);
    for (size_t y = 0; y < p.size(); ++y)
      total += q[y] * std::log(std::max(p[y], kLogFloor));
  }
  return -total / static_cast<double>(posteriors.rows());
}

double ErrorRate(const Matrix &posteriors, std::span<const int> labels) {
  if (posteriors.rows() != labels.size())
    throw ShapeError("error_rate: posterior rows != label count");
  if (labels.empty()) throw ShapeError("error_rate of empty batch");
  size_t wrong = 0;
  for (size_t t = 0; t < labels.size(); ++t) {
    auto p = posteriors.Row(t);
    const auto best = std::max_element(p.begin(), p.end()) - p.begin();
    if (best != labels[t]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double ErrorRate(const Model &model, const Dataset &data) {
  return ErrorRate(Forward(model, data.features), data.labels);
}

Matrix OneHot(std::span<const int> labels, int num_classes) {
  Matrix t(labels.size(), num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw ShapeError("label " + std::to_string(labels[i]) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    t(i, labels[i]) = 1.0;
  }
  return t;
}

void Backward(const Model &model, const ForwardCache &cache,
              const Matrix &targets, GradientSet *grads) {
  const NetworkSpec &spec = model.spec;
  CheckCongruent(cache.posteriors, targets, "backward: posteriors vs targets");
  const int num_hidden = spec.NumHidden();
  const int num_layers = spec.NumLayers();
  const size_t batch = targets.rows();
  const bool gated = model.lhuc.has_value();
  const bool lin_train = model.lin && model.lin_trainable;
  const bool gate_train = gated && model.lhuc_trainable;

  // needs_input[l]: some trainable tensor sits below layer l, so the error
  // signal must be propagated through it.
  std::vector<bool> needs_input(num_layers, false);
  bool below = lin_train;
  for (int l = 0; l < num_layers; ++l) {
    needs_input[l] = below;
    below = below || model.base.layers[l].trainable ||
            (l < num_hidden && gate_train);
  }

  grads->layers.resize(num_layers);
  grads->lin.reset();
  grads->lhuc.reset();
  if (gate_train) {
    grads->lhuc.emplace();
    grads->lhuc->r.resize(num_hidden);
    for (int l = 0; l < num_hidden; ++l)
      grads->lhuc->r[l].assign(spec.hidden_dims[l], 0.0);
  }

  Matrix dz(batch, spec.output_dim);
  const double scale = 1.0 / static_cast<double>(batch);
  for (size_t b = 0; b < batch; ++b) {
    auto p = cache.posteriors.Row(b);
    auto t = targets.Row(b);
    auto d = dz.Row(b);
    for (size_t y = 0; y < d.size(); ++y) d[y] = (p[y] - t[y]) * scale;
  }

  Matrix dh;
  for (int l = num_layers - 1; l >= 0; --l) {
    const Layer &layer = model.base.layers[l];
    const Matrix &in = l == 0 ? cache.input : cache.HiddenOutput(l - 1);
    LayerGradient &g = grads->layers[l];
    if (layer.trainable) {
      AffineBackwardParams(in, dz, &g.weight, &g.bias);
    } else {
      g.weight = Matrix();
      g.bias.clear();
    }
    if (!needs_input[l]) {
      // Nothing trainable below this layer.
      for (int k = l - 1; k >= 0; --k) grads->layers[k] = LayerGradient{};
      return;
    }
    AffineBackwardInput(dz, layer.weight, &dh);
    if (l == 0) break;

    const int h = l - 1;
    const Matrix &act = cache.activation[h];
    if (gated) {
      const Vector &gate = cache.gate[h];
      if (gate_train) {
        Vector &dr = grads->lhuc->r[h];
        for (size_t b = 0; b < batch; ++b) {
          auto d = dh.Row(b);
          auto a = act.Row(b);
          for (size_t j = 0; j < d.size(); ++j) dr[j] += d[j] * a[j];
        }
        // da/dr = a(r) (1 - a(r)/2) for a(r) = 2 sigmoid(r).
        for (size_t j = 0; j < dr.size(); ++j)
          dr[j] *= gate[j] * (1.0 - 0.5 * gate[j]);
      }
      for (size_t b = 0; b < batch; ++b) {
        auto d = dh.Row(b);
        for (size_t j = 0; j < d.size(); ++j) d[j] *= gate[j];
      }
    }
    for (size_t b = 0; b < batch; ++b)
      MultiplyActivationDerivative(spec.hidden_activation, act.Row(b), dh.Row(b));
    std::swap(dz, dh);
  }

  if (lin_train) {
    // dh now holds dL/dx' for the transformed input x' = A^T x + b.
    grads->lin.emplace();
    AffineBackwardParams(cache.features, dh, &grads->lin->a, &grads->lin->b);
  }
}

GradientSet Backward(const Model &model, const Matrix &features,
                     const Matrix &targets) {
  ForwardCache cache;
  Forward(model, features, &cache);
  GradientSet grads;
  Backward(model, cache, targets, &grads);
  return grads;
}

GradientSet Backward(const NetworkParams &params, const NetworkSpec &spec,
                     const Dataset &batch, const Matrix &targets,
                     const LhucParams *gates) {
  Model model{spec, params, std::nullopt,
              gates ? std::optional<LhucParams>(*gates) : std::nullopt};
  model.Check();
  return Backward(model, batch.features, targets);
}

namespace {

void CheckFinite(std::span<const double> g, const std::string &name) {
  for (size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i]))
      throw NumericError("non-finite gradient " + std::to_string(g[i]) +
                         " in " + name + " at flat index " + std::to_string(i));
}

void Descend(std::span<double> p, std::span<const double> g, double lr) {
  if (p.size() != g.size()) throw ShapeError("sgd_step: gradient shape mismatch");
  for (size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

}  // namespace

void SgdStep(Model *model, const GradientSet &grads, const LearningRates &lr) {
  if (!(lr.base >= 0.0) || !(lr.lin >= 0.0) || !(lr.lhuc >= 0.0))
    throw ConfigError("learning rates must be >= 0");
  auto &layers = model->base.layers;
  if (grads.layers.size() > layers.size())
    throw ShapeError("sgd_step: gradient set has too many layers");

  for (size_t l = 0; l < grads.layers.size(); ++l) {
    if (!layers[l].trainable) continue;
    CheckFinite(grads.layers[l].weight.data(), "layer " + std::to_string(l) + " weight");
    CheckFinite(grads.layers[l].bias, "layer " + std::to_string(l) + " bias");
  }
  const bool lin = model->lin && model->lin_trainable && grads.lin;
  const bool lhuc = model->lhuc && model->lhuc_trainable && grads.lhuc;
  if (lin) {
    CheckFinite(grads.lin->a.data(), "LIN matrix");
    CheckFinite(grads.lin->b, "LIN bias");
  }
  if (lhuc)
    for (size_t l = 0; l < grads.lhuc->r.size(); ++l)
      CheckFinite(grads.lhuc->r[l], "LHUC gates of hidden layer " + std::to_string(l));

  for (size_t l = 0; l < grads.layers.size(); ++l) {
    if (!layers[l].trainable || grads.layers[l].weight.empty()) continue;
    Descend(layers[l].weight.data(), grads.layers[l].weight.data(), lr.base);
    Descend(layers[l].bias, grads.layers[l].bias, lr.base);
  }
  if (lin) {
    Descend(model->lin->a.data(), grads.lin->a.data(), lr.lin);
    Descend(model->lin->b, grads.lin->b, lr.lin);
  }
  if (lhuc) {
    if (grads.lhuc->r.size() != model->lhuc->r.size())
      throw ShapeError("sgd_step: gate gradient shape mismatch");
    for (size_t l = 0; l < grads.lhuc->r.size(); ++l)
      Descend(model->lhuc->r[l], grads.lhuc->r[l], lr.lhuc);
  }
}

}  // namespace adaptlab
