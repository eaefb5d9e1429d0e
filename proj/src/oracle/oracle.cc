// oracle/oracle.cc

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

#include "oracle/oracle.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {
namespace oracle {

namespace {

double Activate(Activation act, double z) {
  switch (act) {
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kIdentity: return z;
  }
  return z;
}

// out(b, j) = bias(j) + sum_k in(b, k) * w(k, j), summed in k order per output.
Matrix NaiveAffine(const Matrix &in, const Matrix &w, const Vector &bias) {
  if (in.cols() != w.rows() || bias.size() != w.cols())
    throw ShapeError("reference affine: shape mismatch");
  Matrix out(in.rows(), w.cols());
  for (size_t b = 0; b < in.rows(); ++b)
    for (size_t j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < w.rows(); ++k) s += in(b, k) * w(k, j);
      out(b, j) = s + bias[j];
    }
  return out;
}

}  // namespace

Matrix ReferenceForward(const Model &model, const Matrix &features) {
  model.Check();
  const NetworkSpec &spec = model.spec;
  if (features.cols() != static_cast<size_t>(spec.input_dim))
    throw ShapeError("reference forward: input dimension mismatch");
  Matrix h = model.lin ? NaiveAffine(features, model.lin->a, model.lin->b)
                       : features;
  for (int l = 0; l < spec.NumHidden(); ++l) {
    const Layer &layer = model.base.layers[l];
    Matrix z = NaiveAffine(h, layer.weight, layer.bias);
    for (size_t b = 0; b < z.rows(); ++b)
      for (size_t j = 0; j < z.cols(); ++j) {
        double v = Activate(spec.hidden_activation, z(b, j));
        if (model.lhuc) v *= 2.0 / (1.0 + std::exp(-model.lhuc->r[l][j]));
        z(b, j) = v;
      }
    h = std::move(z);
  }
  const Layer &top = model.base.layers.back();
  Matrix logits = NaiveAffine(h, top.weight, top.bias);
  Matrix post(logits.rows(), logits.cols());
  for (size_t b = 0; b < logits.rows(); ++b) {
    double m = logits(b, 0);
    for (size_t y = 1; y < logits.cols(); ++y) m = std::max(m, logits(b, y));
    double denom = 0.0;
    for (size_t y = 0; y < logits.cols(); ++y) denom += std::exp(logits(b, y) - m);
    for (size_t y = 0; y < logits.cols(); ++y)
      post(b, y) = std::exp(logits(b, y) - m) / denom;
  }
  return post;
}

double ReferenceLoss(const Matrix &posteriors, const Matrix &targets) {
  if (posteriors.rows() != targets.rows() || posteriors.cols() != targets.cols())
    throw ShapeError("reference loss: shape mismatch");
  if (posteriors.rows() == 0) throw ShapeError("reference loss: empty batch");
  double sum = 0.0;
  for (size_t t = 0; t < posteriors.rows(); ++t)
    for (size_t y = 0; y < posteriors.cols(); ++y)
      sum += targets(t, y) * std::log(std::max(posteriors(t, y), kLogFloor));
  return -sum / static_cast<double>(posteriors.rows());
}

double ReferenceKldLoss(const Matrix &posteriors, std::span<const int> labels,
                        const Matrix &si_posteriors, double rho) {
  if (posteriors.rows() != labels.size() ||
      si_posteriors.rows() != posteriors.rows() ||
      si_posteriors.cols() != posteriors.cols())
    throw ShapeError("reference KLD loss: shape mismatch");
  const double n = static_cast<double>(labels.size());
  double hard = 0.0, soft = 0.0;
  for (size_t t = 0; t < labels.size(); ++t) {
    hard += std::log(std::max(posteriors(t, labels[t]), kLogFloor));
    for (size_t y = 0; y < posteriors.cols(); ++y)
      soft += si_posteriors(t, y) * std::log(std::max(posteriors(t, y), kLogFloor));
  }
  return (1.0 - rho) * (-hard / n) + rho * (-soft / n);
}

std::vector<ParamTensor> ModelTensors(Model *model, bool include_frozen) {
  std::vector<ParamTensor> out;
  for (size_t l = 0; l < model->base.layers.size(); ++l) {
    Layer &layer = model->base.layers[l];
    if (!layer.trainable && !include_frozen) continue;
    out.push_back({"layer" + std::to_string(l) + ".weight", layer.weight.data()});
    out.push_back({"layer" + std::to_string(l) + ".bias", layer.bias});
  }
  if (model->lin && (model->lin_trainable || include_frozen)) {
    out.push_back({"lin.a", model->lin->a.data()});
    out.push_back({"lin.b", model->lin->b});
  }
  if (model->lhuc && (model->lhuc_trainable || include_frozen))
    for (size_t l = 0; l < model->lhuc->r.size(); ++l)
      out.push_back({"lhuc.r" + std::to_string(l), model->lhuc->r[l]});
  return out;
}

std::vector<Vector> NumericGradient(const std::function<double()> &loss,
                                    std::span<const ParamTensor> tensors,
                                    double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  std::vector<Vector> grads;
  for (const ParamTensor &t : tensors) {
    Vector g(t.values.size());
    for (size_t i = 0; i < t.values.size(); ++i) {
      const double saved = t.values[i];
      t.values[i] = saved + epsilon;
      const double up = loss();
      t.values[i] = saved - epsilon;
      const double down = loss();
      t.values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("non-finite loss while perturbing " + t.name + "[" +
                           std::to_string(i) + "]");
      g[i] = (up - down) / (2.0 * epsilon);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double RelativeError(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::string GradCheckReport::ToString() const {
  std::ostringstream os;
  os.precision(3);
  os << (pass ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error
     << " tol=" << tolerance << " worst=" << worst << "\n";
  for (const auto &t : tensors)
    os << "  " << t.name << ": max_rel_error=" << t.max_rel_error
       << " checked=" << t.checked << " worst_index=" << t.worst_index << "\n";
  return os.str();
}

GradCheckReport CheckGradients(const Model &model, const Matrix &features,
                               const Matrix &targets, double epsilon,
                               double tolerance) {
  const GradientSet analytic = Backward(model, features, targets);

  Model probe = model;
  auto tensors = ModelTensors(&probe);
  auto numeric = NumericGradient(
      [&] { return ReferenceLoss(ReferenceForward(probe, features), targets); },
      tensors, epsilon);

  // Analytic tensors in the same order as ModelTensors().
  std::vector<std::span<const double>> flat;
  for (size_t l = 0; l < model.base.layers.size(); ++l) {
    if (!model.base.layers[l].trainable) continue;
    flat.push_back(analytic.layers[l].weight.data());
    flat.push_back(analytic.layers[l].bias);
  }
  if (model.lin && model.lin_trainable) {
    flat.push_back(analytic.lin->a.data());
    flat.push_back(analytic.lin->b);
  }
  if (model.lhuc && model.lhuc_trainable)
    for (const auto &r : analytic.lhuc->r) flat.push_back(r);

  GradCheckReport report;
  report.tolerance = tolerance;
  for (size_t t = 0; t < tensors.size(); ++t) {
    if (flat[t].size() != numeric[t].size())
      throw ShapeError("gradient for " + tensors[t].name + " has wrong size");
    TensorReport tr;
    tr.name = tensors[t].name;
    for (size_t i = 0; i < flat[t].size(); ++i) {
      const double a = flat[t][i], n = numeric[t][i];
      if (std::max(std::abs(a), std::abs(n)) <= 1e-8) continue;
      ++tr.checked;
      const double e = RelativeError(a, n);
      if (e > tr.max_rel_error) {
        tr.max_rel_error = e;
        tr.worst_index = i;
      }
    }
    if (tr.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = tr.max_rel_error;
      report.worst = tr.name + "[" + std::to_string(tr.worst_index) + "]";
    }
    report.tensors.push_back(std::move(tr));
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

GradCheckFixture MakeFixture(uint64_t seed) {
  Rng rng(DeriveSeed(seed, 0x6772616463686bULL));
  auto dim = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.UniformInt(static_cast<uint64_t>(hi - lo + 1)));
  };
  GradCheckFixture f;
  NetworkSpec &spec = f.model.spec;
  spec.input_dim = dim(2, 16);
  const int num_hidden = dim(1, 3);
  for (int l = 0; l < num_hidden; ++l) spec.hidden_dims.push_back(dim(2, 16));
  spec.output_dim = dim(2, 16);
  spec.hidden_activation = rng.Uniform() < 0.5 ? Activation::kSigmoid
                                               : Activation::kTanh;
  f.model.base = InitParams(spec, rng.NextU64());
  for (auto &layer : f.model.base.layers)
    for (double &b : layer.bias) b = rng.Uniform(-0.5, 0.5);

  LinParams lin;
  lin.a = Matrix::Identity(spec.input_dim);
  for (double &v : lin.a.data()) v += rng.Uniform(-0.2, 0.2);
  lin.b.resize(spec.input_dim);
  for (double &v : lin.b) v = rng.Uniform(-0.2, 0.2);
  f.model.lin = std::move(lin);

  LhucParams lhuc;
  for (int d : spec.hidden_dims) {
    Vector r(d);
    for (double &v : r) v = rng.Uniform(-1.0, 1.0);
    lhuc.r.push_back(std::move(r));
  }
  f.model.lhuc = std::move(lhuc);

  const int batch = dim(1, 8);
  f.features.Resize(batch, spec.input_dim);
  for (double &v : f.features.data()) v = rng.Normal();
  // Blend of a one-hot label and a random distribution.
  f.targets.Resize(batch, spec.output_dim);
  for (int b = 0; b < batch; ++b) {
    Vector q(spec.output_dim);
    double sum = 0.0;
    for (double &v : q) sum += (v = rng.Uniform(0.01, 1.0));
    const int label = static_cast<int>(rng.UniformInt(spec.output_dim));
    const double rho = rng.Uniform();
    for (int y = 0; y < spec.output_dim; ++y)
      f.targets(b, y) = (1.0 - rho) * (y == label ? 1.0 : 0.0) + rho * q[y] / sum;
  }
  return f;
}

}  // namespace oracle
}  // namespace adaptlab
