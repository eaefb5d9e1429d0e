// adapt/adapt.cc

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

#include "adapt/adapt.h"

#include <algorithm>
#include <cmath>

#include "base/adaptlab-error.h"
#include "nnet/nnet-io.h"

namespace adaptlab {

std::string AdaptMethod::Name() const {
  if (is_rsi()) return "rsi";
  std::string name;
  auto add = [&name](const char *part) {
    if (!name.empty()) name += '+';
    name += part;
  };
  if (use_lin) add("lin");
  if (use_lhuc) add("lhuc");
  if (kld) add("kld");
  return name.empty() ? "none" : name;
}

void AdaptMethod::Check() const {
  if (!use_lin && !use_lhuc && !kld)
    throw ConfigError("adaptation method enables nothing");
  if (kld && !(kld->rho >= 0.0 && kld->rho <= 1.0))
    throw ConfigError("rho " + std::to_string(kld->rho) + " outside [0, 1]");
}

AdaptMethod AdaptMethod::Parse(std::string_view name, double rho) {
  AdaptMethod m;
  if (name == "rsi") {
    m.kld = KldConfig{0.0};
  } else {
    size_t pos = 0;
    while (pos <= name.size()) {
      const size_t end = std::min(name.find('+', pos), name.size());
      const std::string_view part = name.substr(pos, end - pos);
      if (part == "lin" && !m.use_lin) {
        m.use_lin = true;
      } else if (part == "lhuc" && !m.use_lhuc) {
        m.use_lhuc = true;
      } else if (part == "kld" && !m.kld) {
        m.kld = KldConfig{rho};
      } else {
        throw ConfigError("unknown adaptation method '" + std::string(name) + "'");
      }
      pos = end + 1;
    }
  }
  m.Check();
  m.schedule.learning_rate = DefaultLearningRate(m);
  return m;
}

double DefaultLearningRate(const AdaptMethod &method) {
  double lr = 1.0;
  if (method.use_lin) lr = std::min(lr, kDefaultLinLearningRate);
  if (method.use_lhuc) lr = std::min(lr, kDefaultLhucLearningRate);
  if (method.kld) lr = std::min(lr, kDefaultKldLearningRate);
  return lr;
}

Vector LhucGate(std::span<const double> r) {
  Vector a(r.size());
  for (size_t i = 0; i < r.size(); ++i) a[i] = LhucAmplitude(r[i]);
  return a;
}

LinParams InitLin(int input_dim) {
  return {Matrix::Identity(input_dim), Vector(input_dim, 0.0)};
}

LhucParams InitLhuc(const NetworkSpec &spec) {
  LhucParams p;
  for (int d : spec.hidden_dims) p.r.emplace_back(d, 0.0);
  return p;
}

Model InsertLin(const Model &si) {
  si.Check();
  Model m = si;
  m.base.SetTrainable(false);
  m.lin = InitLin(si.spec.input_dim);
  m.lin_trainable = true;
  if (m.lhuc) m.lhuc_trainable = false;
  return m;
}

Model InsertLhuc(const Model &si) {
  si.Check();
  Model m = si;
  m.base.SetTrainable(false);
  m.lhuc = InitLhuc(si.spec);
  m.lhuc_trainable = true;
  if (m.lin) m.lin_trainable = false;
  return m;
}

Matrix BlendTargets(std::span<const int> labels, const Matrix &si_posteriors,
                    double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw ConfigError("rho " + std::to_string(rho) + " outside [0, 1]");
  if (labels.size() != si_posteriors.rows())
    throw ShapeError("blend_targets: " + std::to_string(labels.size()) +
                     " labels vs " + std::to_string(si_posteriors.rows()) +
                     " posterior rows");
  const size_t num_classes = si_posteriors.cols();
  Matrix t(labels.size(), num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= num_classes)
      throw ShapeError("label " + std::to_string(labels[i]) + " out of range");
    auto p = si_posteriors.Row(i);
    auto q = t.Row(i);
    for (size_t y = 0; y < num_classes; ++y)
      q[y] = (1.0 - rho) * (static_cast<int>(y) == labels[i] ? 1.0 : 0.0) +
             rho * p[y];
  }
  return t;
}

Matrix CacheSiPosteriors(const Model &si, const Dataset &data) {
  return Forward(si, data.features);
}

size_t SpeakerModel::NumParams() const {
  size_t n = 0;
  if (lin) n += lin->NumParams();
  if (lhuc) n += lhuc->NumParams();
  if (full) n += full->NumParams();
  return n;
}

Model SpeakerModel::Materialize(const Model &si) const {
  if (SpecHash(si.spec) != spec_hash)
    throw FormatError("speaker artifact was adapted from a network with a "
                      "different spec");
  Model m = si;
  if (full) m.base = *full;
  if (lin) m.lin = *lin;
  if (lhuc) m.lhuc = *lhuc;
  m.Check();
  return m;
}

Model PrepareModel(const Model &si, const AdaptMethod &method) {
  method.Check();
  si.Check();
  Model m = si;
  m.lin.reset();
  m.lhuc.reset();
  if (method.use_lin) m.lin = InitLin(si.spec.input_dim);
  if (method.use_lhuc) m.lhuc = InitLhuc(si.spec);
  m.lin_trainable = method.use_lin;
  m.lhuc_trainable = method.use_lhuc;
  m.base.SetTrainable(!method.freeze_base());
  return m;
}

AdaptResult Adapt(const Model &si, const AdaptMethod &method,
                  const Dataset &train, const Dataset &cv,
                  const Matrix *si_posteriors) {
  method.Check();
  if (train.size() == 0) throw ShapeError("empty adaptation set");
  if (cv.size() == 0) throw ShapeError("empty adaptation CV set");

  AdaptResult result;
  result.model = PrepareModel(si, method);

  TargetFn targets = HardTargets(si.spec.output_dim);
  if (method.kld && method.kld->rho > 0.0) {
    Matrix cached;
    if (si_posteriors) {
      if (si_posteriors->rows() != train.size())
        throw ShapeError("cached SI posteriors do not match the adaptation set");
      cached = *si_posteriors;
    } else {
      cached = CacheSiPosteriors(si, train);
    }
    const double rho = method.kld->rho;
    targets = [cached = std::move(cached), rho](const Dataset &d) {
      return BlendTargets(d.labels, cached, rho);
    };
  }
  result.trace = Train(&result.model, train, cv, method.schedule, targets);

  SpeakerModel &sm = result.speaker;
  sm.method = method;
  sm.spec_hash = SpecHash(si.spec);
  if (method.use_lin) sm.lin = result.model.lin;
  if (method.use_lhuc) sm.lhuc = result.model.lhuc;
  if (!method.freeze_base()) sm.full = result.model.base;
  return result;
}

ParamCount ParameterCount(const AdaptMethod &method, const NetworkSpec &spec) {
  spec.Check();
  size_t base = 0;
  for (int l = 0; l < spec.NumLayers(); ++l)
    base += static_cast<size_t>(spec.LayerInputDim(l) + 1) * spec.LayerOutputDim(l);
  const size_t d = spec.input_dim;
  size_t hidden = 0;
  for (int h : spec.hidden_dims) hidden += h;

  ParamCount c;
  c.total = base;
  if (method.use_lin) {
    c.adapted += d * d + d;
    c.total += d * d + d;
  }
  if (method.use_lhuc) {
    c.adapted += hidden;
    c.total += hidden;
  }
  if (!method.freeze_base()) c.adapted += base;
  return c;
}

}  // namespace adaptlab
