// synth/synth-task.cc

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

#include "synth/synth-task.h"

#include <cmath>
#include <numeric>

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {

namespace {

enum Salt : uint64_t {
  kSaltMeans = 1,
  kSaltFactors,
  kSaltTrain,
  kSaltTest,
  kSaltLabels,
  kSaltNoise,
  kSaltFrames,
  kSaltBlocks,
  kSaltSpeaker,
  kSaltTransform,
};

double FrobeniusNorm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ClassGeometry MakeGeometry(const TaskSpec &spec) {
  if (spec.n_classes < 2) throw ConfigError("n_classes must be >= 2");
  if (spec.feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (spec.frames_per_block < 1) throw ConfigError("frames_per_block must be >= 1");
  if (!(spec.within_class_std > 0.0)) throw ConfigError("within_class_std must be > 0");
  const int c = spec.n_classes, d = spec.feature_dim;
  ClassGeometry g;
  Rng mean_rng(DeriveSeed(spec.seed, kSaltMeans));
  g.means.Resize(c, d);
  for (double &v : g.means.data()) v = spec.class_spread * mean_rng.Normal();
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j) {
      double dist2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = g.means(i, k) - g.means(j, k);
        dist2 += diff * diff;
      }
      if (std::sqrt(dist2) < 1e-6)
        throw ConfigError("degenerate class geometry: classes " +
                          std::to_string(i) + " and " + std::to_string(j) +
                          " share a mean");
    }

  // Factor L_c = s * (D_c + 0.2 * strictly-lower Gaussian), D_c in [0.7, 1.3].
  Rng factor_rng(DeriveSeed(spec.seed, kSaltFactors));
  for (int i = 0; i < c; ++i) {
    Matrix f(d, d);
    for (int r = 0; r < d; ++r) {
      f(r, r) = spec.within_class_std * factor_rng.Uniform(0.7, 1.3);
      for (int k = 0; k < r; ++k)
        f(r, k) = spec.within_class_std * 0.2 * factor_rng.Normal();
    }
    g.factors.push_back(std::move(f));
  }
  return g;
}

Dataset SampleFrames(const ClassGeometry &geometry, std::vector<int> labels,
                     uint64_t seed, std::string speaker_id) {
  const size_t d = geometry.means.cols();
  Rng rng(seed);
  Dataset data;
  data.speaker_id = std::move(speaker_id);
  data.features.Resize(labels.size(), d);
  Vector z(d);
  for (size_t t = 0; t < labels.size(); ++t) {
    const int y = labels[t];
    if (y < 0 || static_cast<size_t>(y) >= geometry.factors.size())
      throw ShapeError("label outside the class geometry");
    for (double &v : z) v = rng.Normal();
    const Matrix &f = geometry.factors[y];
    auto x = data.features.Row(t);
    for (size_t r = 0; r < d; ++r) {
      double s = geometry.means(y, r);
      for (size_t k = 0; k <= r; ++k) s += f(r, k) * z[k];
      x[r] = s;
    }
  }
  data.labels = std::move(labels);
  return data;
}

std::pair<Dataset, Dataset> GenerateSiCorpus(const TaskSpec &spec, int n_train,
                                             int n_test) {
  if (n_train < spec.n_classes || n_test < spec.n_classes)
    throw ConfigError("SI corpus sizes must be >= n_classes");
  const ClassGeometry g = MakeGeometry(spec);
  auto balanced = [&](int n, uint64_t salt) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % spec.n_classes;
    Rng rng(DeriveSeed(spec.seed, salt));
    rng.Shuffle(std::span<int>(labels));
    return labels;
  };
  Dataset train = SampleFrames(g, balanced(n_train, kSaltLabels),
                               DeriveSeed(spec.seed, kSaltTrain), "SI");
  Dataset test = SampleFrames(g, balanced(n_test, kSaltLabels + 100),
                              DeriveSeed(spec.seed, kSaltTest), "SI");
  return {std::move(train), std::move(test)};
}

std::string_view SeverityName(Severity s) {
  switch (s) {
    case Severity::kSlight: return "slight";
    case Severity::kMedium: return "medium";
    case Severity::kHeavy: return "heavy";
  }
  return "unknown";
}

Severity ParseSeverity(std::string_view name) {
  if (name == "slight") return Severity::kSlight;
  if (name == "medium") return Severity::kMedium;
  if (name == "heavy") return Severity::kHeavy;
  throw ConfigError("unknown severity '" + std::string(name) + "'");
}

double SpeakerProfile::DistortionMagnitude() const {
  Matrix diff = a;
  for (size_t i = 0; i < diff.rows(); ++i) diff(i, i) -= 1.0;
  return FrobeniusNorm(diff.data()) + FrobeniusNorm(b) +
         FrobeniusNorm(class_offset.data()) + noise_std;
}

SpeakerProfile MakeSpeaker(const TaskSpec &spec, const RosterSpec &roster,
                           std::string speaker_id, Severity severity,
                           double magnitude, uint64_t seed) {
  const int d = spec.feature_dim;
  const double root_d = std::sqrt(static_cast<double>(d));
  SpeakerProfile p;
  p.speaker_id = std::move(speaker_id);
  p.severity = severity;
  p.magnitude = magnitude;
  p.seed = seed;

  Rng rng(DeriveSeed(seed, kSaltTransform));
  Matrix dir(d, d);
  for (double &v : dir.data()) v = rng.Normal();
  const double dir_norm = FrobeniusNorm(dir.data());
  p.a = Matrix::Identity(d);
  for (size_t i = 0; i < p.a.size(); ++i)
    p.a.data()[i] += magnitude * roster.matrix_scale * root_d * dir.data()[i] / dir_norm;

  Vector u(d);
  for (double &v : u) v = rng.Normal();
  const double u_norm = FrobeniusNorm(u);
  p.b.resize(d);
  for (int i = 0; i < d; ++i)
    p.b[i] = magnitude * roster.shift_scale * root_d * u[i] / u_norm;

  p.class_offset.Resize(spec.n_classes, d);
  for (int y = 0; y < spec.n_classes; ++y) {
    auto row = p.class_offset.Row(y);
    for (double &v : row) v = rng.Normal();
    const double norm = FrobeniusNorm(row);
    for (double &v : row) v *= magnitude * roster.class_shift_scale * root_d / norm;
  }

  p.noise_std = magnitude * roster.noise_scale;
  return p;
}

std::vector<SpeakerProfile> MakeSpeakers(const TaskSpec &spec,
                                         const RosterSpec &roster) {
  if (roster.n_slight < 0 || roster.n_medium < 0 || roster.n_heavy < 0)
    throw ConfigError("negative roster count");
  for (const SeverityRange *r : {&roster.slight, &roster.medium, &roster.heavy})
    if (!(r->lo >= 0.0 && r->hi >= r->lo))
      throw ConfigError("severity range must satisfy 0 <= lo <= hi");
  if (!(roster.slight.hi < roster.medium.lo && roster.medium.hi < roster.heavy.lo))
    throw ConfigError("severity ranges must be disjoint and ordered "
                      "slight < medium < heavy");

  std::vector<Severity> order;
  if (roster.n_slight == 2 && roster.n_medium == 4 && roster.n_heavy == 4) {
    using enum Severity;
    order = {kSlight, kMedium, kSlight, kMedium, kHeavy,
             kHeavy,  kHeavy,  kMedium, kHeavy,  kMedium};
  } else {
    order.insert(order.end(), roster.n_slight, Severity::kSlight);
    order.insert(order.end(), roster.n_medium, Severity::kMedium);
    order.insert(order.end(), roster.n_heavy, Severity::kHeavy);
  }

  std::vector<SpeakerProfile> out;
  for (size_t i = 0; i < order.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "S%02d", static_cast<int>(i + 1));
    const uint64_t seed = DeriveSeed(roster.seed ^ spec.seed, kSaltSpeaker + 16 * i);
    const SeverityRange &range = order[i] == Severity::kSlight   ? roster.slight
                                 : order[i] == Severity::kMedium ? roster.medium
                                                                 : roster.heavy;
    Rng rng(seed);
    const double m = range.lo == range.hi ? range.lo : rng.Uniform(range.lo, range.hi);
    out.push_back(MakeSpeaker(spec, roster, id, order[i], m, seed));
  }
  return out;
}

Dataset ApplySpeaker(const SpeakerProfile &profile, const Dataset &data) {
  const size_t d = data.dim();
  if (profile.a.rows() != d || profile.a.cols() != d || profile.b.size() != d ||
      profile.class_offset.cols() != d)
    throw ShapeError("speaker transform is " + std::to_string(profile.a.rows()) +
                     "-dimensional, data is " + std::to_string(d));
  Rng rng(DeriveSeed(profile.seed, kSaltNoise));
  Dataset out;
  out.speaker_id = profile.speaker_id;
  out.labels = data.labels;
  out.features.Resize(data.size(), d);
  for (size_t t = 0; t < data.size(); ++t) {
    auto x = data.features.Row(t);
    auto y = out.features.Row(t);
    for (size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (size_t k = 0; k < d; ++k) s += profile.a(i, k) * x[k];
      y[i] = s + profile.b[i];
    }
    const int label = data.labels[t];
    if (label < 0 || static_cast<size_t>(label) >= profile.class_offset.rows())
      throw ShapeError("label " + std::to_string(label) +
                       " has no class offset in the speaker profile");
    auto c = profile.class_offset.Row(label);
    for (size_t i = 0; i < d; ++i) y[i] += c[i];
    if (profile.noise_std > 0.0)
      for (size_t i = 0; i < d; ++i) y[i] += profile.noise_std * rng.Normal();
  }
  return out;
}

Dataset SpeakerSplits::AdaptSubset(int blocks) const {
  if (blocks < 1 || blocks > adapt_blocks())
    throw ConfigError("adaptation subset of " + std::to_string(blocks) +
                      " blocks requested; pool holds " +
                      std::to_string(adapt_blocks()));
  return adapt_pool.Slice(0, static_cast<size_t>(blocks) * frames_per_block);
}

SpeakerSplits SplitSpeaker(const SpeakerProfile &profile, const TaskSpec &spec,
                           const ClassGeometry &geometry, const SplitSizes &sizes) {
  if (sizes.adapt_blocks < 1 || sizes.cv_blocks < 1 || sizes.test_blocks < 1)
    throw ConfigError("insufficient pool: every split needs at least one block");
  const int fpb = spec.frames_per_block;
  const int blocks = sizes.total();
  const size_t frames = static_cast<size_t>(blocks) * fpb;

  Rng label_rng(DeriveSeed(profile.seed, kSaltLabels));
  std::vector<int> labels(frames);
  for (int &y : labels) y = static_cast<int>(label_rng.UniformInt(spec.n_classes));
  const Dataset clean = SampleFrames(geometry, std::move(labels),
                                     DeriveSeed(profile.seed, kSaltFrames),
                                     profile.speaker_id);
  const Dataset shifted = ApplySpeaker(profile, clean);

  std::vector<int> block_order(blocks);
  std::iota(block_order.begin(), block_order.end(), 0);
  Rng block_rng(DeriveSeed(profile.seed, kSaltBlocks));
  block_rng.Shuffle(std::span<int>(block_order));

  auto take = [&](int first, int count) {
    Dataset d;
    d.speaker_id = profile.speaker_id;
    d.features.Resize(static_cast<size_t>(count) * fpb, spec.feature_dim);
    d.labels.resize(static_cast<size_t>(count) * fpb);
    for (int i = 0; i < count; ++i) {
      const size_t src = static_cast<size_t>(block_order[first + i]) * fpb;
      for (int f = 0; f < fpb; ++f) {
        auto from = shifted.features.Row(src + f);
        std::copy(from.begin(), from.end(),
                  d.features.Row(static_cast<size_t>(i) * fpb + f).begin());
        d.labels[static_cast<size_t>(i) * fpb + f] = shifted.labels[src + f];
      }
    }
    return d;
  };

  SpeakerSplits s;
  s.frames_per_block = fpb;
  s.adapt_pool = take(0, sizes.adapt_blocks);
  s.cv = take(sizes.adapt_blocks, sizes.cv_blocks);
  s.test = take(sizes.adapt_blocks + sizes.cv_blocks, sizes.test_blocks);
  return s;
}

}  // namespace adaptlab
