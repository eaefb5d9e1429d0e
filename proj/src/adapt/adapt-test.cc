// adapt/adapt-test.cc

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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adapt/adapt-io.h"
#include "adapt/adapt.h"
#include "base/adaptlab-error.h"
#include "base/rng.h"
#include "nnet/nnet-io.h"
#include "oracle/oracle.h"
#include "synth/synth-task.h"

using namespace adaptlab;

namespace {

Model RandomNet(const NetworkSpec &spec, uint64_t seed) {
  Model m;
  m.spec = spec;
  m.base = InitParams(spec, seed);
  // Non-zero biases so that gate and LIN effects are not masked.
  Rng rng(seed + 1);
  for (auto &layer : m.base.layers)
    for (double &b : layer.bias) b = rng.Uniform(-0.5, 0.5);
  return m;
}

Dataset RandomData(int n, int dim, int classes, uint64_t seed, double shift = 0.0) {
  Rng rng(seed);
  Dataset d;
  d.features = Matrix(n, dim);
  for (size_t i = 0; i < d.features.size(); ++i)
    d.features.data()[i] = rng.Normal() + shift;
  for (int i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(rng.UniformInt(classes)));
  return d;
}

double MaxAbsDiff(const Matrix &a, const Matrix &b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

const NetworkSpec kSpec{20, {64, 64, 64, 64}, 10, Activation::kSigmoid};

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("adaptlab-adapt-" + name))
      .string();
}

}  // namespace

TEST_CASE("lhuc gate values") {
  const double r[3] = {0.0, std::log(3.0), -std::log(3.0)};
  const Vector a = LhucGate(r);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(a[2] == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(2);
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.Uniform(-30, 30);
    const double g = LhucAmplitude(x);
    CHECK(g > 0.0);
    CHECK(g < 2.0);
    CHECK(std::abs(g + LhucAmplitude(-x) - 2.0) <= 1e-12);
  }
  for (double x = -10; x <= 10; x += 0.01) {
    CHECK(LhucAmplitude(x) > prev);
    prev = LhucAmplitude(x);
  }
}

TEST_CASE("method names and defaults") {
  for (const char *name : {"lin", "lhuc", "kld", "rsi", "lin+lhuc", "lin+kld",
                           "lhuc+kld", "lin+lhuc+kld"}) {
    const AdaptMethod m = AdaptMethod::Parse(name);
    CHECK(m.Name() == name);
  }
  CHECK(AdaptMethod::Parse("lin").schedule.learning_rate == 0.00001);
  CHECK(AdaptMethod::Parse("kld").schedule.learning_rate == 0.001);
  CHECK(AdaptMethod::Parse("rsi").schedule.learning_rate == 0.001);
  CHECK(AdaptMethod::Parse("lhuc").schedule.learning_rate == 0.01);
  CHECK(AdaptMethod::Parse("lhuc+kld").schedule.learning_rate == 0.001);
  CHECK(AdaptMethod::Parse("lin+lhuc").schedule.learning_rate == 0.00001);

  const AdaptMethod rsi = AdaptMethod::Parse("rsi", 0.5);
  REQUIRE(rsi.kld.has_value());
  CHECK(rsi.kld->rho == 0.0);
  CHECK(rsi.is_rsi());
  CHECK(AdaptMethod::Parse("kld", 0.0).Name() == "rsi");

  CHECK(AdaptMethod::Parse("lin").freeze_base());
  CHECK(AdaptMethod::Parse("lhuc+kld").freeze_base());
  CHECK(!AdaptMethod::Parse("kld").freeze_base());

  CHECK_THROWS_AS(AdaptMethod::Parse("lhn"), ConfigError);
  CHECK_THROWS_AS(AdaptMethod::Parse("lin+lin"), ConfigError);
  CHECK_THROWS_AS(AdaptMethod::Parse(""), ConfigError);
  CHECK_THROWS_AS(AdaptMethod::Parse("kld", 1.5), ConfigError);
  CHECK_THROWS_AS(AdaptMethod{}.Check(), ConfigError);
}

TEST_CASE("freshly inserted parameters are a no-op") {
  const Model si = RandomNet(kSpec, 3);
  const Dataset d = RandomData(1000, 20, 10, 4);
  const Matrix ref = Forward(si, d.features);
  for (const char *name : {"lin", "lhuc", "lin+lhuc", "lin+kld", "lhuc+kld",
                           "lin+lhuc+kld"}) {
    const Model m = PrepareModel(si, AdaptMethod::Parse(name));
    CHECK(MaxAbsDiff(Forward(m, d.features), ref) <= 1e-12);
  }
  const LinParams lin = InitLin(20);
  CHECK(lin.a == Matrix::Identity(20));
  for (double b : lin.b) CHECK(b == 0.0);
  CHECK(lin.NumParams() == 20 * 20 + 20);
  const LhucParams lhuc = InitLhuc(kSpec);
  CHECK(lhuc.NumParams() == 256);
}

TEST_CASE("freeze masks follow the method") {
  const Model si = RandomNet(kSpec, 3);
  for (const char *name : {"lin", "lhuc", "lin+lhuc", "lin+kld"}) {
    const Model m = PrepareModel(si, AdaptMethod::Parse(name));
    for (const auto &layer : m.base.layers) CHECK(!layer.trainable);
  }
  const Model kld = PrepareModel(si, AdaptMethod::Parse("kld"));
  for (const auto &layer : kld.base.layers) CHECK(layer.trainable);
  CHECK(!kld.lin.has_value());
  CHECK(!kld.lhuc.has_value());
  const Model both = PrepareModel(si, AdaptMethod::Parse("lin+lhuc"));
  CHECK(both.lin_trainable);
  CHECK(both.lhuc_trainable);
}

TEST_CASE("blend targets") {
  SUBCASE("worked example") {
    Matrix si(1, 3);
    si(0, 0) = 0.2;
    si(0, 1) = 0.3;
    si(0, 2) = 0.5;
    const Matrix t = BlendTargets(std::vector<int>{2}, si, 0.25);
    CHECK(t(0, 0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(t(0, 1) == doctest::Approx(0.075).epsilon(1e-15));
    CHECK(t(0, 2) == doctest::Approx(0.875).epsilon(1e-15));
  }
  SUBCASE("endpoints are exact") {
    const Model si = RandomNet(NetworkSpec{4, {5}, 6, Activation::kTanh}, 1);
    const Dataset d = RandomData(20, 4, 6, 2);
    const Matrix p = CacheSiPosteriors(si, d);
    CHECK(BlendTargets(d.labels, p, 0.0) == OneHot(d.labels, 6));
    CHECK(BlendTargets(d.labels, p, 1.0) == p);
  }
  SUBCASE("rows are normalized convex combinations") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int s = 2 + static_cast<int>(rng.UniformInt(9));
      std::vector<double> z(s);
      for (double &v : z) v = rng.Uniform(-8, 8);
      const Vector sp = Softmax(z);
      Matrix si(1, s);
      std::copy(sp.begin(), sp.end(), si.data().begin());
      const int label = static_cast<int>(rng.UniformInt(s));
      const double rho = rng.Uniform();
      const Matrix t = BlendTargets(std::vector<int>{label}, si, rho);
      double sum = 0.0;
      for (int y = 0; y < s; ++y) {
        const double hard = y == label ? 1.0 : 0.0;
        CHECK(t(0, y) >= std::min(hard, si(0, y)) - 1e-15);
        CHECK(t(0, y) <= std::max(hard, si(0, y)) + 1e-15);
        sum += t(0, y);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
  SUBCASE("errors") {
    const Matrix si(2, 3, 1.0 / 3.0);
    CHECK_THROWS_AS(BlendTargets(std::vector<int>{0, 1}, si, -0.01), ConfigError);
    CHECK_THROWS_AS(BlendTargets(std::vector<int>{0, 1}, si, 1.01), ConfigError);
    CHECK_THROWS_AS(BlendTargets(std::vector<int>{0}, si, 0.5), ShapeError);
  }
}

TEST_CASE("cached SI posteriors") {
  const Model si = RandomNet(NetworkSpec{4, {5}, 3, Activation::kSigmoid}, 5);
  const Dataset d = RandomData(3, 4, 3, 6);
  const Matrix cached = CacheSiPosteriors(si, d);
  CHECK(cached == Forward(si, d));
  for (size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (double p : cached.Row(i)) s += p;
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  AdaptMethod m = AdaptMethod::Parse("kld", 0.5);
  m.schedule.max_epochs = 3;
  const Matrix copy = cached;
  const Dataset cv = RandomData(5, 4, 3, 7);
  Adapt(si, m, d, cv, &cached);
  CHECK(cached == copy);
  CHECK(CacheSiPosteriors(si, d) == copy);
}

TEST_CASE("LIN trains while the base stays frozen") {
  const Model si = RandomNet(kSpec, 9);
  Model m = InsertLin(si);
  const Dataset d = RandomData(40, 20, 10, 10, 1.5);
  const Matrix t = OneHot(d.labels, 10);
  for (int step = 0; step < 5; ++step)
    SgdStep(&m, Backward(m, d.features, t), LearningRates::Uniform(0.05));
  CHECK(!(m.lin->a == Matrix::Identity(20)));
  CHECK(BitIdentical(m.base, si.base));
  CHECK(ParameterCount(AdaptMethod::Parse("lin"), kSpec).adapted == 420);
}

TEST_CASE("LHUC gates stay in range and the base stays frozen") {
  const Model si = RandomNet(kSpec, 11);
  const Dataset train = RandomData(200, 20, 10, 12, 1.0);
  const Dataset cv = RandomData(50, 20, 10, 13, 1.0);
  AdaptMethod m = AdaptMethod::Parse("lhuc");
  m.schedule.learning_rate = 0.5;
  m.schedule.max_epochs = 20;
  m.schedule.patience = 0;
  const AdaptResult r = Adapt(si, m, train, cv);
  CHECK(BitIdentical(r.model.base, si.base));
  bool moved = false;
  for (const auto &rv : r.model.lhuc->r) {
    for (double g : LhucGate(rv)) {
      CHECK(g > 0.0);
      CHECK(g < 2.0);
      moved = moved || g != 1.0;
    }
  }
  CHECK(moved);
  CHECK(ParameterCount(AdaptMethod::Parse("lhuc"), kSpec).adapted == 256);
}

TEST_CASE("every insertion method leaves the SI tensors bit-identical") {
  const Model si = RandomNet(NetworkSpec{6, {8, 8}, 4, Activation::kSigmoid}, 14);
  const Dataset train = RandomData(60, 6, 4, 15, 0.7);
  const Dataset cv = RandomData(20, 6, 4, 16, 0.7);
  for (const char *name : {"lin", "lhuc", "lin+lhuc", "lin+kld", "lhuc+kld",
                           "lin+lhuc+kld"}) {
    AdaptMethod m = AdaptMethod::Parse(name, 0.25);
    m.schedule.learning_rate = 0.1;
    m.schedule.max_epochs = 10;
    const AdaptResult r = Adapt(si, m, train, cv);
    CHECK(BitIdentical(r.model.base, si.base));
    CHECK(ParamsChecksum(r.model.base) == ParamsChecksum(si.base));
    CHECK(!r.speaker.full.has_value());
  }
  AdaptMethod kld = AdaptMethod::Parse("kld", 0.25);
  kld.schedule.learning_rate = 0.1;
  kld.schedule.max_epochs = 10;
  kld.schedule.patience = 0;
  const AdaptResult r = Adapt(si, kld, train, cv);
  CHECK(!BitIdentical(r.model.base, si.base));
  CHECK(r.speaker.full.has_value());
}

TEST_CASE("KLD at rho 0 reproduces RSI bit for bit") {
  const Model si = RandomNet(NetworkSpec{6, {8, 8}, 4, Activation::kSigmoid}, 20);
  const Dataset train = RandomData(80, 6, 4, 21, 0.5);
  const Dataset cv = RandomData(30, 6, 4, 22, 0.5);
  AdaptMethod rsi = AdaptMethod::Parse("rsi");
  AdaptMethod kld0 = AdaptMethod::Parse("kld", 0.0);
  for (AdaptMethod *m : {&rsi, &kld0}) {
    m->schedule.learning_rate = 0.2;
    m->schedule.max_epochs = 15;
    m->schedule.seed = 99;
  }
  // A blended target at rho = 0 equals the hard target exactly, so passing
  // cached posteriors must not change anything either.
  const Matrix post = CacheSiPosteriors(si, train);
  const AdaptResult a = Adapt(si, rsi, train, cv);
  const AdaptResult b = Adapt(si, kld0, train, cv, &post);
  REQUIRE(a.trace.trace.size() == b.trace.trace.size());
  for (size_t i = 0; i < a.trace.trace.size(); ++i) {
    CHECK(a.trace.trace[i].train_loss == b.trace.trace[i].train_loss);
    CHECK(a.trace.trace[i].cv_loss == b.trace.trace[i].cv_loss);
  }
  CHECK(BitIdentical(a.model.base, b.model.base));
}

TEST_CASE("gradient check covers LIN and gates on every fixture") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    oracle::GradCheckFixture f = oracle::MakeFixture(seed);
    const auto report =
        oracle::CheckGradients(f.model, f.features, f.targets, 1e-4, 1e-5);
    INFO(report.ToString());
    CHECK(report.pass);
  }
}

TEST_CASE("parameter counts") {
  const ParamCount kld = ParameterCount(AdaptMethod::Parse("kld"), kSpec);
  const size_t base = (20 + 1) * 64 + 3 * (64 + 1) * 64 + (64 + 1) * 10;
  CHECK(kld.adapted == base);
  CHECK(kld.total == base);
  const ParamCount lin = ParameterCount(AdaptMethod::Parse("lin"), kSpec);
  CHECK(lin.adapted == 420);
  CHECK(lin.total == base + 420);
  const ParamCount lhuc = ParameterCount(AdaptMethod::Parse("lhuc"), kSpec);
  CHECK(lhuc.adapted == 256);
  CHECK(lhuc.total == base + 256);
  CHECK(lhuc.adapted < lin.adapted);
  CHECK(lin.adapted < kld.adapted);
  CHECK(ParameterCount(AdaptMethod::Parse("lin+lhuc+kld"), kSpec).adapted == 676);
  CHECK(ParameterCount(AdaptMethod::Parse("rsi"), kSpec).adapted == base);
}

TEST_CASE("empty adaptation data") {
  const Model si = RandomNet(NetworkSpec{4, {5}, 3, Activation::kSigmoid}, 1);
  const Dataset d = RandomData(10, 4, 3, 2);
  CHECK_THROWS_AS(Adapt(si, AdaptMethod::Parse("lhuc"), Dataset{}, d), ShapeError);
  CHECK_THROWS_AS(Adapt(si, AdaptMethod::Parse("lhuc"), d, Dataset{}), ShapeError);
  Matrix wrong(3, 3, 1.0 / 3.0);
  CHECK_THROWS_AS(Adapt(si, AdaptMethod::Parse("kld"), d, d, &wrong), ShapeError);
}

TEST_CASE("speaker artifacts") {
  const NetworkSpec spec{6, {8, 8}, 4, Activation::kSigmoid};
  const Model si = RandomNet(spec, 30);
  const Dataset train = RandomData(60, 6, 4, 31, 0.7);
  const Dataset cv = RandomData(20, 6, 4, 32, 0.7);
  const std::string path = TempPath("speaker.adlb");
  for (const char *name : {"lin", "lhuc", "kld", "rsi", "lin+lhuc", "lin+lhuc+kld"}) {
    CAPTURE(name);
    AdaptMethod m = AdaptMethod::Parse(name, 0.125);
    m.schedule.learning_rate = 0.1;
    m.schedule.max_epochs = 5;
    const AdaptResult r = Adapt(si, m, train, cv);
    SaveSpeakerModel(r.speaker, spec, path);
    const SpeakerModel back = LoadSpeakerModel(path, spec);
    CHECK(back.method.Name() == m.Name());
    CHECK(back.NumParams() == r.speaker.NumParams());
    CHECK(back.NumParams() == ParameterCount(m, spec).adapted);
    const Model rebuilt = back.Materialize(si);
    CHECK(Forward(rebuilt, cv) == Forward(r.model, cv));
    if (m.kld) CHECK(back.method.kld->rho == m.kld->rho);
  }
  NetworkSpec other = spec;
  other.hidden_dims = {8, 9};
  CHECK_THROWS_AS(LoadSpeakerModel(path, other), FormatError);
  Model wrong_si = RandomNet(other, 1);
  const SpeakerModel sm = LoadSpeakerModel(path, spec);
  CHECK_THROWS_AS(sm.Materialize(wrong_si), FormatError);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(30);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(LoadSpeakerModel(path, spec), ChecksumError);
  std::filesystem::remove(path);
}

TEST_CASE("KLD adaptation helps a heavily accented speaker") {
  // Small SI network on the default synthetic task.
  TaskSpec task;
  auto [train, test] = GenerateSiCorpus(task, 4000, 1000);
  const NetworkSpec spec{task.feature_dim, {32, 32}, task.n_classes,
                         Activation::kSigmoid};
  Model si;
  si.spec = spec;
  si.base = InitParams(spec, 1);
  TrainSchedule s;
  s.learning_rate = 0.1;
  s.max_epochs = 30;
  s.patience = 5;
  Train(&si, train, test, s, HardTargets(spec.output_dim));

  const RosterSpec roster;
  const SpeakerProfile p =
      MakeSpeaker(task, roster, "H01", Severity::kHeavy, 0.8, 1234);
  const SpeakerSplits splits = SplitSpeaker(p, task, MakeGeometry(task), SplitSizes{});
  AdaptMethod kld = AdaptMethod::Parse("kld", 0.25);
  kld.schedule.seed = 5;
  const AdaptResult r = Adapt(si, kld, splits.AdaptSubset(100), splits.cv);
  const double before = ErrorRate(si, splits.test);
  const double after = ErrorRate(r.model, splits.test);
  // Recorded from the seeded run: 248 and 115 errors out of 1000 frames.
  CHECK(before == doctest::Approx(0.248).epsilon(1e-12));
  CHECK(after == doctest::Approx(0.115).epsilon(1e-12));
  CHECK(after < before);
}
