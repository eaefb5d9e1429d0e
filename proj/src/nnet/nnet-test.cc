// nnet/nnet-test.cc

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
#include <limits>

#include "base/adaptlab-error.h"
#include "base/rng.h"
#include "nnet/nnet-compute.h"
#include "nnet/nnet-io.h"
#include "nnet/nnet-train.h"
#include "nnet/nnet-types.h"
#include "oracle/oracle.h"

using namespace adaptlab;

namespace {

Matrix FromRows(const std::vector<std::vector<double>> &rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

// 3 -> 4 (sigmoid) -> 3 with hand-picked weights; the expected posteriors
// below were computed separately in float64 numpy.
Model HandNet() {
  Model m;
  m.spec = NetworkSpec{3, {4}, 3, Activation::kSigmoid};
  m.base.layers.resize(2);
  m.base.layers[0].weight = FromRows(
      {{0.2, -0.5, 0.1, 0.7}, {-0.3, 0.4, 0.9, -0.2}, {0.6, 0.1, -0.8, 0.3}});
  m.base.layers[0].bias = {0.1, -0.2, 0.05, 0.0};
  m.base.layers[1].weight = FromRows(
      {{0.5, -0.4, 0.3}, {-0.6, 0.2, 0.8}, {0.1, 0.9, -0.5}, {0.4, -0.3, 0.2}});
  m.base.layers[1].bias = {0.0, 0.1, -0.1};
  return m;
}

Matrix HandBatch() {
  return FromRows({{1.0, 0.5, -1.5}, {-0.3, 2.0, 0.7}, {0.0, 0.0, 0.0}});
}

const double kHandPosteriors[3][3] = {
    {0.31037089304533744, 0.46115708206542833, 0.22847202488923424},
    {0.2472391809730338, 0.44119907160930549, 0.31156174741766063},
    {0.32608348476587135, 0.3419973154351324, 0.33191919979899626}};

const double kHandGatedPosteriors[3][3] = {
    {0.40807632832962115, 0.37367777412429309, 0.21824589754608589},
    {0.36422930102216822, 0.36643155083846085, 0.26933914813937088},
    {0.43612458549826566, 0.26424492466355481, 0.29963048983817958}};

const double kHandLinPosteriors[3][3] = {
    {0.31344035309071488, 0.45789789562725675, 0.2286617512820282},
    {0.27762570970852002, 0.33790273875139859, 0.38447155154008139},
    {0.34030933827851978, 0.31472841670266671, 0.34496224501881362}};

void CheckRows(const Matrix &p, const double expected[3][3], double tol) {
  REQUIRE(p.rows() == 3);
  REQUIRE(p.cols() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(p(i, j) - expected[i][j]) <= tol);
}

Dataset RandomData(const NetworkSpec &spec, int n, uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.features = Matrix(n, spec.input_dim);
  for (size_t i = 0; i < d.features.size(); ++i) d.features.data()[i] = rng.Normal();
  for (int i = 0; i < n; ++i)
    d.labels.push_back(static_cast<int>(rng.UniformInt(spec.output_dim)));
  return d;
}

// Two Gaussian blobs far apart: linearly separable with a wide margin.
Dataset Separable(int n, uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.features = Matrix(n, 2);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    d.features(i, 0) = (y ? 3.0 : -3.0) + 0.5 * rng.Normal();
    d.features(i, 1) = (y ? -3.0 : 3.0) + 0.5 * rng.Normal();
    d.labels.push_back(y);
  }
  return d;
}

Model Net(const NetworkSpec &spec, uint64_t seed) {
  Model m;
  m.spec = spec;
  m.base = InitParams(spec, seed);
  return m;
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("adaptlab-nnet-" + name))
      .string();
}

}  // namespace

TEST_CASE("softmax") {
  SUBCASE("uniform logits") {
    const double z[4] = {0, 0, 0, 0};
    for (double p : Softmax(z)) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("shift invariance") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> z(7);
      for (double &v : z) v = rng.Uniform(-20, 20);
      const double c = rng.Uniform(-100, 100);
      std::vector<double> shifted = z;
      for (double &v : shifted) v += c;
      const Vector a = Softmax(z), b = Softmax(shifted);
      for (size_t k = 0; k < z.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
    }
  }
  SUBCASE("large logits do not overflow") {
    const double z[3] = {1000.0, 0.0, -1000.0};
    const Vector p = Softmax(z);
    CHECK(p[0] == 1.0);
    CHECK(std::isfinite(p[1]));
    CHECK(p[2] >= 0.0);
  }
}

TEST_CASE("forward matches frozen reference values") {
  Model m = HandNet();
  CheckRows(Forward(m, HandBatch()), kHandPosteriors, 1e-15);

  Model gated = m;
  gated.lhuc = LhucParams{{{0.5, -1.0, 0.0, 2.0}}};
  CheckRows(Forward(gated, HandBatch()), kHandGatedPosteriors, 1e-15);

  Model lin = m;
  lin.lin = LinParams{FromRows({{1.1, 0.2, 0.0}, {-0.1, 0.9, 0.3}, {0.05, 0.0, 1.2}}),
                      {0.1, -0.1, 0.2}};
  CheckRows(Forward(lin, HandBatch()), kHandLinPosteriors, 1e-15);

  // The (params, NetworkSpec) overload agrees with the Model form.
  Dataset batch;
  batch.features = HandBatch();
  batch.labels = {0, 1, 2};
  CheckRows(Forward(gated.base, gated.spec, batch, &*gated.lhuc),
            kHandGatedPosteriors, 1e-15);
}

TEST_CASE("forward agrees with the naive oracle on random nets") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    NetworkSpec spec;
    spec.input_dim = 1 + static_cast<int>(rng.UniformInt(12));
    for (int l = 0, n = 1 + static_cast<int>(rng.UniformInt(3)); l < n; ++l)
      spec.hidden_dims.push_back(1 + static_cast<int>(rng.UniformInt(16)));
    spec.output_dim = 2 + static_cast<int>(rng.UniformInt(8));
    spec.hidden_activation = static_cast<Activation>(rng.UniformInt(4));
    Model m = Net(spec, seed);
    const Dataset d = RandomData(spec, 9, seed + 100);
    const Matrix a = Forward(m, d.features);
    const Matrix b = oracle::ReferenceForward(m, d.features);
    for (size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-12);
    for (size_t i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (double p : a.Row(i)) {
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        s += p;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("forward rejects mismatched shapes") {
  Model m = HandNet();
  CHECK_THROWS_AS(Forward(m, Matrix(2, 4)), ShapeError);
  Model broken = m;
  broken.base.layers[1].bias.pop_back();
  try {
    Forward(broken, HandBatch());
    FAIL("expected a shape error");
  } catch (const ShapeError &e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("cross entropy") {
  SUBCASE("perfect prediction is zero") {
    const Matrix p = FromRows({{0.0, 1.0, 0.0}});
    CHECK(CrossEntropy(p, OneHot(std::vector<int>{1}, 3)) == 0.0);
  }
  SUBCASE("uniform posterior over four classes is ln 4") {
    const Matrix p = FromRows({{0.25, 0.25, 0.25, 0.25}});
    CHECK(CrossEntropy(p, OneHot(std::vector<int>{2}, 4)) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(std::log(4.0) == doctest::Approx(1.3863).epsilon(1e-4));
  }
  SUBCASE("blended target against the oracle double sum") {
    Model m = HandNet();
    Model gated = m;
    gated.lhuc = LhucParams{{{0.5, -1.0, 0.0, 2.0}}};
    const Matrix p = Forward(m, HandBatch());
    const Matrix si = Forward(gated, HandBatch());
    const std::vector<int> labels{0, 2, 1};
    Matrix t = OneHot(labels, 3);
    for (size_t i = 0; i < t.size(); ++i)
      t.data()[i] = 0.75 * t.data()[i] + 0.25 * si.data()[i];
    CHECK(CrossEntropy(p, t) ==
          doctest::Approx(oracle::ReferenceLoss(p, t)).epsilon(1e-14));
    CHECK(CrossEntropy(p, t) == doctest::Approx(1.1284809954884147).epsilon(1e-14));
  }
  SUBCASE("log floor keeps the loss finite") {
    const Matrix p = FromRows({{1.0, 0.0}});
    const double ce = CrossEntropy(p, OneHot(std::vector<int>{1}, 2));
    CHECK(ce == doctest::Approx(-std::log(kLogFloor)));
  }
  SUBCASE("non-negative for one-hot targets") {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> z(5);
      for (double &v : z) v = rng.Uniform(-5, 5);
      const Vector s = Softmax(z);
      Matrix p(1, 5);
      std::copy(s.begin(), s.end(), p.data().begin());
      CHECK(CrossEntropy(p, OneHot(std::vector<int>{int(rng.UniformInt(5))}, 5)) > 0.0);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(CrossEntropy(Matrix(2, 3, 0.3), Matrix(2, 4, 0.25)), ShapeError);
  }
}

TEST_CASE("error rate breaks ties toward the lowest index") {
  const Matrix p = FromRows({{0.5, 0.5}, {0.2, 0.8}, {0.6, 0.4}});
  CHECK(ErrorRate(p, std::vector<int>{0, 1, 1}) == doctest::Approx(1.0 / 3.0));
  CHECK(ErrorRate(p, std::vector<int>{1, 1, 0}) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(ErrorRate(p, std::vector<int>{0, 1}), ShapeError);
}

TEST_CASE("backward") {
  SUBCASE("zero at posterior == target") {
    Model m = HandNet();
    m.lhuc = LhucParams{{{0.5, -1.0, 0.0, 2.0}}};
    const Matrix t = Forward(m, HandBatch());
    const GradientSet g = Backward(m, HandBatch(), t);
    for (const auto &layer : g.layers) {
      for (size_t i = 0; i < layer.weight.size(); ++i)
        CHECK(std::abs(layer.weight.data()[i]) < 1e-16);
      for (double v : layer.bias) CHECK(std::abs(v) < 1e-16);
    }
    for (double v : g.lhuc->r[0]) CHECK(std::abs(v) < 1e-16);
  }
  SUBCASE("seeded 2-layer net matches central differences") {
    NetworkSpec spec{5, {7}, 4, Activation::kTanh};
    Model m = Net(spec, 17);
    const Dataset d = RandomData(spec, 6, 18);
    const auto report = oracle::CheckGradients(m, d.features,
                                               OneHot(d.labels, 4), 1e-4, 1e-5);
    INFO(report.ToString());
    CHECK(report.pass);
    CHECK(report.max_rel_error <= 1e-5);
  }
  SUBCASE("frozen layers get no gradient") {
    Model m = HandNet();
    m.base.layers[0].trainable = false;
    const GradientSet g =
        Backward(m, HandBatch(), OneHot(std::vector<int>{0, 1, 2}, 3));
    CHECK(g.layers[0].weight.empty());
    CHECK(g.layers[0].bias.empty());
    CHECK(!g.layers[1].weight.empty());
  }
}

TEST_CASE("sgd step") {
  SUBCASE("scalar arithmetic") {
    Model m;
    m.spec = NetworkSpec{1, {}, 1, Activation::kSigmoid};
    m.base.layers.resize(1);
    m.base.layers[0].weight = Matrix(1, 1, 1.0);
    m.base.layers[0].bias = {0.0};
    GradientSet g;
    g.layers.resize(1);
    g.layers[0].weight = Matrix(1, 1, 0.5);
    g.layers[0].bias = {0.0};
    SgdStep(&m, g, LearningRates::Uniform(0.1));
    CHECK(m.base.layers[0].weight(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
  }
  Model m = HandNet();
  const Matrix t = OneHot(std::vector<int>{0, 1, 2}, 3);
  SUBCASE("lr 0 leaves parameters unchanged") {
    const NetworkParams before = m.base;
    SgdStep(&m, Backward(m, HandBatch(), t), LearningRates::Uniform(0.0));
    CHECK(BitIdentical(before, m.base));
  }
  SUBCASE("frozen layer with nonzero gradient is unchanged") {
    GradientSet g = Backward(m, HandBatch(), t);
    m.base.layers[1].trainable = false;
    const NetworkParams before = m.base;
    SgdStep(&m, g, LearningRates::Uniform(0.5));
    CHECK(BitIdentical(before.layers[1].weight.Row(0), m.base.layers[1].weight.Row(0)));
    CHECK(BitIdentical(before.layers[1].bias, m.base.layers[1].bias));
    CHECK(!BitIdentical(before.layers[0].bias, m.base.layers[0].bias));
  }
  SUBCASE("non-finite gradient aborts without touching anything") {
    GradientSet g = Backward(m, HandBatch(), t);
    g.layers[1].bias[2] = std::numeric_limits<double>::quiet_NaN();
    const NetworkParams before = m.base;
    try {
      SgdStep(&m, g, LearningRates::Uniform(0.1));
      FAIL("expected a numeric error");
    } catch (const NumericError &e) {
      CHECK(std::string(e.what()).find("layer 1 bias") != std::string::npos);
    }
    CHECK(BitIdentical(before, m.base));
  }
  SUBCASE("negative learning rate") {
    CHECK_THROWS_AS(SgdStep(&m, Backward(m, HandBatch(), t),
                            LearningRates::Uniform(-0.1)),
                    ConfigError);
  }
}

TEST_CASE("training") {
  const NetworkSpec spec{2, {8}, 2, Activation::kSigmoid};
  const Dataset train = Separable(64, 1), cv = Separable(32, 2);
  TrainSchedule s;
  s.learning_rate = 0.5;
  s.max_epochs = 30;
  s.seed = 3;

  SUBCASE("zero epochs leave parameters unchanged") {
    Model m = Net(spec, 4);
    const NetworkParams before = m.base;
    s.max_epochs = 0;
    const TrainResult r = Train(&m, train, cv, s, HardTargets(2));
    CHECK(BitIdentical(before, m.base));
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].epoch == 0);
  }
  SUBCASE("same seed gives bit-identical parameters") {
    Model a = Net(spec, 4), b = a;
    const TrainResult ra = Train(&a, train, cv, s, HardTargets(2));
    const TrainResult rb = Train(&b, train, cv, s, HardTargets(2));
    CHECK(BitIdentical(a.base, b.base));
    REQUIRE(ra.trace.size() == rb.trace.size());
    for (size_t i = 0; i < ra.trace.size(); ++i)
      CHECK(ra.trace[i].train_loss == rb.trace[i].train_loss);
    Model c = Net(spec, 4);
    s.seed = 4;
    Train(&c, train, cv, s, HardTargets(2));
    CHECK(!BitIdentical(a.base, c.base));
  }
  SUBCASE("separable toy problem reaches zero training error") {
    Model m = Net(spec, 4);
    s.patience = 0;
    s.max_epochs = 200;
    const TrainResult r = Train(&m, train, cv, s, HardTargets(2));
    CHECK(r.trace.back().epoch == 200);
    CHECK(ErrorRate(m, train) == 0.0);
    CHECK(ErrorRate(m, cv) == 0.0);
  }
  SUBCASE("frozen tensors stay bit-identical") {
    Model m = Net(spec, 4);
    m.base.layers[0].trainable = false;
    const NetworkParams before = m.base;
    Train(&m, train, cv, s, HardTargets(2));
    CHECK(BitIdentical(before.layers[0].weight.Row(0), m.base.layers[0].weight.Row(0)));
    CHECK(BitIdentical(before.layers[0].weight.Row(1), m.base.layers[0].weight.Row(1)));
    CHECK(BitIdentical(before.layers[0].bias, m.base.layers[0].bias));
    CHECK(!BitIdentical(before.layers[1].bias, m.base.layers[1].bias));
  }
  SUBCASE("early stopping returns the best CV parameters") {
    Model m = Net(spec, 4);
    s.patience = 2;
    s.max_epochs = 200;
    const TrainResult r = Train(&m, train, cv, s, HardTargets(2));
    CHECK(r.stopped_early);
    CHECK(static_cast<int>(r.trace.size()) - 1 == r.best_epoch + 2);
    CHECK(ErrorRate(m, cv) == r.best_cv_error);
    CHECK(r.trace[r.best_epoch].cv_error == r.best_cv_error);
  }
  SUBCASE("patience 0 runs every epoch") {
    Model m = Net(spec, 4);
    s.patience = 0;
    s.max_epochs = 12;
    const TrainResult r = Train(&m, train, cv, s, HardTargets(2));
    CHECK(!r.stopped_early);
    CHECK(r.trace.size() == 13);
  }
  SUBCASE("divergence is reported") {
    const NetworkSpec relu{2, {8}, 2, Activation::kRelu};
    Model m = Net(relu, 4);
    s.learning_rate = 1e200;
    CHECK_THROWS_AS(Train(&m, train, cv, s, HardTargets(2)), NumericError);
  }
  SUBCASE("empty data and bad schedules") {
    Model m = Net(spec, 4);
    CHECK_THROWS_AS(Train(&m, Dataset{}, cv, s, HardTargets(2)), ShapeError);
    s.batch_size = 0;
    CHECK_THROWS_AS(Train(&m, train, cv, s, HardTargets(2)), ConfigError);
  }
}

TEST_CASE("glorot init") {
  const NetworkSpec spec{20, {64, 64}, 10, Activation::kSigmoid};
  const NetworkParams p = InitParams(spec, 1);
  for (int l = 0; l < spec.NumLayers(); ++l) {
    const double bound =
        std::sqrt(6.0 / (spec.LayerInputDim(l) + spec.LayerOutputDim(l)));
    const Matrix &w = p.layers[l].weight;
    CHECK(w.rows() == static_cast<size_t>(spec.LayerInputDim(l)));
    CHECK(w.cols() == static_cast<size_t>(spec.LayerOutputDim(l)));
    double max_abs = 0.0;
    for (size_t i = 0; i < w.size(); ++i) max_abs = std::max(max_abs, std::abs(w.data()[i]));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.9 * bound);
    for (double b : p.layers[l].bias) CHECK(b == 0.0);
  }
  CHECK(p.NumParams() == 20 * 64 + 64 + 64 * 64 + 64 + 64 * 10 + 10);
  CHECK(BitIdentical(p, InitParams(spec, 1)));
  CHECK(!BitIdentical(p, InitParams(spec, 2)));
}

TEST_CASE("spec validation and activation names") {
  CHECK_THROWS_AS((NetworkSpec{0, {4}, 3, Activation::kSigmoid}.Check()), ConfigError);
  CHECK_THROWS_AS((NetworkSpec{3, {0}, 3, Activation::kSigmoid}.Check()), ConfigError);
  for (Activation a : {Activation::kSigmoid, Activation::kTanh, Activation::kRelu,
                       Activation::kIdentity})
    CHECK(ParseActivation(ActivationName(a)) == a);
  CHECK_THROWS_AS(ParseActivation("softplus"), ConfigError);
}

TEST_CASE("checkpoint") {
  const NetworkSpec spec{6, {5, 4}, 3, Activation::kTanh};
  Model m = Net(spec, 8);
  m.base.layers[0].trainable = false;
  const std::string path = TempPath("ckpt.adlb");

  SUBCASE("save then load is bit-identical") {
    SaveParams(m, path);
    const Model back = LoadParams(path);
    CHECK(back.spec == spec);
    CHECK(BitIdentical(back.base, m.base));
    CHECK(!back.base.layers[0].trainable);
    CHECK(ParamsChecksum(back.base) == ParamsChecksum(m.base));
  }
  SUBCASE("corrupt payload byte") {
    SaveParams(m, path);
    {
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.seekg(60);
      const char c = static_cast<char>(f.get());
      f.seekp(60);
      f.put(static_cast<char>(c ^ 0x40));
    }
    CHECK_THROWS_AS(LoadParams(path), ChecksumError);
  }
  SUBCASE("unknown version tag") {
    SaveParams(m, path);
    {
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(4);
      f.put(7);
    }
    CHECK_THROWS_AS(LoadParams(path), VersionError);
  }
  SUBCASE("truncated file") {
    SaveParams(m, path);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
    CHECK_THROWS_AS(LoadParams(path), TruncatedError);
  }
  SUBCASE("spec hash and checksum sensitivity") {
    NetworkSpec other = spec;
    other.hidden_activation = Activation::kSigmoid;
    CHECK(SpecHash(spec) != SpecHash(other));
    NetworkParams p = m.base;
    p.layers[2].bias[0] = std::nextafter(p.layers[2].bias[0], 1.0);
    CHECK(ParamsChecksum(p) != ParamsChecksum(m.base));
    p = m.base;
    p.SetTrainable(true);
    CHECK(ParamsChecksum(p) == ParamsChecksum(m.base));
  }
  std::filesystem::remove(path);
}
