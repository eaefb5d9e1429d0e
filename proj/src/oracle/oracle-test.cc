// oracle/oracle-test.cc

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
#include <limits>

#include "adapt/adapt.h"
#include "base/adaptlab-error.h"
#include "base/rng.h"
#include "oracle/oracle.h"

using namespace adaptlab;
using namespace adaptlab::oracle;

TEST_CASE("numeric gradient of a parabola") {
  std::vector<double> p{3.0};
  std::vector<ParamTensor> t{{"p", std::span<double>(p)}};
  const auto g = NumericGradient([&] { return p[0] * p[0]; }, t, 1e-4);
  REQUIRE(g.size() == 1);
  CHECK(std::abs(g[0][0] - 6.0) <= 1e-8);
  CHECK(p[0] == 3.0);  // restored after perturbation
}

TEST_CASE("numeric gradient of a constant is zero") {
  std::vector<double> a{1.0, -2.0, 0.5}, b{4.0};
  std::vector<ParamTensor> t{{"a", std::span<double>(a)}, {"b", std::span<double>(b)}};
  const auto g = NumericGradient([] { return 7.25; }, t, 1e-4);
  for (const auto &v : g)
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("numeric gradient reports a non-finite loss") {
  std::vector<double> p{0.0};
  std::vector<ParamTensor> t{{"p", std::span<double>(p)}};
  CHECK_THROWS_AS(NumericGradient([&] { return std::log(p[0]); }, t, 1e-4),
                  NumericError);
}

TEST_CASE("relative error definition") {
  CHECK(RelativeError(1.0, 1.0) == 0.0);
  CHECK(RelativeError(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(RelativeError(-1.0, 1.0) == doctest::Approx(2.0));
  CHECK(RelativeError(1e-12, 0.0) == doctest::Approx(1e-4));
}

TEST_CASE("KLD criterion equals cross entropy against the blended target") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.UniformInt(6));
    const int s = 2 + static_cast<int>(rng.UniformInt(6));
    Matrix p(n, s), si(n, s);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      std::vector<double> z1(s), z2(s);
      for (int k = 0; k < s; ++k) {
        z1[k] = rng.Uniform(-3, 3);
        z2[k] = rng.Uniform(-3, 3);
      }
      const Vector a = Softmax(z1), b = Softmax(z2);
      for (int k = 0; k < s; ++k) {
        p(i, k) = a[k];
        si(i, k) = b[k];
      }
      labels.push_back(static_cast<int>(rng.UniformInt(s)));
    }
    const double rho = rng.Uniform();
    const double kld = ReferenceKldLoss(p, labels, si, rho);
    const double blended = ReferenceLoss(p, BlendTargets(labels, si, rho));
    CHECK(kld == doctest::Approx(blended).epsilon(1e-13));
  }
}

TEST_CASE("reference forward honours LIN and LHUC") {
  const NetworkSpec spec{4, {5, 3}, 3, Activation::kSigmoid};
  Model m;
  m.spec = spec;
  m.base = InitParams(spec, 12);
  Matrix x(2, 4);
  for (size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.3 * static_cast<double>(i) - 1.0;
  const Matrix plain = ReferenceForward(m, x);

  // Identity insertions change nothing.
  Model ins = m;
  ins.lin = InitLin(4);
  ins.lhuc = InitLhuc(spec);
  const Matrix same = ReferenceForward(ins, x);
  for (size_t i = 0; i < plain.size(); ++i)
    CHECK(std::abs(plain.data()[i] - same.data()[i]) <= 1e-15);

  // A LIN that doubles the input equals a plain net with doubled inputs.
  ins.lin->a = Matrix::Identity(4);
  for (int k = 0; k < 4; ++k) ins.lin->a(k, k) = 2.0;
  Matrix x2 = x;
  for (double &v : x2.data()) v *= 2.0;
  const Matrix lin = ReferenceForward(ins, x);
  const Matrix scaled = ReferenceForward(m, x2);
  for (size_t i = 0; i < lin.size(); ++i)
    CHECK(std::abs(lin.data()[i] - scaled.data()[i]) <= 1e-15);
}

TEST_CASE("model tensors enumerate trainable parameters in a fixed order") {
  const NetworkSpec spec{3, {4, 2}, 2, Activation::kTanh};
  Model si;
  si.spec = spec;
  si.base = InitParams(spec, 1);
  Model m = PrepareModel(si, AdaptMethod::Parse("lin+lhuc"));
  auto t = ModelTensors(&m);
  std::vector<std::string> names;
  for (const auto &x : t) names.push_back(x.name);
  CHECK(names == std::vector<std::string>{"lin.a", "lin.b", "lhuc.r0", "lhuc.r1"});
  auto all = ModelTensors(&m, true);
  CHECK(all.size() == 6 + 4);
  CHECK(all[0].name == "layer0.weight");
  CHECK(all[0].values.size() == 12);
}

TEST_CASE("ten seeded fixtures pass the gradient check") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    GradCheckFixture f = MakeFixture(seed);
    CHECK(f.model.spec.NumHidden() <= 3);
    for (int d : f.model.spec.hidden_dims) CHECK(d <= 16);
    CHECK(f.model.spec.input_dim <= 16);
    CHECK(f.features.rows() <= 8);
    CHECK(f.model.lin.has_value());
    CHECK(f.model.lhuc.has_value());
    const auto report = CheckGradients(f.model, f.features, f.targets, 1e-4, 1e-5);
    INFO("seed " << seed << ": " << report.ToString());
    CHECK(report.pass);
    CHECK(report.max_rel_error <= 1e-5);
    bool saw_lin = false, saw_gate = false;
    for (const auto &t : report.tensors) {
      saw_lin = saw_lin || (t.name == "lin.a" && t.checked > 0);
      saw_gate = saw_gate || (t.name.rfind("lhuc.r", 0) == 0 && t.checked > 0);
    }
    CHECK(saw_lin);
    CHECK(saw_gate);
  }
}

TEST_CASE("gradient check flags a tolerance it cannot meet") {
  GradCheckFixture f = MakeFixture(3);
  const auto report = CheckGradients(f.model, f.features, f.targets, 1e-4, 1e-15);
  CHECK(!report.pass);
  CHECK(!report.worst.empty());
  CHECK(report.ToString().find("FAIL") != std::string::npos);
}

TEST_CASE("fixtures are deterministic") {
  GradCheckFixture a = MakeFixture(5), b = MakeFixture(5), c = MakeFixture(6);
  CHECK(BitIdentical(a.model.base, b.model.base));
  CHECK(a.features == b.features);
  CHECK(a.targets == b.targets);
  CHECK(!(a.features == c.features));
}
