// tests/acceptance.cc

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


// Acceptance run: trains the default SI network, runs the default sweep
// three times and prints one [PASS]/[FAIL] line per criterion. Exits
// non-zero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adapt/adapt.h"
#include "base/rng.h"
#include "harness/harness-config.h"
#include "harness/harness-report.h"
#include "harness/harness.h"
#include "nnet/nnet-compute.h"
#include "nnet/nnet-io.h"
#include "oracle/oracle.h"

using namespace adaptlab;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char *format, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, format);
  std::vsnprintf(buf, sizeof(buf), format, ap);
  va_end(ap);
  return buf;
}

int g_failed = 0;

void Report(int id, const std::string &name, bool pass, const std::string &detail) {
  if (!pass) ++g_failed;
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

void Note(const std::string &text) {
  std::fprintf(stderr, "  %s\n", text.c_str());
  std::fflush(stderr);
}

bool SameParams(const NetworkParams &a, const NetworkParams &b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t l = 0; l < a.layers.size(); ++l)
    if (!(a.layers[l].weight == b.layers[l].weight) ||
        a.layers[l].bias != b.layers[l].bias)
      return false;
  return true;
}

// Test-error group means of the rho-collapsed records, keyed by
// (severity, method, size).
using GroupKey = std::tuple<Severity, std::string, int>;
std::map<GroupKey, double> GroupMeans(const std::vector<CellRecord> &records,
                                      RhoSelection mode) {
  std::map<GroupKey, double> out;
  for (const GroupRow &g : GroupReport(SelectBestRho(records, mode)))
    if (g.speakers > 0) out[{g.severity, g.method, g.size}] = g.mean_error;
  return out;
}

void IdentityNoOp(const Baseline &base) {
  const auto t0 = Clock::now();
  const Matrix x = base.splits[0].adapt_pool.Slice(0, 1000).features;
  const Matrix ref = Forward(base.si, x);
  double worst = 0.0;
  const Model lin = InsertLin(base.si), lhuc = InsertLhuc(base.si);
  for (const Model *m : {&lin, &lhuc}) {
    const Matrix p = Forward(*m, x);
    for (size_t i = 0; i < p.size(); ++i)
      worst = std::max(worst, std::abs(p.data()[i] - ref.data()[i]));
  }
  const Matrix both = Forward(InsertLhuc(lin), x);
  for (size_t i = 0; i < both.size(); ++i)
    worst = std::max(worst, std::abs(both.data()[i] - ref.data()[i]));
  const double secs = Seconds(t0);
  Report(1, "identity no-op of freshly inserted LIN/LHUC",
         worst <= 1e-12 && secs < 1.0,
         Fmt("1000 samples, max |dp| = %.3g, %.3f s", worst, secs));
}

void GradientSuite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int passed = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const oracle::GradCheckFixture f = oracle::MakeFixture(seed);
    const oracle::GradCheckReport r =
        oracle::CheckGradients(f.model, f.features, f.targets, 1e-4, 1e-5);
    if (r.pass) ++passed;
    else Note("fixture " + std::to_string(seed) + ": " + r.ToString());
    worst = std::max(worst, r.max_rel_error);
  }
  const double secs = Seconds(t0);
  Report(2, "finite-difference gradient suite", passed == 10 && secs < 30.0,
         Fmt("%d/10 fixtures, worst rel err %.3g, %.2f s", passed, worst, secs));
}

void RsiEqualsKld(const ExperimentConfig &config, const Baseline &base) {
  const auto t0 = Clock::now();
  // A heavy speaker at a mid size, trained three ways from the same seed:
  // RSI, KLD with rho = 0, and KLD with rho = 0 through explicit blended targets.
  size_t speaker = 0;
  while (base.roster[speaker].severity != Severity::kHeavy) ++speaker;
  const SpeakerSplits &sp = base.splits[speaker];
  const Dataset train = sp.AdaptSubset(100);
  AdaptMethod rsi = config.MakeMethod("rsi", 0.0);
  AdaptMethod kld = config.MakeMethod("kld", 0.0);
  rsi.schedule.seed = kld.schedule.seed = 17;

  const AdaptResult a = Adapt(base.si, rsi, train, sp.cv);
  const AdaptResult b = Adapt(base.si, kld, train, sp.cv);
  Model blended = PrepareModel(base.si, kld);
  const Matrix cached = CacheSiPosteriors(base.si, train);
  const TrainResult c = Train(&blended, train, sp.cv, kld.schedule,
                              [&cached](const Dataset &d) {
                                return BlendTargets(d.labels, cached, 0.0);
                              });

  bool same = a.trace.trace.size() == b.trace.trace.size() &&
              a.trace.trace.size() == c.trace.size();
  for (size_t e = 0; same && e < a.trace.trace.size(); ++e) {
    const EpochStats &x = a.trace.trace[e], &y = b.trace.trace[e], &z = c.trace[e];
    same = x.train_loss == y.train_loss && x.cv_loss == y.cv_loss &&
           x.train_loss == z.train_loss && x.cv_loss == z.cv_loss;
  }
  same = same && SameParams(a.model.base, b.model.base) &&
         SameParams(a.model.base, blended.base);
  const double secs = Seconds(t0);
  Report(3, "RSI and KLD(rho=0) are bit-identical", same && secs < 60.0,
         Fmt("%zu epochs compared, final crc %08x, %.2f s", a.trace.trace.size(),
             ParamsChecksum(a.model.base), secs));
}

void FreezeSoundness(const std::vector<CellRecord> &records, uint32_t checkpoint_crc,
                     uint32_t file_crc_after) {
  size_t checked = 0, bad = 0;
  for (const CellRecord &r : records) {
    if (r.method == "kld" || r.method == "rsi") continue;
    ++checked;
    if (!r.ok || r.base_crc != checkpoint_crc) {
      ++bad;
      if (bad <= 5) Note("SI tensors changed in " + r.Key());
    }
  }
  Report(4, "freeze soundness of SI tensors",
         checked > 0 && bad == 0 && file_crc_after == checkpoint_crc,
         Fmt("%zu frozen-base cells, %zu mismatches, checkpoint crc %08x", checked,
             bad, checkpoint_crc));
}

void BlendCorrectness() {
  Rng rng(20260415);
  const int classes = 10;
  double worst_sum = 0.0;
  bool endpoints = true;
  Matrix si(1, classes);
  for (int t = 0; t < 100000; ++t) {
    Vector logits(classes);
    for (double &v : logits) v = 4.0 * rng.Normal();
    const Vector p = Softmax(logits);
    std::copy(p.begin(), p.end(), si.data().begin());
    const int label[1] = {static_cast<int>(rng.UniformInt(classes))};
    const double rho = rng.Uniform();
    const Matrix q = BlendTargets(label, si, rho);
    double s = 0.0;
    for (double v : q.Row(0)) s += v;
    double ps = 0.0;
    for (double v : p) ps += v;
    // Measured against the sum of the SI row itself, which is 1 up to
    // softmax rounding.
    worst_sum = std::max({worst_sum, std::abs(s - 1.0), std::abs(ps - 1.0)});

    const Matrix q0 = BlendTargets(label, si, 0.0);
    const Matrix q1 = BlendTargets(label, si, 1.0);
    for (int y = 0; y < classes; ++y) {
      endpoints = endpoints && q0(0, y) == (y == label[0] ? 1.0 : 0.0) &&
                  q1(0, y) == p[y];
    }
  }
  Report(5, "blend correctness on 1e5 random triples",
         worst_sum <= 1e-12 && endpoints,
         Fmt("max |row sum - 1| = %.3g, endpoints %s", worst_sum,
             endpoints ? "exact" : "inexact"));
}

void SeverityOrdering(const Baseline &base, double secs) {
  double mean[3] = {0, 0, 0};
  int n[3] = {0, 0, 0};
  for (const auto &g : BaselineGroups(base.rows)) {
    mean[static_cast<int>(g.severity)] = g.mean_error;
    n[static_cast<int>(g.severity)] = g.speakers;
  }
  const bool pass = n[0] > 0 && n[1] > 0 && n[2] > 0 &&
                    mean[1] - mean[0] >= 0.02 && mean[2] - mean[1] >= 0.02 &&
                    secs < 300.0;
  Report(6, "unadapted severity ordering", pass,
         Fmt("slight %.2f%% medium %.2f%% heavy %.2f%%, SI training + baseline "
             "%.1f s",
             100 * mean[0], 100 * mean[1], 100 * mean[2], secs));
}

void AdaptationHelps(const std::vector<CellRecord> &records, const Baseline &base,
                     const ExperimentConfig &config) {
  double baseline[3] = {0, 0, 0};
  for (const auto &g : BaselineGroups(base.rows))
    baseline[static_cast<int>(g.severity)] = g.mean_error;
  const auto means = GroupMeans(records, config.rho_selection);
  int checked = 0, bad = 0;
  double worst = -1.0;
  for (Severity s : {Severity::kMedium, Severity::kHeavy}) {
    for (const std::string &m : config.methods) {
      auto it = means.find({s, m, 300});
      if (it == means.end()) {
        ++bad;
        Note("missing group " + m + " at 300");
        continue;
      }
      ++checked;
      const double margin = it->second - baseline[static_cast<int>(s)];
      worst = std::max(worst, margin);
      if (margin > 0.0) {
        ++bad;
        Note(Fmt("%s %s at 300: %.4f > baseline %.4f",
                 std::string(SeverityName(s)).c_str(), m.c_str(), it->second,
                 baseline[static_cast<int>(s)]));
      }
    }
  }
  Report(7, "adaptation at size 300 never hurts medium/heavy", bad == 0 && checked > 0,
         Fmt("%d groups, worst (adapted - baseline) = %+.4f", checked, worst));
}

void KldStability(const ExperimentConfig &config, const Baseline &base) {
  const auto t0 = Clock::now();
  ExperimentConfig c = config;
  c.methods = {"rsi", "kld"};
  c.rho_grid = {0.25};
  c.sizes.clear();
  for (int s : config.sizes)
    if (s <= 10) c.sizes.push_back(s);
  c.max_epochs = 500;
  c.patience = 0;
  const SweepResult res = RunSweep(c, base);

  std::map<std::pair<std::string, int>, const CellRecord *> rsi, kld;
  for (const CellRecord &r : res.records) {
    if (!r.ok) continue;
    (r.method == "rsi" ? rsi : kld)[{r.speaker_id, r.size}] = &r;
  }
  int found = 0, test_worse = 0, train_lower = 0;
  std::string example;
  for (const auto &[key, r] : rsi) {
    auto it = kld.find(key);
    if (it == kld.end()) continue;
    const CellRecord *k = it->second;
    const bool worse = r->test_error > k->test_error;
    const bool lower = r->train_error < k->train_error;
    test_worse += worse;
    train_lower += lower;
    if (worse && lower) {
      if (!found)
        example = Fmt("%s size %d: test %.3f vs %.3f, train %.3f vs %.3f",
                      key.first.c_str(), key.second, r->test_error, k->test_error,
                      r->train_error, k->train_error);
      ++found;
    }
    Note(Fmt("%s size %3d  rsi test %.3f train %.3f | kld(0.25) test %.3f "
             "train %.3f",
             key.first.c_str(), key.second, r->test_error, r->train_error,
             k->test_error, k->train_error));
  }
  const double secs = Seconds(t0);
  if (!found)
    example = Fmt("no cell; rsi test worse in %d/%zu, rsi train lower in %d/%zu",
                  test_worse, rsi.size(), train_lower, rsi.size());
  Report(8, "RSI over-fits where KLD(rho=0.25) does not (500 epochs, no early stop)",
         found > 0, example + Fmt(", %.1f s", secs));
}

void HeavyOrdering(const std::vector<CellRecord> &records,
                   const ExperimentConfig &config) {
  const auto means = GroupMeans(records, config.rho_selection);
  int checked = 0, bad = 0;
  std::string violations;
  for (int size : config.sizes) {
    if (size < 100) continue;
    auto get = [&](const char *m) {
      auto it = means.find({Severity::kHeavy, m, size});
      return it == means.end() ? NAN : it->second;
    };
    const double kld = get("kld"), lhuc = get("lhuc"), lin = get("lin");
    ++checked;
    const bool ok = kld < lhuc && lhuc < lin;
    if (!ok) ++bad;
    Note(Fmt("heavy size %3d: kld %.4f lhuc %.4f lin %.4f%s", size, kld, lhuc, lin,
             ok ? "" : "  <- violated"));
    if (!ok) violations += Fmt("; size %d: kld %.4f lhuc %.4f lin %.4f", size, kld,
                               lhuc, lin);
  }
  Report(9, "heavy group ordering KLD < LHUC < LIN at sizes >= 100",
         checked > 0 && bad == 0,
         Fmt("%d sizes, %d violations", checked, bad) + violations);

  // The fixed-rho variant of the same ordering, without CV selection.
  std::map<std::pair<std::string, int>, double> fixed;
  for (const GroupRow &g : GroupReport(records))
    if (g.severity == Severity::kHeavy && g.speakers > 0 &&
        (g.method == "lin" || (g.method == "kld" && g.rho == 0.25)))
      fixed[{g.method, g.size}] = g.mean_error;
  int fixed_bad = 0, fixed_checked = 0;
  for (int size : config.sizes) {
    if (size < 100) continue;
    auto k = fixed.find({"kld", size}), l = fixed.find({"lin", size});
    ++fixed_checked;
    if (k == fixed.end() || l == fixed.end() || !(k->second < l->second)) ++fixed_bad;
  }
  const bool ok = fixed_checked > 0 && fixed_bad == 0;
  if (!ok) ++g_failed;
  std::printf("[%s] heavy group KLD(rho=0.25) < LIN at sizes >= 100 (%d sizes, %d "
              "violations)\n",
              ok ? "PASS" : "FAIL", fixed_checked, fixed_bad);
}

void ParamCounts(const ExperimentConfig &config) {
  // Combinations that include kld train only their inserted parameters, so
  // lhuc+kld ties lhuc and lin+kld ties lin. The ordering is over counts:
  // LHUC's is the smallest of all methods, LIN's the next one up.
  const auto rows = ParamCountReport(config.methods, config.si.Spec(config.task));
  std::map<std::string, size_t> adapted;
  std::vector<size_t> counts;
  for (const auto &r : rows) {
    adapted[r.method] = r.adapted;
    counts.push_back(r.adapted);
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  const bool have = adapted.count("lhuc") && adapted.count("lin") && adapted.count("kld");
  const bool pass = have && counts.size() >= 2 && adapted["lhuc"] == counts[0] &&
                    adapted["lin"] == counts[1] && adapted["lin"] < adapted["kld"];
  std::string order;
  for (size_t c : counts) {
    std::string names;
    for (const auto &r : rows)
      if (r.adapted == c) names += (names.empty() ? "" : "=") + r.method;
    order += (order.empty() ? "" : " < ") + names + " " + std::to_string(c);
  }
  Report(10, "parameter-count ordering", pass, order);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app("adaptlab acceptance run");
  std::string work_dir = "acceptance-work";
  int jobs = 1;
  app.add_option("--work-dir", work_dir, "scratch directory for sweep outputs");
  app.add_option("--jobs", jobs, "sweep worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  ExperimentConfig config;
  config.jobs = jobs;
  config.Check();

  GradientSuite();
  BlendCorrectness();
  ParamCounts(config);

  const auto t_base = Clock::now();
  Note("training the SI network");
  const Baseline base = TrainBaseline(config);
  SeverityOrdering(base, Seconds(t_base));
  std::printf("[%s] SI held-out error %.2f%% (must be <= 5%%)\n",
              base.si_test_error <= 0.05 ? "PASS" : "FAIL", 100 * base.si_test_error);
  if (base.si_test_error > 0.05) ++g_failed;

  const std::string checkpoint = work_dir + "/si.adlb";
  SaveParams(base.si, checkpoint);
  const uint32_t checkpoint_crc = ParamsChecksum(LoadParams(checkpoint).base);

  IdentityNoOp(base);
  RsiEqualsKld(config, base);

  // Run A: the reference sweep used for criteria 4, 7, 9 and 11.
  Note("sweep A");
  const auto t_sweep = Clock::now();
  SweepOptions opt;
  opt.out_dir = work_dir + "/a";
  const SweepResult a = RunSweep(config, base, opt);
  const double sweep_secs = Seconds(t_sweep);
  size_t failed_cells = 0;
  for (const auto &r : a.records) failed_cells += !r.ok;
  Note(Fmt("sweep A: %zu cells, %zu failed, %.0f s", a.records.size(), failed_cells,
           sweep_secs));

  FreezeSoundness(a.records, checkpoint_crc,
                  ParamsChecksum(LoadParams(checkpoint).base));
  AdaptationHelps(a.records, base, config);
  KldStability(config, base);
  HeavyOrdering(a.records, config);

  // Run B: a second clean run. Run C: interrupted a third of the way in,
  // with a torn journal line appended, then resumed.
  Note("sweep B");
  opt.out_dir = work_dir + "/b";
  const SweepResult b = RunSweep(config, base, opt);

  Note("sweep C (interrupted)");
  std::atomic<bool> stop{false};
  const size_t interrupt_at = config.NumCells() / 3;
  opt.out_dir = work_dir + "/c";
  opt.stop = &stop;
  opt.progress = [&stop, interrupt_at](const CellRecord &, size_t done, size_t) {
    if (done >= interrupt_at) stop = true;
  };
  const SweepResult c1 = RunSweep(config, base, opt);
  {
    std::FILE *f = std::fopen((opt.out_dir + "/journal.csv").c_str(), "a");
    if (f) {
      std::fputs("S99,heavy,lin,5,,ok,0.1", f);
      std::fclose(f);
    }
  }
  Note("sweep C (resumed)");
  opt.stop = nullptr;
  opt.progress = nullptr;
  opt.resume = true;
  const SweepResult c2 = RunSweep(config, base, opt);

  const std::string ra = ReadTextFile(work_dir + "/a/results.csv");
  const bool same_b = b.complete && ReadTextFile(work_dir + "/b/results.csv") == ra;
  const bool same_c = !c1.complete && c2.complete && c2.resumed_cells > 0 &&
                      ReadTextFile(work_dir + "/c/results.csv") == ra;
  Report(11, "determinism and resumability of the full sweep",
         a.complete && same_b && same_c && sweep_secs < 1800.0,
         Fmt("run B %s, interrupted at %zu/%zu and resumed %s, full sweep %.0f s",
             same_b ? "identical" : "DIFFERS", c2.resumed_cells, c2.total_cells,
             same_c ? "identical" : "DIFFERS", sweep_secs));

  std::printf("%s: %d failing\n", g_failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED",
              g_failed);
  return g_failed ? 1 : 0;
}
