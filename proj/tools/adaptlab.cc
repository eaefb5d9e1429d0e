// tools/adaptlab.cc

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


// Command-line front end: SI training, roster inspection, single-cell
// adaptation, the full sweep and its reports.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "adapt/adapt-io.h"
#include "adapt/adapt.h"
#include "base/adaptlab-error.h"
#include "harness/harness-config.h"
#include "harness/harness-report.h"
#include "harness/harness.h"
#include "nnet/nnet-io.h"
#include "oracle/oracle.h"
#include "synth/synth-io.h"

namespace fs = std::filesystem;
using namespace adaptlab;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void OnSignal(int) { g_stop = true; }

struct GlobalOptions {
  std::string config;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::string methods;
  std::string rho;
  std::string sizes;
  bool resume = false;
};

std::string OutDir(const GlobalOptions &g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char *env = std::getenv("ADAPTLAB_OUT"); env && *env) return env;
  return "adaptlab-out";
}

ExperimentConfig BuildConfig(const GlobalOptions &g, bool prefer_saved = false) {
  ExperimentConfig c;
  const fs::path saved = fs::path(OutDir(g)) / "sweep.ini";
  if (!g.config.empty()) {
    c = LoadConfig(g.config);
  } else if (prefer_saved && fs::exists(saved)) {
    c = LoadConfig(saved.string());
  }
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  if (!g.methods.empty()) c.methods = ParseNameList(g.methods);
  if (!g.rho.empty()) c.rho_grid = ParseDoubleList(g.rho);
  if (!g.sizes.empty()) c.sizes = ParseIntList(g.sizes);
  c.Check();
  return c;
}

std::string Percent(double e) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%6.2f%%", 100.0 * e);
  return buf;
}

// Loads the cached SI network from the output directory when its
// fingerprint matches the config, otherwise trains and caches it.
Baseline GetBaseline(const ExperimentConfig &config, const std::string &out_dir,
                     bool force_train) {
  fs::create_directories(out_dir);
  const std::string si_path = (fs::path(out_dir) / "si.adlb").string();
  const std::string key_path = (fs::path(out_dir) / "si.fingerprint").string();
  const std::string key = std::to_string(config.SiFingerprint()) + "\n";
  if (!force_train && fs::exists(si_path) && fs::exists(key_path) &&
      ReadTextFile(key_path) == key) {
    std::cerr << "adaptlab: using SI network " << si_path << "\n";
    return MakeBaseline(config, LoadParams(si_path));
  }
  std::cerr << "adaptlab: training SI network ("
            << config.si.n_train << " frames)\n";
  Baseline b = TrainBaseline(config);
  SaveParams(b.si, si_path);
  WriteTextFile(key_path, key);
  std::cerr << "adaptlab: SI test error " << Percent(b.si_test_error)
            << " after " << b.si_trace.trace.back().epoch << " epochs\n";
  WriteTextFile((fs::path(out_dir) / "baseline.csv").string(),
                FormatBaselineTable(b.rows));
  return b;
}

void PrintBaseline(const Baseline &b) {
  std::printf("%-8s %-7s %9s %11s %9s\n", "speaker", "accent", "magnitude",
              "distortion", "test_err");
  for (const auto &r : b.rows) {
    std::printf("%-8s %-7s %9.3f %11.3f %9s\n", r.speaker_id.c_str(),
                std::string(SeverityName(r.severity)).c_str(), r.magnitude,
                r.distortion, Percent(r.test_error).c_str());
  }
  for (const auto &g : BaselineGroups(b.rows)) {
    std::printf("group %-7s mean %s over %d speakers\n",
                std::string(SeverityName(g.severity)).c_str(),
                Percent(g.mean_error).c_str(), g.speakers);
  }
}

int CmdTrainSi(const GlobalOptions &g) {
  const ExperimentConfig config = BuildConfig(g);
  Baseline b = GetBaseline(config, OutDir(g), true);
  PrintBaseline(b);
  return 0;
}

int CmdRoster(const GlobalOptions &g, bool export_data) {
  const ExperimentConfig config = BuildConfig(g);
  const auto roster = MakeSpeakers(config.task, config.roster);
  std::string csv = "speaker_id,severity,magnitude,distortion,noise_std\n";
  std::printf("%-8s %-7s %9s %11s %9s\n", "speaker", "accent", "magnitude",
              "distortion", "noise");
  for (const auto &p : roster) {
    const std::string sev(SeverityName(p.severity));
    std::printf("%-8s %-7s %9.3f %11.3f %9.3f\n", p.speaker_id.c_str(),
                sev.c_str(), p.magnitude, p.DistortionMagnitude(), p.noise_std);
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%.17g\n",
                  p.speaker_id.c_str(), sev.c_str(), p.magnitude,
                  p.DistortionMagnitude(), p.noise_std);
    csv += line;
  }
  const fs::path out = OutDir(g);
  fs::create_directories(out);
  WriteTextFile((out / "roster.csv").string(), csv);
  if (export_data) {
    const fs::path dir = out / "data";
    fs::create_directories(dir);
    const ClassGeometry geometry = MakeGeometry(config.task);
    for (const auto &p : roster) {
      const SpeakerSplits s = SplitSpeaker(p, config.task, geometry, config.splits);
      for (auto [name, data] : {std::pair{"adapt", &s.adapt_pool},
                                std::pair{"cv", &s.cv}, std::pair{"test", &s.test}}) {
        const std::string stem = (dir / (p.speaker_id + "-" + name)).string();
        SaveDataset(*data, stem + ".adlb");
        ExportCsv(*data, stem + ".csv");
      }
    }
    std::cerr << "adaptlab: wrote speaker data to " << dir.string() << "\n";
  }
  return 0;
}

int CmdAdapt(const GlobalOptions &g, const std::string &speaker,
             const std::string &method, int size) {
  double rho = 0.25;
  if (!g.rho.empty()) {
    const auto v = ParseDoubleList(g.rho);
    if (v.size() != 1) throw ConfigError("adapt takes a single --rho value");
    rho = v[0];
  }
  ExperimentConfig config = BuildConfig(g);
  const std::string out_dir = OutDir(g);
  Baseline b = GetBaseline(config, out_dir, false);
  size_t idx = b.roster.size();
  for (size_t i = 0; i < b.roster.size(); ++i)
    if (b.roster[i].speaker_id == speaker) idx = i;
  if (idx == b.roster.size()) throw ConfigError("unknown speaker '" + speaker + "'");
  if (size <= 0 || size > config.splits.adapt_blocks)
    throw ConfigError("size " + std::to_string(size) + " outside the adaptation pool");

  AdaptMethod m = config.MakeMethod(method, rho);
  m.schedule.seed = CellSeed(config, speaker, size);
  const SpeakerSplits &s = b.splits[idx];
  const Dataset subset = s.AdaptSubset(size);
  AdaptResult r = Adapt(b.si, m, subset, s.cv);

  const fs::path dir = fs::path(out_dir) / "speakers";
  fs::create_directories(dir);
  std::string name = speaker + "-" + m.Name() + "-" + std::to_string(size);
  if (m.kld && !m.is_rsi()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-rho%g", m.kld->rho);
    name += buf;
  }
  const std::string path = (dir / (name + ".adlb")).string();
  SaveSpeakerModel(r.speaker, b.si.spec, path);

  std::printf("speaker %s  method %s  size %d  lr %g\n", speaker.c_str(),
              m.Name().c_str(), size, m.schedule.learning_rate);
  std::printf("baseline test error %s\n", Percent(b.rows[idx].test_error).c_str());
  std::printf("adapted  test error %s  cv %s  train %s  (best epoch %d of %d)\n",
              Percent(ErrorRate(r.model, s.test)).c_str(),
              Percent(ErrorRate(r.model, s.cv)).c_str(),
              Percent(ErrorRate(r.model, subset)).c_str(), r.trace.best_epoch,
              r.trace.trace.back().epoch);
  std::printf("adapted parameters %zu, artifact %s\n", r.speaker.NumParams(),
              path.c_str());
  return 0;
}

int WriteReports(const ExperimentConfig &config,
                 const std::vector<CellRecord> &records, const fs::path &out) {
  WriteTextFile((out / "groups.csv").string(),
                FormatGroupReport(GroupReport(records)));
  const auto params = ParamCountReport(config.methods, config.si.Spec(config.task));
  WriteTextFile((out / "param_counts.csv").string(), FormatParamCounts(params));
  const auto plots = EmitPlotData(records, config.rho_selection, (out / "plot").string());

  std::printf("%-14s %10s %10s\n", "method", "adapted", "total");
  for (const auto &p : params)
    std::printf("%-14s %10zu %10zu\n", p.method.c_str(), p.adapted, p.total);

  const auto best = SelectBestRho(records, config.rho_selection);
  const auto points = MethodSeries(best);
  std::printf("\nmean test error over all speakers (rho by %s CV)\n",
              std::string(RhoSelectionName(config.rho_selection)).c_str());
  std::printf("%-14s", "method");
  for (int s : config.sizes) std::printf(" %7d", s);
  std::printf("\n");
  for (const auto &m : config.methods) {
    std::printf("%-14s", m.c_str());
    for (int s : config.sizes) {
      auto it = std::find_if(points.begin(), points.end(), [&](const PlotPoint &p) {
        return p.series == m && p.size == s;
      });
      if (it == points.end()) {
        std::printf(" %7s", "-");
      } else {
        std::printf(" %6.2f%%", 100.0 * it->mean_error);
      }
    }
    std::printf("\n");
  }
  size_t failed = 0;
  for (const auto &r : records) failed += !r.ok;
  if (failed) std::printf("\n%zu cells failed; see results.csv\n", failed);
  std::cerr << "adaptlab: wrote " << plots.size() << " plot files to "
            << (out / "plot").string() << "\n";
  return 0;
}

int CmdSweep(const GlobalOptions &g, size_t max_cells) {
  const ExperimentConfig config = BuildConfig(g, g.resume);
  const std::string out_dir = OutDir(g);
  Baseline b = GetBaseline(config, out_dir, false);

  SweepOptions opt;
  opt.out_dir = out_dir;
  opt.resume = g.resume;
  opt.max_cells = max_cells;
  opt.stop = &g_stop;
  opt.progress = [](const CellRecord &r, size_t done, size_t total) {
    std::fprintf(stderr, "[%zu/%zu] %s %s%s size %d: %s\n", done, total,
                 r.speaker_id.c_str(), r.method.c_str(),
                 r.rho ? (" rho " + std::to_string(*r.rho)).c_str() : "", r.size,
                 r.ok ? Percent(r.test_error).c_str() : r.failure.c_str());
  };
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  SweepResult res = RunSweep(config, b, opt);
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  std::cerr << "adaptlab: " << res.computed_cells << " cells computed, "
            << res.resumed_cells << " resumed, " << res.total_cells << " total\n";
  if (!res.complete) {
    std::cerr << "adaptlab: sweep incomplete; rerun with --resume to finish\n";
    return 2;
  }
  return WriteReports(config, res.records, out_dir);
}

int CmdReport(const GlobalOptions &g) {
  const ExperimentConfig config = BuildConfig(g, true);
  const fs::path out = OutDir(g);
  const auto records = ParseResultsCsv((out / "results.csv").string());
  if (records.empty()) throw FormatError("results.csv holds no records");
  return WriteReports(config, records, out);
}

int CmdGradCheck(uint64_t seed, int count, double eps, double tol) {
  bool all = true;
  for (int i = 0; i < count; ++i) {
    oracle::GradCheckFixture f = oracle::MakeFixture(seed + i);
    const auto report =
        oracle::CheckGradients(f.model, f.features, f.targets, eps, tol);
    std::printf("fixture %llu: %s\n", static_cast<unsigned long long>(seed + i),
                report.ToString().c_str());
    all = all && report.pass;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speaker adaptation experiments on a synthetic accent task"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "output directory (default $ADAPTLAB_OUT)");
  app.add_option("--seed", g.seed, "sweep seed");
  app.add_option("--jobs", g.jobs, "parallel cells")->check(CLI::PositiveNumber);
  app.add_option("--methods", g.methods, "comma-separated method list");
  app.add_option("--rho", g.rho, "comma-separated rho grid");
  app.add_option("--sizes", g.sizes, "comma-separated adaptation sizes");
  app.add_flag("--resume", g.resume, "continue a sweep from its journal");

  auto *train_si = app.add_subcommand("train-si", "train the SI network and print the baseline table");

  auto *roster = app.add_subcommand("roster", "print the speaker roster");
  bool export_data = false;
  roster->add_flag("--export", export_data, "write per-speaker splits as .adlb and .csv");

  auto *adapt = app.add_subcommand("adapt", "adapt one speaker and save the artifact");
  std::string speaker, method = "kld";
  int size = 100;
  adapt->add_option("--speaker", speaker, "speaker id, e.g. S05")->required();
  adapt->add_option("--method", method, "adaptation method");
  adapt->add_option("--size", size, "adaptation blocks");

  auto *sweep = app.add_subcommand("sweep", "run every configured cell");
  size_t max_cells = 0;
  sweep->add_option("--max-cells", max_cells, "stop after this many new cells");

  auto *report = app.add_subcommand("report", "aggregate results.csv");

  auto *oracle_cmd = app.add_subcommand("oracle", "independent verification tools");
  oracle_cmd->require_subcommand(1);
  auto *gradcheck = oracle_cmd->add_subcommand("gradcheck", "finite-difference gradient check");
  uint64_t gc_seed = 1;
  int gc_count = 10;
  double gc_eps = 1e-4, gc_tol = 1e-5;
  gradcheck->add_option("--seed", gc_seed, "first fixture seed");
  gradcheck->add_option("--count", gc_count, "number of fixtures")->check(CLI::PositiveNumber);
  gradcheck->add_option("--eps", gc_eps, "finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "relative error tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_si) return CmdTrainSi(g);
    if (*roster) return CmdRoster(g, export_data);
    if (*adapt) return CmdAdapt(g, speaker, method, size);
    if (*sweep) return CmdSweep(g, max_cells);
    if (*report) return CmdReport(g);
    if (*gradcheck) return CmdGradCheck(gc_seed, gc_count, gc_eps, gc_tol);
  } catch (const ConfigError &e) {
    std::cerr << "adaptlab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "adaptlab: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
