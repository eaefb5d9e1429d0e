// harness/harness-test.cc

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

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "base/adaptlab-error.h"
#include "harness/harness-config.h"
#include "harness/harness-report.h"
#include "harness/harness.h"
#include "nnet/nnet-io.h"

using namespace adaptlab;

namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.roster.n_slight = 1;
  c.roster.n_medium = 1;
  c.roster.n_heavy = 1;
  c.splits = SplitSizes{20, 5, 10};
  c.si.hidden_dims = {16, 16};
  c.si.n_train = 2000;
  c.si.n_test = 500;
  c.si.schedule.max_epochs = 8;
  c.sizes = {5, 10};
  c.rho_grid = {0.25};
  c.max_epochs = 5;
  return c;
}

const Baseline &SmallBaseline() {
  static const Baseline b = TrainBaseline(SmallConfig());
  return b;
}

std::string TempDir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("adaptlab-harness-" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("config defaults and cell count") {
  ExperimentConfig c;
  c.Check();
  CHECK(c.methods.size() == 8);
  CHECK(c.NumCells() == 10 * 4 * 10 + 10 * 4 * 4 * 10);
  CHECK(c.NumCells() == EnumerateCells(c).size());
  CHECK(UsesRhoGrid("kld"));
  CHECK(UsesRhoGrid("lin+lhuc+kld"));
  CHECK(!UsesRhoGrid("rsi"));
  CHECK(!UsesRhoGrid("lin+lhuc"));
}

TEST_CASE("config parse and dump") {
  const ExperimentConfig c = ParseConfig(
      "[task]\nseed = 5\n"
      "[roster]\nheavy = 0.7, 0.9\nn_slight = 3\n"
      "[sweep]\nmethods = lin, kld\nsizes = 5,10\nrho_grid = 0.5\n"
      "lin_learning_rate = 2e-5\nbest_rho = speaker\njobs = 2\n");
  CHECK(c.task.seed == 5);
  CHECK(c.roster.heavy.lo == 0.7);
  CHECK(c.roster.heavy.hi == 0.9);
  CHECK(c.roster.n_slight == 3);
  CHECK(c.methods == std::vector<std::string>{"lin", "kld"});
  CHECK(c.sizes == std::vector<int>{5, 10});
  CHECK(c.rho_grid == std::vector<double>{0.5});
  CHECK(c.lin_learning_rate == 2e-5);
  CHECK(c.rho_selection == RhoSelection::kSpeaker);
  CHECK(c.jobs == 2);
  CHECK(c.MakeMethod("lin", 0.0).schedule.learning_rate == 2e-5);
  CHECK(c.MakeMethod("lhuc", 0.0).schedule.learning_rate == 1e-2);
  CHECK(c.MakeMethod("lin+lhuc", 0.0).schedule.learning_rate == 2e-5);

  ExperimentConfig split = ParseConfig("[sweep]\nper_group_rates = true\n");
  const AdaptMethod all = split.MakeMethod("lin+lhuc+kld", 0.25);
  CHECK(all.schedule.learning_rate == 1e-3);
  CHECK(all.schedule.lin_learning_rate == 1e-5);
  CHECK(all.schedule.lhuc_learning_rate == 1e-2);
  CHECK(ParseConfig(DumpConfig(split)).per_group_rates);
  CHECK(!c.MakeMethod("lin+lhuc", 0.0).schedule.lhuc_learning_rate);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nper_group_rates = maybe\n"), ConfigError);

  const std::string dumped = DumpConfig(c);
  const ExperimentConfig back = ParseConfig(dumped);
  CHECK(DumpConfig(back) == dumped);
  CHECK(back.SiFingerprint() == c.SiFingerprint());

  ExperimentConfig other = c;
  other.sizes = {300};
  CHECK(other.SiFingerprint() == c.SiFingerprint());
  other.si.n_train += 1;
  CHECK(other.SiFingerprint() != c.SiFingerprint());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ParseConfig("[sweep]\nsizess = 5\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[extra]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nmethods = lin, fmllr\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nsizes = 5, 400\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nrho_grid = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nmax_epochs = ten\n"), ConfigError);
  CHECK_THROWS_AS(ParseConfig("[sweep]\nlhuc_learning_rate = inf\n"), ConfigError);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/adaptlab.ini"), IoError);
  CHECK(ParseIntList(" 1, 2 ,3") == std::vector<int>{1, 2, 3});
  CHECK(ParseIntList("1 2") == std::vector<int>{1, 2});
  CHECK_THROWS_AS(ParseIntList("1,x"), ConfigError);
}

TEST_CASE("cell enumeration order and seeds") {
  ExperimentConfig c = SmallConfig();
  const auto cells = EnumerateCells(c);
  REQUIRE(cells.size() == c.NumCells());
  CHECK(cells.size() == 3 * (4 * 2 + 4 * 2));
  CHECK(cells[0].Key("S01") == "S01|lin||5");
  CHECK(cells[1].Key("S01") == "S01|lin||10");
  CHECK(cells[4].Key("S01") == "S01|kld|0.25|5");
  CHECK(cells[6].Key("S01") == "S01|rsi||5");
  CHECK(cells[16].speaker == 1);

  CHECK(CellSeed(c, "S01", 5) == CellSeed(c, "S01", 5));
  CHECK(CellSeed(c, "S01", 5) != CellSeed(c, "S02", 5));
  CHECK(CellSeed(c, "S01", 5) != CellSeed(c, "S01", 10));
  ExperimentConfig d = c;
  d.seed = 2;
  CHECK(CellSeed(c, "S01", 5) != CellSeed(d, "S01", 5));
}

TEST_CASE("baseline") {
  const Baseline &b = SmallBaseline();
  REQUIRE(b.rows.size() == 3);
  CHECK(b.si_checksum == ParamsChecksum(b.si.base));
  CHECK(b.si_test_error < 0.2);
  const auto groups = BaselineGroups(b.rows);
  REQUIRE(groups.size() == 3);
  for (const auto &g : groups) {
    CHECK(g.speakers == 1);
    for (const auto &r : b.rows)
      if (r.severity == g.severity) CHECK(g.mean_error == r.test_error);
  }
  CHECK(FormatBaselineTable(b.rows).find("S03") != std::string::npos);
}

TEST_CASE("rsi cell equals kld at rho zero") {
  ExperimentConfig c = SmallConfig();
  c.rho_grid = {0.0, 0.25};
  const Baseline &b = SmallBaseline();
  Cell rsi{0, "rsi", std::nullopt, 10};
  Cell kld{0, "kld", 0.0, 10};
  const CellRecord r = RunCell(c, b, rsi), k = RunCell(c, b, kld);
  REQUIRE(r.ok);
  REQUIRE(k.ok);
  CHECK(r.test_error == k.test_error);
  CHECK(r.cv_error == k.cv_error);
  CHECK(r.train_error == k.train_error);
  CHECK(r.epochs == k.epochs);
  CHECK(r.base_crc == k.base_crc);
}

TEST_CASE("frozen methods keep the SI checksum") {
  ExperimentConfig c = SmallConfig();
  c.patience = 0;
  const Baseline &b = SmallBaseline();
  for (const char *m : {"lin", "lhuc", "lin+lhuc", "lin+kld"}) {
    const CellRecord r = RunCell(c, b, Cell{2, m, std::nullopt, 5});
    CHECK(r.ok);
    CHECK(r.base_crc == b.si_checksum);
  }
  CHECK(RunCell(c, b, Cell{2, "kld", 0.25, 5}).base_crc != b.si_checksum);
}

TEST_CASE("sweep resume is byte identical") {
  const ExperimentConfig c = SmallConfig();
  const Baseline &b = SmallBaseline();
  const std::string full = TempDir("full"), part = TempDir("part");

  SweepOptions o;
  o.out_dir = full;
  const SweepResult a = RunSweep(c, b, o);
  REQUIRE(a.complete);
  CHECK(a.computed_cells == c.NumCells());
  for (const auto &r : a.records) CHECK(r.ok);

  o.out_dir = part;
  o.max_cells = 7;
  const SweepResult first = RunSweep(c, b, o);
  CHECK(!first.complete);
  CHECK(first.computed_cells == 7);
  CHECK(!std::filesystem::exists(part + "/results.csv"));
  {
    // A record cut short by a kill mid-write.
    std::ofstream j(part + "/journal.csv", std::ios::app);
    j << "S02,medium,lhuc,10,,ok,0.2";
  }
  o.max_cells = 0;
  o.resume = true;
  const SweepResult second = RunSweep(c, b, o);
  CHECK(second.complete);
  CHECK(second.resumed_cells == 7);
  CHECK(second.computed_cells == c.NumCells() - 7);
  CHECK(ReadTextFile(full + "/results.csv") == ReadTextFile(part + "/results.csv"));

  ExperimentConfig changed = c;
  changed.seed = 9;
  CHECK_THROWS_AS(RunSweep(changed, b, o), ConfigError);

  const auto parsed = ParseResultsCsv(full + "/results.csv");
  REQUIRE(parsed.size() == a.records.size());
  for (size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == a.records[i]);
  CHECK(FormatResultsCsv(parsed) == ReadTextFile(full + "/results.csv"));
  std::filesystem::remove_all(full);
  std::filesystem::remove_all(part);
}

TEST_CASE("a failing cell does not stop the sweep") {
  ExperimentConfig c = SmallConfig();
  c.methods = {"lin", "lhuc"};
  // Leave S02 with only 7 adaptation blocks so its size-10 cells throw.
  Baseline b = SmallBaseline();
  b.splits[1].adapt_pool = b.splits[1].adapt_pool.Slice(0, 70);
  const SweepResult res = RunSweep(c, b);
  CHECK(res.complete);
  int failed = 0;
  for (const auto &r : res.records) {
    const bool broken = r.speaker_id == "S02" && r.size == 10;
    CHECK(r.ok == !broken);
    if (!r.ok) {
      CHECK(!r.failure.empty());
      CHECK(r.failure.find(',') == std::string::npos);
      CHECK(r.failure.find('\n') == std::string::npos);
      ++failed;
    }
  }
  CHECK(failed == 2);
  const auto groups = GroupReport(res.records);
  for (const auto &g : groups) {
    const bool broken = g.severity == b.rows[1].severity && g.size == 10;
    CHECK(g.failed == (broken ? 1 : 0));
    CHECK(g.speakers == (broken ? 0 : 1));
  }
  CHECK(FormatResultsCsv(res.records).find(",failed,") != std::string::npos);
}

TEST_CASE("journal tolerates a torn last line") {
  CellRecord r;
  r.speaker_id = "S01";
  r.method = "kld";
  r.rho = 0.125;
  r.size = 5;
  r.ok = true;
  r.test_error = 0.1;
  r.wall_time = 1.5;
  const std::string line = FormatRecord(r, true);
  const std::string text = std::string(kResultsHeader) + ",wall_time\n" + line +
                           "\n" + line.substr(0, line.size() / 2);
  const auto parsed = ParseResultsCsvText(text, true);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == r);
  CHECK(parsed[0].wall_time == 1.5);
  CHECK(std::string(kResultsHeader).find("wall_time") == std::string::npos);
  CHECK(FormatRecord(r, false).find("1.5") == std::string::npos);
}

TEST_CASE("reports") {
  const Baseline &b = SmallBaseline();
  ExperimentConfig c = SmallConfig();
  c.rho_grid = {0.125, 0.25};
  const SweepResult res = RunSweep(c, b);
  REQUIRE(res.complete);

  const auto collapsed = SelectBestRho(res.records, RhoSelection::kGlobal);
  std::set<std::string> methods;
  for (const auto &r : collapsed) methods.insert(r.method);
  CHECK(methods.size() == 8);
  CHECK(collapsed.size() == 3 * 8 * 2);

  const auto summary = MethodSeries(collapsed);
  std::set<std::string> series;
  for (const auto &p : summary) series.insert(p.series);
  CHECK(series.size() == 8);
  CHECK(summary.size() == 8 * 2);

  const auto rho = RhoSeries(res.records);
  std::set<std::string> rho_series;
  for (const auto &p : rho) rho_series.insert(p.series);
  CHECK(rho_series.count("rsi"));
  CHECK(rho_series.size() == 3);

  const auto groups = GroupReport(res.records);
  for (const auto &g : groups) CHECK(g.speakers == 1);
  CHECK(FormatPlot(summary).rfind(std::string(kPlotHeader) + "\n", 0) == 0);

  const std::string dir = TempDir("plot");
  const auto written = EmitPlotData(res.records, RhoSelection::kGlobal, dir);
  CHECK(written.size() == 6);
  for (const auto &p : written) CHECK(std::filesystem::exists(p));
  std::filesystem::remove_all(dir);

  // A roster without heavy speakers still produces an (empty) heavy plot.
  std::vector<CellRecord> no_heavy;
  for (const auto &r : res.records)
    if (r.severity != Severity::kHeavy) no_heavy.push_back(r);
  EmitPlotData(no_heavy, RhoSelection::kGlobal, dir);
  CHECK(ReadTextFile(dir + "/accent_heavy.csv") == std::string(kPlotHeader) + "\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("parameter counts") {
  const ExperimentConfig c;
  const auto rows = ParamCountReport(c.methods, c.si.Spec(c.task));
  auto adapted = [&rows](const std::string &m) {
    for (const auto &r : rows)
      if (r.method == m) return r.adapted;
    FAIL("missing " << m);
    return size_t{0};
  };
  CHECK(adapted("lhuc") == 256);
  CHECK(adapted("lin") == 420);
  CHECK(adapted("lhuc") < adapted("lin"));
  CHECK(adapted("lin") < adapted("kld"));
  CHECK(adapted("kld") == adapted("rsi"));
  CHECK(FormatParamCounts(rows).find("lin+lhuc") != std::string::npos);
}
