// harness/harness.cc

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


#include "harness/harness.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "adapt/adapt.h"
#include "base/adaptlab-error.h"
#include "base/rng.h"
#include "harness/harness-report.h"
#include "nnet/nnet-io.h"

namespace adaptlab {

namespace fs = std::filesystem;

Baseline TrainBaseline(const ExperimentConfig &config) {
  config.Check();
  const NetworkSpec spec = config.si.Spec(config.task);
  // The held-out SI data is split in two: early stopping looks at the first
  // half, the reported SI error at the second.
  auto [train, held_out] =
      GenerateSiCorpus(config.task, config.si.n_train, 2 * config.si.n_test);
  const Dataset cv = held_out.Slice(0, config.si.n_test);
  const Dataset test = held_out.Slice(config.si.n_test, config.si.n_test);

  Model si;
  si.spec = spec;
  si.base = InitParams(spec, config.si.init_seed);
  TrainResult trace =
      Train(&si, train, cv, config.si.schedule, HardTargets(spec.output_dim));
  Baseline b = MakeBaseline(config, std::move(si));
  b.si_trace = std::move(trace);
  b.si_test_error = ErrorRate(b.si, test);
  return b;
}

Baseline MakeBaseline(const ExperimentConfig &config, Model si) {
  config.Check();
  if (!(si.spec == config.si.Spec(config.task)))
    throw ShapeError("SI network does not match the configured spec");
  Baseline b;
  b.si = std::move(si);
  b.si.lin.reset();
  b.si.lhuc.reset();
  b.si_checksum = ParamsChecksum(b.si.base);
  b.roster = MakeSpeakers(config.task, config.roster);
  const ClassGeometry geometry = MakeGeometry(config.task);
  for (const auto &p : b.roster) {
    b.splits.push_back(SplitSpeaker(p, config.task, geometry, config.splits));
    const SpeakerSplits &s = b.splits.back();
    b.rows.push_back(BaselineRow{p.speaker_id, p.severity, p.magnitude,
                                 p.DistortionMagnitude(), ErrorRate(b.si, s.cv),
                                 ErrorRate(b.si, s.test)});
  }
  return b;
}

namespace {

std::string FormatRho(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", rho);
  return buf;
}

std::string MakeKey(const std::string &speaker_id, const std::string &method,
                    const std::optional<double> &rho, int size) {
  return speaker_id + "|" + method + "|" + (rho ? FormatRho(*rho) : "") + "|" +
         std::to_string(size);
}

std::string Sanitize(std::string s) {
  for (char &c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
  }
  return s;
}

}  // namespace

std::string Cell::Key(const std::string &speaker_id) const {
  return MakeKey(speaker_id, method, rho, size);
}

std::string CellRecord::Key() const {
  return MakeKey(speaker_id, method, rho, size);
}

bool CellRecord::operator==(const CellRecord &o) const {
  return speaker_id == o.speaker_id && severity == o.severity &&
         method == o.method && size == o.size && rho == o.rho && ok == o.ok &&
         test_error == o.test_error && cv_error == o.cv_error &&
         train_error == o.train_error && adapted_params == o.adapted_params &&
         epochs == o.epochs && base_crc == o.base_crc && failure == o.failure;
}

std::vector<Cell> EnumerateCells(const ExperimentConfig &config) {
  const size_t speakers =
      config.roster.n_slight + config.roster.n_medium + config.roster.n_heavy;
  std::vector<Cell> cells;
  cells.reserve(config.NumCells());
  for (size_t s = 0; s < speakers; ++s) {
    for (const auto &m : config.methods) {
      if (UsesRhoGrid(m)) {
        for (double rho : config.rho_grid)
          for (int size : config.sizes) cells.push_back(Cell{s, m, rho, size});
      } else {
        for (int size : config.sizes)
          cells.push_back(Cell{s, m, std::nullopt, size});
      }
    }
  }
  return cells;
}

uint64_t CellSeed(const ExperimentConfig &config, const std::string &speaker_id,
                  int size) {
  return DeriveSeed(DeriveSeed(config.seed, HashString(speaker_id)),
                    static_cast<uint64_t>(size));
}

CellRecord RunCell(const ExperimentConfig &config, const Baseline &baseline,
                   const Cell &cell, const Matrix *pool_posteriors) {
  const auto start = std::chrono::steady_clock::now();
  if (cell.speaker >= baseline.roster.size())
    throw ConfigError("cell refers to speaker " + std::to_string(cell.speaker) +
                      " outside the roster");
  const SpeakerProfile &profile = baseline.roster[cell.speaker];
  const SpeakerSplits &splits = baseline.splits[cell.speaker];

  CellRecord rec;
  rec.speaker_id = profile.speaker_id;
  rec.severity = profile.severity;
  rec.method = cell.method;
  rec.size = cell.size;
  rec.rho = cell.rho;

  AdaptMethod method = config.MakeMethod(cell.method, cell.rho.value_or(0.0));
  method.schedule.seed = CellSeed(config, profile.speaker_id, cell.size);
  const Dataset subset = splits.AdaptSubset(cell.size);

  Matrix posteriors;
  const Matrix *post = nullptr;
  if (method.kld && method.kld->rho > 0.0) {
    if (pool_posteriors != nullptr) {
      posteriors = pool_posteriors->RowRange(0, subset.size());
    } else {
      posteriors = CacheSiPosteriors(baseline.si, subset);
    }
    post = &posteriors;
  }
  AdaptResult r = Adapt(baseline.si, method, subset, splits.cv, post);

  rec.ok = true;
  rec.test_error = ErrorRate(r.model, splits.test);
  rec.cv_error = ErrorRate(r.model, splits.cv);
  rec.train_error = ErrorRate(r.model, subset);
  rec.adapted_params = r.speaker.NumParams();
  rec.epochs = r.trace.trace.empty() ? 0 : r.trace.trace.back().epoch;
  rec.base_crc = ParamsChecksum(r.model.base);
  rec.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return rec;
}

namespace {

// Config text with the fields that cannot change results blanked out.
std::string ResultConfig(const ExperimentConfig &config) {
  ExperimentConfig c = config;
  c.jobs = 1;
  return DumpConfig(c);
}

}  // namespace

SweepResult RunSweep(const ExperimentConfig &config, const Baseline &baseline,
                     const SweepOptions &options) {
  config.Check();
  const std::vector<Cell> cells = EnumerateCells(config);
  if (baseline.roster.size() !=
      static_cast<size_t>(config.roster.n_slight + config.roster.n_medium +
                          config.roster.n_heavy))
    throw ConfigError("baseline roster does not match the config");

  std::vector<std::string> keys;
  keys.reserve(cells.size());
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < cells.size(); ++i) {
    keys.push_back(cells[i].Key(baseline.roster[cells[i].speaker].speaker_id));
    index[keys.back()] = i;
  }

  SweepResult result;
  result.total_cells = cells.size();
  std::vector<std::optional<CellRecord>> done(cells.size());

  const bool on_disk = !options.out_dir.empty();
  const std::string journal_path = (fs::path(options.out_dir) / "journal.csv").string();
  const std::string config_path = (fs::path(options.out_dir) / "sweep.ini").string();
  if (on_disk) {
    fs::create_directories(options.out_dir);
    const std::string cfg = ResultConfig(config);
    if (options.resume && fs::exists(journal_path)) {
      if (!fs::exists(config_path) || ReadTextFile(config_path) != cfg)
        throw ConfigError("cannot resume in " + options.out_dir +
                          ": the sweep configuration has changed");
      for (auto &rec : ParseResultsCsvText(ReadTextFile(journal_path), true)) {
        auto it = index.find(rec.Key());
        if (it == index.end() || done[it->second]) continue;
        done[it->second] = std::move(rec);
        ++result.resumed_cells;
      }
      // Rewrite without any torn tail so appends start on a fresh line.
      std::string journal = std::string(kResultsHeader) + ",wall_time\n";
      for (const auto &rec : done)
        if (rec) journal += FormatRecord(*rec, true) + "\n";
      WriteTextFile(journal_path, journal);
    } else {
      WriteTextFile(journal_path, std::string(kResultsHeader) + ",wall_time\n");
      fs::remove(fs::path(options.out_dir) / "results.csv");
    }
    WriteTextFile(config_path, cfg);
  }

  std::vector<size_t> pending;
  for (size_t i = 0; i < cells.size(); ++i)
    if (!done[i]) pending.push_back(i);
  const size_t limit = options.max_cells == 0
                           ? pending.size()
                           : std::min(pending.size(), options.max_cells);

  // SI posteriors over each adaptation pool; every subset is a prefix.
  std::vector<Matrix> pool_post(baseline.roster.size());
  for (size_t i = 0; i < limit; ++i) {
    const Cell &c = cells[pending[i]];
    if (UsesRhoGrid(c.method) && pool_post[c.speaker].empty())
      pool_post[c.speaker] =
          CacheSiPosteriors(baseline.si, baseline.splits[c.speaker].adapt_pool);
  }

  std::ofstream journal;
  if (on_disk) {
    journal.open(journal_path, std::ios::app);
    if (!journal) throw IoError("cannot append to " + journal_path);
  }

  std::mutex mu;
  std::atomic<size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr write_error;
  size_t finished = result.resumed_cells;
  auto worker = [&]() {
    for (;;) {
      if (abort.load() || (options.stop && options.stop->load())) return;
      const size_t slot = next.fetch_add(1);
      if (slot >= limit) return;
      const size_t ci = pending[slot];
      const Cell &cell = cells[ci];
      CellRecord rec;
      try {
        const Matrix *post =
            pool_post[cell.speaker].empty() ? nullptr : &pool_post[cell.speaker];
        rec = RunCell(config, baseline, cell, post);
      } catch (const std::exception &e) {
        const SpeakerProfile &p = baseline.roster[cell.speaker];
        rec = CellRecord{};
        rec.speaker_id = p.speaker_id;
        rec.severity = p.severity;
        rec.method = cell.method;
        rec.size = cell.size;
        rec.rho = cell.rho;
        rec.ok = false;
        rec.failure = Sanitize(e.what());
        if (rec.failure.empty()) rec.failure = "unknown error";
      }
      std::lock_guard<std::mutex> lock(mu);
      if (journal.is_open()) {
        journal << FormatRecord(rec, true) << '\n';
        journal.flush();
        if (!journal) {
          write_error = std::make_exception_ptr(
              IoError("write to " + journal_path + " failed"));
          abort = true;
          return;
        }
      }
      done[ci] = rec;
      ++result.computed_cells;
      ++finished;
      if (options.progress) options.progress(rec, finished, cells.size());
    }
  };

  const size_t n_threads = std::min<size_t>(std::max(config.jobs, 1), limit);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  journal.close();
  if (write_error) std::rethrow_exception(write_error);

  result.complete = true;
  for (auto &d : done) {
    if (d) {
      result.records.push_back(*d);
    } else {
      result.complete = false;
    }
  }
  if (on_disk && result.complete)
    EmitCsv(result.records, (fs::path(options.out_dir) / "results.csv").string());
  return result;
}

}  // namespace adaptlab
