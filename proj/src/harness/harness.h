// harness/harness.h

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


#ifndef ADAPTLAB_HARNESS_HARNESS_H_
#define ADAPTLAB_HARNESS_HARNESS_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harness/harness-config.h"
#include "nnet/nnet-train.h"
#include "synth/synth-task.h"

namespace adaptlab {

struct BaselineRow {
  std::string speaker_id;
  Severity severity = Severity::kSlight;
  double magnitude = 0.0;
  double distortion = 0.0;
  double cv_error = 0.0;
  double test_error = 0.0;
};

/// Everything the sweep reads but never writes: the SI network, the roster
/// and each speaker's fixed splits.
struct Baseline {
  Model si;
  TrainResult si_trace;
  double si_test_error = 0.0;
  uint32_t si_checksum = 0;  // ParamsChecksum of si.base
  std::vector<SpeakerProfile> roster;
  std::vector<SpeakerSplits> splits;
  std::vector<BaselineRow> rows;  // one per roster speaker, roster order
};

/// Trains the SI network on undistorted data and evaluates it on every
/// speaker. Throws NumericError if SI training diverges.
Baseline TrainBaseline(const ExperimentConfig &config);

/// Same as TrainBaseline but with an already trained SI network.
Baseline MakeBaseline(const ExperimentConfig &config, Model si);

/// One (speaker, method, size[, rho]) unit of the sweep.
struct Cell {
  size_t speaker = 0;  // index into the roster
  std::string method;
  std::optional<double> rho;  // set only for rho-grid methods
  int size = 0;               // adaptation blocks

  /// "S01|kld|0.25|100"; the rho field is empty when unset.
  std::string Key(const std::string &speaker_id) const;
};

/// All cells in canonical order: speaker, then method, then rho, then size.
std::vector<Cell> EnumerateCells(const ExperimentConfig &config);

/// Training seed of a cell. Depends on the speaker and size only, so "rsi"
/// and "kld" at rho = 0 see the same minibatch order.
uint64_t CellSeed(const ExperimentConfig &config, const std::string &speaker_id,
                  int size);

struct CellRecord {
  std::string speaker_id;
  Severity severity = Severity::kSlight;
  std::string method;
  int size = 0;
  std::optional<double> rho;
  bool ok = false;
  double test_error = 0.0;
  double cv_error = 0.0;
  double train_error = 0.0;
  size_t adapted_params = 0;
  int epochs = 0;           // epochs actually run
  uint32_t base_crc = 0;    // ParamsChecksum of the adapted model's SI tensors
  std::string failure;      // empty when ok
  double wall_time = 0.0;   // seconds; never part of results.csv

  std::string Key() const;
  bool operator==(const CellRecord &o) const;
};

/// Runs a single cell. Exceptions from adaptation propagate.
CellRecord RunCell(const ExperimentConfig &config, const Baseline &baseline,
                   const Cell &cell, const Matrix *pool_posteriors = nullptr);

struct SweepOptions {
  /// Directory for sweep.ini, journal.csv and results.csv. Empty keeps
  /// everything in memory.
  std::string out_dir;
  /// Reuse completed cells found in out_dir/journal.csv.
  bool resume = false;
  /// Stop after this many newly computed cells (0 = no limit).
  size_t max_cells = 0;
  /// Checked between cells; set from a signal handler to interrupt.
  const std::atomic<bool> *stop = nullptr;
  /// Called from the collector after every completed cell.
  std::function<void(const CellRecord &, size_t done, size_t total)> progress;
};

struct SweepResult {
  std::vector<CellRecord> records;  // canonical cell order
  size_t total_cells = 0;
  size_t resumed_cells = 0;
  size_t computed_cells = 0;
  bool complete = false;
};

/// Runs every configured cell that has no record yet. Failing cells are
/// recorded with their reason and never abort siblings. results.csv is
/// written once every cell is present.
SweepResult RunSweep(const ExperimentConfig &config, const Baseline &baseline,
                     const SweepOptions &options = {});

}  // namespace adaptlab

#endif  // ADAPTLAB_HARNESS_HARNESS_H_
