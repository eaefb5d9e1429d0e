// harness/harness-config.h

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


#ifndef ADAPTLAB_HARNESS_HARNESS_CONFIG_H_
#define ADAPTLAB_HARNESS_HARNESS_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adapt/adapt.h"
#include "nnet/nnet-types.h"
#include "synth/synth-task.h"

namespace adaptlab {

/// Settings for the speaker-independent baseline network.
struct SiTrainConfig {
  std::vector<int> hidden_dims{64, 64, 64, 64};
  Activation activation = Activation::kSigmoid;
  int n_train = 20000;
  int n_test = 5000;
  uint64_t init_seed = 1;
  TrainSchedule schedule = DefaultSchedule();

  static TrainSchedule DefaultSchedule() {
    TrainSchedule s;
    s.learning_rate = 0.1;
    s.max_epochs = 40;
    s.patience = 5;
    return s;
  }

  NetworkSpec Spec(const TaskSpec &task) const;
};

// How the rho of a KLD-bearing method is picked for summaries. kGlobal picks,
// per (method, size), the rho with the lowest CV error averaged over all
// speakers; kSpeaker picks per (speaker, method, size).
enum class RhoSelection : uint8_t { kGlobal = 0, kSpeaker = 1 };

std::string_view RhoSelectionName(RhoSelection s);
RhoSelection ParseRhoSelection(std::string_view name);

std::vector<std::string> DefaultMethods();

struct ExperimentConfig {
  TaskSpec task;
  RosterSpec roster;
  SplitSizes splits;
  SiTrainConfig si;

  std::vector<std::string> methods = DefaultMethods();
  std::vector<int> sizes{5, 10, 20, 40, 80, 100, 150, 200, 250, 300};
  std::vector<double> rho_grid{0.0625, 0.125, 0.25, 0.5};

  // Per-cell schedule.
  int max_epochs = 100;
  int patience = 10;
  int batch_size = 8;
  // Overrides of the per-component default learning rates. A combination
  // uses the smallest rate among its components.
  std::optional<double> lin_learning_rate;
  std::optional<double> lhuc_learning_rate;
  std::optional<double> kld_learning_rate;
  // When set, a combination trains each inserted group at its own rate and
  // the network weights at the KLD rate instead of one shared minimum.
  bool per_group_rates = false;

  RhoSelection rho_selection = RhoSelection::kGlobal;
  uint64_t seed = 1;
  int jobs = 1;

  /// Throws ConfigError on unknown methods, sizes outside the adaptation
  /// pool, rho outside [0, 1] and non-positive counts.
  void Check() const;

  /// Number of sweep cells: every KLD-bearing method except "rsi" is
  /// expanded over rho_grid.
  size_t NumCells() const;

  /// Learning rate and schedule for one method. rho is ignored for methods
  /// without KLD.
  AdaptMethod MakeMethod(const std::string &name, double rho) const;

  /// 64-bit fingerprint of everything that determines the SI network.
  uint64_t SiFingerprint() const;
};

/// True for methods whose cells are expanded over the rho grid.
bool UsesRhoGrid(const std::string &method);

/// Reads an INI file. Keys not present keep their defaults; unknown
/// sections or keys are rejected.
ExperimentConfig LoadConfig(const std::string &path);
ExperimentConfig ParseConfig(const std::string &text);

/// INI text that ParseConfig reads back to an equal config.
std::string DumpConfig(const ExperimentConfig &config);

std::vector<int> ParseIntList(const std::string &text);
std::vector<double> ParseDoubleList(const std::string &text);
std::vector<std::string> ParseNameList(const std::string &text);

}  // namespace adaptlab

#endif  // ADAPTLAB_HARNESS_HARNESS_CONFIG_H_
