// synth/synth-task.h

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

#ifndef ADAPTLAB_SYNTH_SYNTH_TASK_H_
#define ADAPTLAB_SYNTH_SYNTH_TASK_H_

// Synthetic stand-in for an accented-speaker recognition task. The SI
// corpus is a Gaussian-cluster classification problem; a speaker's "accent"
// is an affine distortion of the feature space, a per-class offset (the
// analog of accent-specific phone substitutions, which no input-side affine
// map can undo) and additive noise, all scaled by one severity knob. One "utterance" is a block of
// frames_per_block frames from the same speaker.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nnet/nnet-types.h"

namespace adaptlab {

struct TaskSpec {
  int n_classes = 10;
  int feature_dim = 20;
  double class_spread = 0.9;      // std-dev of class means around the origin
  double within_class_std = 1.0;  // scale of the per-class covariance factor
  int frames_per_block = 10;
  uint64_t seed = 20180402;
};

/// Class means (n_classes x D) and lower-triangular covariance factors.
struct ClassGeometry {
  Matrix means;
  std::vector<Matrix> factors;
};

/// Throws ConfigError for non-positive sizes and for degenerate geometry
/// (two class means closer than 1e-6).
ClassGeometry MakeGeometry(const TaskSpec &spec);

/// Draws one frame per label: mean[label] + factor[label] * N(0, I).
Dataset SampleFrames(const ClassGeometry &geometry, std::vector<int> labels,
                     uint64_t seed, std::string speaker_id = "");

/// Class-balanced, seeded train/test sets from the SI distribution.
std::pair<Dataset, Dataset> GenerateSiCorpus(const TaskSpec &spec, int n_train,
                                             int n_test);

enum class Severity : uint8_t { kSlight = 0, kMedium = 1, kHeavy = 2 };

std::string_view SeverityName(Severity s);
Severity ParseSeverity(std::string_view name);

struct SeverityRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct RosterSpec {
  int n_slight = 2;
  int n_medium = 4;
  int n_heavy = 4;
  SeverityRange slight{0.05, 0.1};
  SeverityRange medium{0.2, 0.4};
  SeverityRange heavy{0.6, 1.0};
  // Per unit of severity magnitude m:
  //   ||A - I||_F = m * matrix_scale * sqrt(D)
  //   ||b||_2     = m * shift_scale * sqrt(D)
  //   ||c_y||_2   = m * class_shift_scale * sqrt(D)   for every class y
  //   sigma       = m * noise_scale
  double matrix_scale = 0.5;
  double shift_scale = 1.0;
  double class_shift_scale = 1.0;
  double noise_scale = 0.5;
  uint64_t seed = 7;
};

struct SpeakerProfile {
  std::string speaker_id;
  Severity severity = Severity::kSlight;
  double magnitude = 0.0;  // severity knob m drawn from the range
  Matrix a;                // D x D, applied as x' = A x
  Vector b;
  Matrix class_offset;     // n_classes x D, row y added to frames of class y
  double noise_std = 0.0;
  uint64_t seed = 0;

  /// ||A - I||_F + ||b||_2 + ||C||_F + sigma.
  double DistortionMagnitude() const;
};

/// Builds the roster. With the default counts (2 slight, 4 medium, 4 heavy)
/// speakers S01..S10 follow the accent pattern S M S M H H H M H M;
/// otherwise they are numbered slight first, then medium, then heavy.
std::vector<SpeakerProfile> MakeSpeakers(const TaskSpec &spec,
                                         const RosterSpec &roster);

/// Profile for a single speaker at severity knob m.
SpeakerProfile MakeSpeaker(const TaskSpec &spec, const RosterSpec &roster,
                           std::string speaker_id, Severity severity,
                           double magnitude, uint64_t seed);

/// x <- A x + b + c_label + sigma * eps, labels untouched, eps seeded by the
/// profile.
Dataset ApplySpeaker(const SpeakerProfile &profile, const Dataset &data);

struct SplitSizes {
  int adapt_blocks = 300;
  int cv_blocks = 50;
  int test_blocks = 100;

  int total() const { return adapt_blocks + cv_blocks + test_blocks; }
};

struct SpeakerSplits {
  Dataset adapt_pool;
  Dataset cv;
  Dataset test;
  int frames_per_block = 1;

  int adapt_blocks() const {
    return static_cast<int>(adapt_pool.size()) / frames_per_block;
  }
  /// The first `blocks` blocks of the fixed shuffled pool, so every subset
  /// is a prefix of every larger one. Throws ConfigError when the pool is
  /// too small.
  Dataset AdaptSubset(int blocks) const;
};

/// Draws total() blocks of speaker data, shuffles the block order and cuts
/// adapt pool / CV / test in that order.
SpeakerSplits SplitSpeaker(const SpeakerProfile &profile, const TaskSpec &spec,
                           const ClassGeometry &geometry, const SplitSizes &sizes);

}  // namespace adaptlab

#endif  // ADAPTLAB_SYNTH_SYNTH_TASK_H_
