/*
 * Copyright 2026 The oodkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Seeded synthetic activation dumps with known ground truth.
//
// Inliers of class j are logit vectors mean_scale * e_j plus Gaussian noise
// of spread overlap * inlier_spread. Outliers have no dominant coordinate:
// pure Gaussian noise of spread overlap * outlier_spread. Lowering `overlap`
// makes the classifier more accurate and the inlier/outlier split cleaner,
// which is how fixture families emulate successive training epochs.
//
// A `confusable_fraction` of the outliers is drawn like inliers of a random
// class with dominant coordinate confusable_scale * mean_scale. These stand
// for outlier images that resemble training classes; they keep the two sets
// from becoming fully separable.

#ifndef OODKIT_SYNTH_H_
#define OODKIT_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "oodkit/dump_io.h"

namespace oodkit {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, index), so output never depends on evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t Bits(std::uint64_t stream, std::uint64_t index) const;
  // Uniform in the open interval (0, 1).
  double Uniform(std::uint64_t stream, std::uint64_t index) const;
  // Standard normal (Box-Muller on draws 2*index and 2*index + 1).
  double Normal(std::uint64_t stream, std::uint64_t index) const;

 private:
  std::uint64_t seed_;
};

struct SyntheticSpec {
  int n_classes = 10;
  int train_per_class = 200;
  int test_per_class = 100;
  int n_outliers = 1000;
  double mean_scale = 6.0;
  double inlier_spread = 2.0;
  double outlier_spread = 2.0;
  double overlap = 1.0;
  double confusable_fraction = 0.15;
  double confusable_scale = 0.8;
  std::uint64_t seed = 42;
  int epoch = 0;
  std::string model_name = "synthetic";
};

struct SyntheticDumps {
  ActivationDump train;    // TrainCorrectOnly
  ActivationDump test;     // Test, reference accuracy measured on it
  ActivationDump outlier;  // OutlierSet
};

// Throws Error(kInvalidArgument) on a malformed spec and Error(kEmptyClass)
// when some class ends up with no correctly classified training sample.
SyntheticDumps GenerateSynthetic(const SyntheticSpec& spec);

inline constexpr char kTrainFile[] = "train.oodd";
inline constexpr char kTestFile[] = "test.oodd";
inline constexpr char kOutlierFile[] = "outlier.oodd";

// Writes the three dumps (and manifests) into `dir`, creating it.
void WriteSynthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace oodkit

#endif  // OODKIT_SYNTH_H_
