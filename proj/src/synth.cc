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

#include "oodkit/synth.h"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "oodkit/error.h"
#include "oodkit/supervisor.h"

namespace oodkit {

namespace {

// SplitMix64 finalizer.
std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kOutlierStream = 3;
constexpr std::uint64_t kOutlierKindStream = 4;

}  // namespace

std::uint64_t CounterRng::Bits(std::uint64_t stream,
                               std::uint64_t index) const {
  return Mix(Mix(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)) ^
             Mix(index + 0xd1b54a32d192ed03ULL));
}

double CounterRng::Uniform(std::uint64_t stream, std::uint64_t index) const {
  return (static_cast<double>(Bits(stream, index) >> 11) + 0.5) * 0x1p-53;
}

double CounterRng::Normal(std::uint64_t stream, std::uint64_t index) const {
  const double u1 = Uniform(stream, 2 * index);
  const double u2 = Uniform(stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

void CheckSpec(const SyntheticSpec& spec) {
  if (spec.n_classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "n_classes must be >= 2");
  }
  if (spec.train_per_class < 1 || spec.test_per_class < 1 ||
      spec.n_outliers < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample counts must be positive");
  }
  if (!(spec.overlap >= 0.0) || !(spec.inlier_spread >= 0.0) ||
      !(spec.outlier_spread >= 0.0) || !std::isfinite(spec.mean_scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "spreads and overlap must be nonnegative");
  }
  if (!(spec.confusable_fraction >= 0.0 && spec.confusable_fraction <= 1.0) ||
      !std::isfinite(spec.confusable_scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "confusable_fraction must lie in [0, 1]");
  }
  if (spec.epoch < 0) {
    throw Error(ErrorCode::kInvalidArgument, "epoch must be nonnegative");
  }
}

// Values are narrowed to f32 at generation time so the in-memory dump
// equals what a reader gets back from disk.
std::vector<double> DrawVector(const CounterRng& rng, std::uint64_t stream,
                               std::uint64_t sample, int n, int dominant,
                               double mean_scale, double spread) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const double mean = i == dominant ? mean_scale : 0.0;
    const double x =
        mean + spread * rng.Normal(stream, sample * static_cast<unsigned>(n) + i);
    v[i] = static_cast<float>(x);
  }
  return v;
}

std::uint64_t SampleId(std::uint64_t stream, std::uint64_t index) {
  return (stream << 48) | index;
}

DumpManifest MakeManifest(const SyntheticSpec& spec, Split split,
                          std::string_view dataset) {
  DumpManifest m;
  m.model_name = spec.model_name;
  m.dataset_name = fmt::format("synthetic-{}", dataset);
  m.epoch = spec.epoch;
  m.split = split;
  return m;
}

}  // namespace

SyntheticDumps GenerateSynthetic(const SyntheticSpec& spec) {
  CheckSpec(spec);
  const CounterRng rng(spec.seed);
  const int n = spec.n_classes;
  const double in_spread = spec.overlap * spec.inlier_spread;
  const double out_spread = spec.overlap * spec.outlier_spread;

  SyntheticDumps out;

  out.train.n_classes = n;
  out.train.manifest = MakeManifest(spec, Split::kTrainCorrectOnly, "train");
  std::vector<int> correct_per_class(n, 0);
  std::uint64_t index = 0;
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < spec.train_per_class; ++s, ++index) {
      std::vector<double> v = DrawVector(rng, kTrainStream, index, n, j,
                                         spec.mean_scale, in_spread);
      if (ArgMax(v) != j) continue;
      ++correct_per_class[j];
      out.train.records.push_back(SampleRecord::Inlier(
          SampleId(kTrainStream, index), j, std::move(v)));
    }
  }
  for (int j = 0; j < n; ++j) {
    if (correct_per_class[j] == 0) {
      throw Error(ErrorCode::kEmptyClass,
                  fmt::format("class {} has no correctly classified training "
                              "sample",
                              j));
    }
  }

  out.test.n_classes = n;
  out.test.manifest = MakeManifest(spec, Split::kTest, "test");
  index = 0;
  std::int64_t correct = 0;
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < spec.test_per_class; ++s, ++index) {
      std::vector<double> v = DrawVector(rng, kTestStream, index, n, j,
                                         spec.mean_scale, in_spread);
      if (ArgMax(v) == j) ++correct;
      out.test.records.push_back(SampleRecord::Inlier(
          SampleId(kTestStream, index), j, std::move(v)));
    }
  }
  out.test.manifest.reference_accuracy =
      static_cast<double>(correct) / static_cast<double>(index);

  out.outlier.n_classes = n;
  out.outlier.manifest = MakeManifest(spec, Split::kOutlierSet, "outlier");
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(spec.n_outliers);
       ++i) {
    // Selector and class draws live on their own stream so the noise of
    // every outlier is shared across fixture families.
    const bool confusable =
        rng.Uniform(kOutlierKindStream, 2 * i) < spec.confusable_fraction;
    std::vector<double> v =
        confusable
            ? DrawVector(rng, kOutlierStream, i, n,
                         static_cast<int>(rng.Bits(kOutlierKindStream,
                                                   2 * i + 1) %
                                          static_cast<unsigned>(n)),
                         spec.confusable_scale * spec.mean_scale, in_spread)
            : DrawVector(rng, kOutlierStream, i, n, -1, 0.0, out_spread);
    out.outlier.records.push_back(
        SampleRecord::Outlier(SampleId(kOutlierStream, i), std::move(v)));
  }
  return out;
}

void WriteSynthetic(const SyntheticSpec& spec,
                    const std::filesystem::path& dir) {
  SyntheticDumps dumps = GenerateSynthetic(spec);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
  SaveDump(dumps.train, dir / kTrainFile);
  SaveDump(dumps.test, dir / kTestFile);
  SaveDump(dumps.outlier, dir / kOutlierFile);
}

}  // namespace oodkit
