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

// Supervisor abstractions and the softmax-confidence baseline.
//
// A supervisor maps an activation vector to an anomaly score in [0, 1] and a
// verdict. Higher scores are more outlier-like.

#ifndef OODKIT_SUPERVISOR_H_
#define OODKIT_SUPERVISOR_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "oodkit/dump_io.h"

namespace oodkit {

class AnomalyScore {
 public:
  // Throws Error(kInvalidArgument) outside [0, 1] or for NaN.
  explicit AnomalyScore(double value);
  double value() const { return value_; }

  friend bool operator==(const AnomalyScore&, const AnomalyScore&) = default;

 private:
  double value_;
};

enum class Verdict { kAccept, kReject };

std::string_view VerdictName(Verdict v);

struct SupervisorConfig {
  double epsilon = 0.5;
};

void ValidateEpsilon(double epsilon);

// Index reserved for the unknown-unknown class is n_classes.
struct ScoredSample {
  std::uint64_t sample_id = 0;
  AnomalyScore anomaly{0.0};
  int predicted_class = 0;
  Verdict verdict = Verdict::kReject;

  friend bool operator==(const ScoredSample&, const ScoredSample&) = default;
};

// Shift-invariant softmax; throws Error(kNonFinite) on non-finite input and
// Error(kInvalidArgument) on an empty vector.
std::vector<double> Softmax(std::span<const double> logits);

// Lowest index among maximal entries.
int ArgMax(std::span<const double> values);

// Strict-threshold discriminator: accept iff score < epsilon.
Verdict ThresholdVerdict(AnomalyScore score, double epsilon);

// 1 - max softmax.
AnomalyScore BaselineScore(std::span<const double> logits);
AnomalyScore BaselineScore(const SampleRecord& record);

ScoredSample BaselinePredict(const SampleRecord& record,
                             const SupervisorConfig& config);

// Common interface for scoring a whole dump. Implementations must be pure
// so that Score may run concurrently for distinct records.
class Supervisor {
 public:
  virtual ~Supervisor() = default;
  virtual std::string_view name() const = 0;
  virtual ScoredSample Score(const SampleRecord& record) const = 0;
};

class BaselineSupervisor : public Supervisor {
 public:
  explicit BaselineSupervisor(SupervisorConfig config);
  std::string_view name() const override { return "Baseline"; }
  ScoredSample Score(const SampleRecord& record) const override;

 private:
  SupervisorConfig config_;
};

}  // namespace oodkit

#endif  // OODKIT_SUPERVISOR_H_
