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

#include "oodkit/supervisor.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "oodkit/error.h"

namespace oodkit {

AnomalyScore::AnomalyScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("anomaly score {} outside [0, 1]", value));
  }
}

std::string_view VerdictName(Verdict v) {
  return v == Verdict::kAccept ? "accept" : "reject";
}

void ValidateEpsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("epsilon {} outside [0, 1]", epsilon));
  }
}

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "softmax of an empty vector");
  }
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "softmax input is not finite");
    }
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

int ArgMax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

Verdict ThresholdVerdict(AnomalyScore score, double epsilon) {
  return score.value() < epsilon ? Verdict::kAccept : Verdict::kReject;
}

AnomalyScore BaselineScore(std::span<const double> logits) {
  std::vector<double> p = Softmax(logits);
  const double top = *std::max_element(p.begin(), p.end());
  // Rounding can push the top probability a hair past 1.
  return AnomalyScore(std::clamp(1.0 - top, 0.0, 1.0));
}

AnomalyScore BaselineScore(const SampleRecord& record) {
  return BaselineScore(std::span<const double>(record.activations));
}

ScoredSample BaselinePredict(const SampleRecord& record,
                             const SupervisorConfig& config) {
  ValidateEpsilon(config.epsilon);
  ScoredSample s;
  s.sample_id = record.sample_id;
  s.anomaly = BaselineScore(record);
  s.predicted_class = ArgMax(record.activations);
  s.verdict = ThresholdVerdict(s.anomaly, config.epsilon);
  return s;
}

BaselineSupervisor::BaselineSupervisor(SupervisorConfig config)
    : config_(config) {
  ValidateEpsilon(config_.epsilon);
}

ScoredSample BaselineSupervisor::Score(const SampleRecord& record) const {
  return BaselinePredict(record, config_);
}

}  // namespace oodkit
