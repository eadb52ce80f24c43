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

// OpenMax: per-class mean activation vectors, Weibull models of the largest
// distances to them, and recalibration of the top-ranked activations into an
// extra unknown-unknown class.

#ifndef OODKIT_OPENMAX_H_
#define OODKIT_OPENMAX_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/dump_io.h"
#include "oodkit/supervisor.h"
#include "oodkit/weibull.h"

namespace oodkit {

enum class Distance { kEuclidean, kCosine, kEuCos };

// kRankWeighted: omega = 1 - ((alpha - rank) / alpha) * F, rank = 1..alpha.
// kPlainCdf:     omega = 1 - F.
enum class OmegaMode { kRankWeighted, kPlainCdf };

// What happens when the unknown-unknown class wins the argmax.
// kReject rejects the sample. kAcceptLiteral accepts it, reproducing the
// discriminator exactly as printed in the original algorithm listing.
enum class UnknownRule { kReject, kAcceptLiteral };

// Which softmax the anomaly score 1 - max P is read from. kKnownClasses
// normalizes over the N revised activations only, and the unknown mass takes
// part in the argmax alone. kWithUnknown normalizes over all N + 1 entries.
enum class ScoreDomain { kKnownClasses, kWithUnknown };

std::string_view DistanceName(Distance d);
Distance ParseDistance(std::string_view name);
std::string_view OmegaModeName(OmegaMode m);
OmegaMode ParseOmegaMode(std::string_view name);
std::string_view ScoreDomainName(ScoreDomain d);
ScoreDomain ParseScoreDomain(std::string_view name);

struct OpenMaxParams {
  int eta = 20;    // tail size
  int alpha = 10;  // number of top-ranked classes to revise
  double epsilon = 0.5;
  Distance distance = Distance::kEuclidean;
  OmegaMode omega_mode = OmegaMode::kRankWeighted;
  UnknownRule unknown_rule = UnknownRule::kReject;
  ScoreDomain score_domain = ScoreDomain::kKnownClasses;

  friend bool operator==(const OpenMaxParams&, const OpenMaxParams&) = default;
};

// Throws Error(kInvalidArgument) unless eta >= 2, 1 <= alpha <= n_classes
// and epsilon lies in [0, 1].
void ValidateParams(const OpenMaxParams& params, int n_classes);

struct WeibullClassModel {
  int class_index = 0;
  std::vector<double> mav;
  WeibullParams weibull;
  int tail_size = 0;

  friend bool operator==(const WeibullClassModel&,
                         const WeibullClassModel&) = default;
};

struct OpenMaxModel {
  OpenMaxParams params;
  std::vector<WeibullClassModel> classes;

  int n_classes() const { return static_cast<int>(classes.size()); }

  friend bool operator==(const OpenMaxModel&, const OpenMaxModel&) = default;
};

struct RevisedVector {
  std::vector<double> revised;
  double unknown_mass = 0.0;
  std::vector<double> omegas;
};

// Euclidean: ||v - mav||. Cosine: 1 - cos(v, mav), error on a zero-norm
// input. EuCos: Euclidean / 200 + Cosine.
double ClassDistance(std::span<const double> v, std::span<const double> mav,
                     Distance metric);

double WeibullCdf(const WeibullClassModel& model, double d);

// Fits one Weibull model per class on the correctly classified inliers of a
// TrainCorrectOnly dump (records whose argmax differs from the label are
// skipped). The tail is the `eta` largest distances to the class mean.
// Fit errors carry the offending class index. `threads` > 1 fits classes
// concurrently; the result does not depend on it.
OpenMaxModel FitOpenMax(const ActivationDump& train,
                        const OpenMaxParams& params, int threads = 1);

// Classes ranked by descending activation, ties by lowest index.
std::vector<int> RankClasses(std::span<const double> v);

RevisedVector Recalibrate(std::span<const double> v, const OpenMaxModel& model);

// Anomaly 1 - max P over the configured score domain. The predicted class
// is the argmax of the revised vector, or n_classes (unknown) when the
// unknown mass is positive and strictly larger than every revised entry.
ScoredSample OpenMaxPredict(const SampleRecord& record,
                            const OpenMaxModel& model);

class OpenMaxSupervisor : public Supervisor {
 public:
  explicit OpenMaxSupervisor(OpenMaxModel model);
  std::string_view name() const override { return "OpenMax"; }
  ScoredSample Score(const SampleRecord& record) const override;
  const OpenMaxModel& model() const { return model_; }

 private:
  OpenMaxModel model_;
};

// JSON document: {"params": {...}, "classes": [{class_index, mav, shape,
// scale, tail_size}, ...]}. Doubles are written in shortest round-trip form.
std::string ModelToJson(const OpenMaxModel& model);
OpenMaxModel ModelFromJson(std::string_view text);
void SaveModel(const OpenMaxModel& model, const std::string& path);
OpenMaxModel LoadModel(const std::string& path);

}  // namespace oodkit

#endif  // OODKIT_OPENMAX_H_
