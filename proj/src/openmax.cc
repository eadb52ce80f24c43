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

#include "oodkit/openmax.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "oodkit/error.h"
#include "oodkit/parallel.h"

namespace oodkit {

using ordered_json = nlohmann::ordered_json;

std::string_view DistanceName(Distance d) {
  switch (d) {
    case Distance::kEuclidean: return "euclidean";
    case Distance::kCosine: return "cosine";
    case Distance::kEuCos: return "eucos";
  }
  return "";
}

Distance ParseDistance(std::string_view name) {
  if (name == "euclidean") return Distance::kEuclidean;
  if (name == "cosine") return Distance::kCosine;
  if (name == "eucos") return Distance::kEuCos;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown distance '{}'", name));
}

std::string_view OmegaModeName(OmegaMode m) {
  return m == OmegaMode::kRankWeighted ? "rank-weighted" : "plain-cdf";
}

OmegaMode ParseOmegaMode(std::string_view name) {
  if (name == "rank-weighted") return OmegaMode::kRankWeighted;
  if (name == "plain-cdf") return OmegaMode::kPlainCdf;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown omega mode '{}'", name));
}

std::string_view ScoreDomainName(ScoreDomain d) {
  return d == ScoreDomain::kKnownClasses ? "known" : "with-unknown";
}

ScoreDomain ParseScoreDomain(std::string_view name) {
  if (name == "known") return ScoreDomain::kKnownClasses;
  if (name == "with-unknown") return ScoreDomain::kWithUnknown;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown score domain '{}'", name));
}

namespace {

std::string_view UnknownRuleName(UnknownRule r) {
  return r == UnknownRule::kReject ? "reject" : "accept-literal";
}

UnknownRule ParseUnknownRule(std::string_view name) {
  if (name == "reject") return UnknownRule::kReject;
  if (name == "accept-literal") return UnknownRule::kAcceptLiteral;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown unknown-rule '{}'", name));
}

}  // namespace

void ValidateParams(const OpenMaxParams& params, int n_classes) {
  if (params.eta < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("eta must be >= 2, got {}", params.eta));
  }
  if (params.alpha < 1 || params.alpha > n_classes) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("alpha must lie in [1, {}], got {}", n_classes,
                            params.alpha));
  }
  ValidateEpsilon(params.epsilon);
}

double ClassDistance(std::span<const double> v, std::span<const double> mav,
                     Distance metric) {
  if (v.size() != mav.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("distance between vectors of length {} and {}",
                            v.size(), mav.size()));
  }
  double sq = 0.0, dot = 0.0, nv = 0.0, nm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double diff = v[i] - mav[i];
    sq += diff * diff;
    dot += v[i] * mav[i];
    nv += v[i] * v[i];
    nm += mav[i] * mav[i];
  }
  const double euclidean = std::sqrt(sq);
  if (metric == Distance::kEuclidean) return euclidean;
  if (nv == 0.0 || nm == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cosine distance of a zero-norm vector");
  }
  // sqrt(nv * nm) rather than sqrt(nv) * sqrt(nm): for v == mav the
  // product rounds back to nv exactly and the distance is exactly zero.
  const double cosine = std::clamp(1.0 - dot / std::sqrt(nv * nm), 0.0, 2.0);
  if (metric == Distance::kCosine) return cosine;
  return euclidean / 200.0 + cosine;
}

double WeibullCdf(const WeibullClassModel& model, double d) {
  return WeibullCdf(model.weibull, d);
}

namespace {

WeibullClassModel FitClass(int class_index,
                           const std::vector<const SampleRecord*>& members,
                           int n_classes, const OpenMaxParams& params) {
  const auto count = static_cast<int>(members.size());
  if (count < params.eta) {
    throw Error(ErrorCode::kInsufficientTail,
                fmt::format("{} correctly classified samples, tail size {}",
                            count, params.eta),
                class_index);
  }
  WeibullClassModel model;
  model.class_index = class_index;
  model.tail_size = params.eta;
  model.mav.assign(n_classes, 0.0);
  for (const SampleRecord* r : members) {
    for (int j = 0; j < n_classes; ++j) model.mav[j] += r->activations[j];
  }
  for (double& m : model.mav) m /= count;

  std::vector<double> distances;
  distances.reserve(members.size());
  for (const SampleRecord* r : members) {
    distances.push_back(ClassDistance(r->activations, model.mav,
                                      params.distance));
  }
  std::stable_sort(distances.begin(), distances.end(), std::greater<>());
  distances.resize(params.eta);

  try {
    model.weibull = FitWeibull(distances).params;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) {
      throw Error(ErrorCode::kDegenerateTail,
                  "tail contains a zero distance", class_index);
    }
    throw Error(e.code(), e.what(), class_index);
  }
  return model;
}

}  // namespace

OpenMaxModel FitOpenMax(const ActivationDump& train,
                        const OpenMaxParams& params, int threads) {
  ValidateParams(params, train.n_classes);
  if (train.manifest.split != Split::kTrainCorrectOnly) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("OpenMax fits on a TrainCorrectOnly dump, got {}",
                            SplitName(train.manifest.split)));
  }
  const int n = train.n_classes;
  std::vector<std::vector<const SampleRecord*>> members(n);
  for (const SampleRecord& r : train.records) {
    if (r.origin != Origin::kInlier) {
      throw Error(ErrorCode::kInvalidRecord,
                  fmt::format("training dump holds outlier {}", r.sample_id));
    }
    if (r.activations.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("sample {} has {} activations, expected {}",
                              r.sample_id, r.activations.size(), n));
    }
    if (ArgMax(r.activations) == *r.true_label) {
      members[*r.true_label].push_back(&r);
    }
  }

  OpenMaxModel model;
  model.params = params;
  model.classes.resize(n);
  ParallelFor(n, threads, [&](std::size_t j) {
    model.classes[j] = FitClass(static_cast<int>(j), members[j], n, params);
  });
  return model;
}

std::vector<int> RankClasses(std::span<const double> v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[a] > v[b]; });
  return order;
}

RevisedVector Recalibrate(std::span<const double> v,
                          const OpenMaxModel& model) {
  const int n = model.n_classes();
  if (v.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("vector of length {} against a {}-class model",
                            v.size(), n));
  }
  const int alpha = model.params.alpha;
  ValidateParams(model.params, n);

  RevisedVector out;
  out.omegas.assign(n, 1.0);
  const std::vector<int> ranks = RankClasses(v);
  for (int rank = 1; rank <= alpha; ++rank) {
    const WeibullClassModel& cls = model.classes[ranks[rank - 1]];
    const double d = ClassDistance(v, cls.mav, model.params.distance);
    const double cdf = WeibullCdf(cls, d);
    const double weight =
        model.params.omega_mode == OmegaMode::kRankWeighted
            ? static_cast<double>(alpha - rank) / alpha
            : 1.0;
    out.omegas[ranks[rank - 1]] = 1.0 - weight * cdf;
  }
  out.revised.resize(n);
  for (int j = 0; j < n; ++j) {
    out.revised[j] = v[j] * out.omegas[j];
    out.unknown_mass += v[j] * (1.0 - out.omegas[j]);
  }
  return out;
}

ScoredSample OpenMaxPredict(const SampleRecord& record,
                            const OpenMaxModel& model) {
  RevisedVector rv = Recalibrate(record.activations, model);
  std::vector<double> extended = std::move(rv.revised);
  extended.push_back(rv.unknown_mass);
  const std::span<const double> known(extended.data(), extended.size() - 1);

  ScoredSample s;
  s.sample_id = record.sample_id;
  s.anomaly = model.params.score_domain == ScoreDomain::kKnownClasses
                  ? BaselineScore(known)
                  : BaselineScore(extended);
  // Unknown wins only with positive mass strictly above every revised
  // activation; a zero mass means recalibration moved nothing.
  s.predicted_class = ArgMax(known);
  if (rv.unknown_mass > 0.0 && rv.unknown_mass > known[s.predicted_class]) {
    s.predicted_class = model.n_classes();
  }
  if (s.predicted_class == model.n_classes()) {
    s.verdict = model.params.unknown_rule == UnknownRule::kReject
                    ? Verdict::kReject
                    : Verdict::kAccept;
  } else {
    s.verdict = ThresholdVerdict(s.anomaly, model.params.epsilon);
  }
  return s;
}

OpenMaxSupervisor::OpenMaxSupervisor(OpenMaxModel model)
    : model_(std::move(model)) {
  ValidateParams(model_.params, model_.n_classes());
}

ScoredSample OpenMaxSupervisor::Score(const SampleRecord& record) const {
  return OpenMaxPredict(record, model_);
}

std::string ModelToJson(const OpenMaxModel& model) {
  ordered_json params;
  params["eta"] = model.params.eta;
  params["alpha"] = model.params.alpha;
  params["epsilon"] = model.params.epsilon;
  params["distance"] = std::string(DistanceName(model.params.distance));
  params["omega_mode"] = std::string(OmegaModeName(model.params.omega_mode));
  params["unknown_rule"] =
      std::string(UnknownRuleName(model.params.unknown_rule));
  params["score_domain"] =
      std::string(ScoreDomainName(model.params.score_domain));

  ordered_json classes = ordered_json::array();
  for (const WeibullClassModel& c : model.classes) {
    ordered_json entry;
    entry["class_index"] = c.class_index;
    entry["mav"] = c.mav;
    entry["shape"] = c.weibull.shape;
    entry["scale"] = c.weibull.scale;
    entry["tail_size"] = c.tail_size;
    classes.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["params"] = std::move(params);
  doc["classes"] = std::move(classes);
  return doc.dump(2) + "\n";
}

OpenMaxModel ModelFromJson(std::string_view text) {
  OpenMaxModel model;
  try {
    ordered_json doc = ordered_json::parse(text);
    const ordered_json& p = doc.at("params");
    model.params.eta = p.at("eta").get<int>();
    model.params.alpha = p.at("alpha").get<int>();
    model.params.epsilon = p.at("epsilon").get<double>();
    model.params.distance = ParseDistance(p.at("distance").get<std::string>());
    model.params.omega_mode =
        ParseOmegaMode(p.at("omega_mode").get<std::string>());
    if (p.contains("unknown_rule")) {
      model.params.unknown_rule =
          ParseUnknownRule(p["unknown_rule"].get<std::string>());
    }
    if (p.contains("score_domain")) {
      model.params.score_domain =
          ParseScoreDomain(p["score_domain"].get<std::string>());
    }
    for (const ordered_json& entry : doc.at("classes")) {
      WeibullClassModel c;
      c.class_index = entry.at("class_index").get<int>();
      c.mav = entry.at("mav").get<std::vector<double>>();
      c.weibull.shape = entry.at("shape").get<double>();
      c.weibull.scale = entry.at("scale").get<double>();
      c.tail_size = entry.at("tail_size").get<int>();
      model.classes.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, fmt::format("model JSON: {}", e.what()));
  }

  const int n = model.n_classes();
  if (n < 2) throw Error(ErrorCode::kParse, "model has fewer than 2 classes");
  for (int j = 0; j < n; ++j) {
    const WeibullClassModel& c = model.classes[j];
    if (c.class_index != j || c.mav.size() != static_cast<std::size_t>(n) ||
        !(c.weibull.shape > 0.0) || !(c.weibull.scale > 0.0)) {
      throw Error(ErrorCode::kParse,
                  fmt::format("model entry {} is malformed", j));
    }
  }
  ValidateParams(model.params, n);
  return model;
}

void SaveModel(const OpenMaxModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << ModelToJson(model);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path));
}

OpenMaxModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ModelFromJson(ss.str());
}

}  // namespace oodkit
