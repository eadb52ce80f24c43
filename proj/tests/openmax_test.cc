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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oodkit/error.h"
#include "oodkit/synth.h"
#include "support/oracles.h"

namespace oodkit {
namespace {

// Weibull with shape 1 whose CDF at distance d equals f.
WeibullParams CdfAt(double d, double f) {
  return WeibullParams{1.0, d / -std::log1p(-f)};
}

OpenMaxModel HandModel(std::vector<std::vector<double>> mavs,
                       std::vector<WeibullParams> weibulls, int alpha) {
  OpenMaxModel m;
  m.params.alpha = alpha;
  m.params.eta = 2;
  for (std::size_t j = 0; j < mavs.size(); ++j) {
    m.classes.push_back(
        {static_cast<int>(j), std::move(mavs[j]), weibulls[j], 2});
  }
  return m;
}

ErrorCode FitErrorCode(const ActivationDump& d, const OpenMaxParams& p,
                       std::optional<int>* class_index) {
  try {
    FitOpenMax(d, p);
  } catch (const Error& e) {
    *class_index = e.class_index();
    return e.code();
  }
  ADD_FAILURE() << "fit succeeded";
  return ErrorCode::kUsage;
}

ActivationDump TrainDump(int n_classes) {
  ActivationDump d;
  d.n_classes = n_classes;
  d.manifest.split = Split::kTrainCorrectOnly;
  return d;
}

const SyntheticDumps& Fixture() {
  static const SyntheticDumps dumps = GenerateSynthetic(SyntheticSpec{});
  return dumps;
}

TEST(ClassDistance, Examples) {
  const std::vector<double> v = {3, 4}, zero = {0, 0};
  EXPECT_EQ(ClassDistance(v, v, Distance::kEuclidean), 0.0);
  EXPECT_EQ(ClassDistance(v, zero, Distance::kEuclidean), 5.0);
  EXPECT_NEAR(ClassDistance(std::vector<double>{1, 0},
                            std::vector<double>{0, 1}, Distance::kCosine),
              1.0, 1e-15);
  EXPECT_NEAR(ClassDistance(std::vector<double>{1, 0},
                            std::vector<double>{0, 1}, Distance::kEuCos),
              std::sqrt(2.0) / 200.0 + 1.0, 1e-15);
  EXPECT_THROW(ClassDistance(v, zero, Distance::kCosine), Error);
  EXPECT_THROW(ClassDistance(v, std::vector<double>{1}, Distance::kEuclidean),
               Error);
}

TEST(ClassDistance, EuclideanSymmetric) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(6), b(6);
    for (double& x : a) x = testing::Unit(rng) * 10 - 5;
    for (double& x : b) x = testing::Unit(rng) * 10 - 5;
    EXPECT_EQ(ClassDistance(a, b, Distance::kEuclidean),
              ClassDistance(b, a, Distance::kEuclidean));
    EXPECT_GT(ClassDistance(a, b, Distance::kEuclidean), 0.0);
  }
}

TEST(FitOpenMax, MeanOfCorrectSamples) {
  ActivationDump d = TrainDump(2);
  std::uint64_t id = 0;
  for (const auto& v : std::vector<std::vector<double>>{
           {1, 0}, {3, 0}, {2, 0.5}, {2, -0.5}}) {
    d.records.push_back(SampleRecord::Inlier(id++, 0, v));
  }
  // Misclassified: argmax is 1, so it is skipped.
  d.records.push_back(SampleRecord::Inlier(id++, 0, {0, 50}));
  for (const auto& v : std::vector<std::vector<double>>{
           {0, 1}, {0, 3}, {0.5, 2}, {-0.5, 2}}) {
    d.records.push_back(SampleRecord::Inlier(id++, 1, v));
  }
  OpenMaxParams p;
  p.eta = 4;
  p.alpha = 2;
  const OpenMaxModel m = FitOpenMax(d, p);
  ASSERT_EQ(m.n_classes(), 2);
  EXPECT_EQ(m.classes[0].mav, (std::vector<double>{2, 0}));
  EXPECT_EQ(m.classes[1].mav, (std::vector<double>{0, 2}));
  EXPECT_EQ(m.classes[0].tail_size, 4);
  EXPECT_GT(m.classes[0].weibull.shape, 0.0);
  EXPECT_GT(m.classes[0].weibull.scale, 0.0);
}

TEST(FitOpenMax, InsufficientTailNamesClass) {
  ActivationDump d = TrainDump(2);
  for (int i = 0; i < 30; ++i) {
    d.records.push_back(SampleRecord::Inlier(i, 0, {5.0 + i, 0}));
  }
  for (int i = 0; i < 5; ++i) {
    d.records.push_back(SampleRecord::Inlier(100 + i, 1, {0, 5.0 + i}));
  }
  std::optional<int> cls;
  EXPECT_EQ(FitErrorCode(d, OpenMaxParams{.eta = 10, .alpha = 2}, &cls),
            ErrorCode::kInsufficientTail);
  EXPECT_EQ(cls, 1);
}

TEST(FitOpenMax, DegenerateTailNamesClass) {
  ActivationDump d = TrainDump(2);
  for (int i = 0; i < 10; ++i) {
    d.records.push_back(SampleRecord::Inlier(i, 0, {5.0 + i, 0}));
    d.records.push_back(SampleRecord::Inlier(100 + i, 1, {0, 5.0}));
  }
  std::optional<int> cls;
  EXPECT_EQ(FitErrorCode(d, OpenMaxParams{.eta = 5, .alpha = 2}, &cls),
            ErrorCode::kDegenerateTail);
  EXPECT_EQ(cls, 1);
}

TEST(FitOpenMax, RequiresTrainSplit) {
  ActivationDump d = Fixture().test;
  EXPECT_THROW(FitOpenMax(d, OpenMaxParams{}), Error);
}

TEST(FitOpenMax, ParamsValidated) {
  EXPECT_THROW(ValidateParams(OpenMaxParams{.eta = 1}, 10), Error);
  EXPECT_THROW(ValidateParams(OpenMaxParams{.alpha = 0}, 10), Error);
  EXPECT_THROW(ValidateParams(OpenMaxParams{.alpha = 11}, 10), Error);
  EXPECT_NO_THROW(ValidateParams(OpenMaxParams{.eta = 2, .alpha = 10}, 10));
}

TEST(FitOpenMax, ThreadCountDoesNotMatter) {
  const OpenMaxModel a = FitOpenMax(Fixture().train, OpenMaxParams{}, 1);
  const OpenMaxModel b = FitOpenMax(Fixture().train, OpenMaxParams{}, 8);
  EXPECT_EQ(a, b);
}

TEST(Recalibrate, ZeroDistancesLeaveVectorUnchanged) {
  const std::vector<double> v = {4, -1, 2.5};
  const OpenMaxModel m =
      HandModel({v, v, v}, {{1.5, 0.3}, {2, 1}, {0.5, 9}}, 3);
  const RevisedVector r = Recalibrate(v, m);
  EXPECT_EQ(r.omegas, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(r.revised, v);
  EXPECT_EQ(r.unknown_mass, 0.0);
}

TEST(Recalibrate, AlphaOneRankWeightedIsIdentity) {
  const std::vector<double> v = {4, 1};
  const OpenMaxModel m =
      HandModel({{0, 1}, {4, 0}}, {CdfAt(4, 0.5), CdfAt(1, 0.2)}, 1);
  const RevisedVector r = Recalibrate(v, m);
  EXPECT_EQ(r.revised, v);
  EXPECT_EQ(r.unknown_mass, 0.0);
}

TEST(Recalibrate, AlphaOnePlainCdfRevisesTop) {
  const std::vector<double> v = {4, 1};
  OpenMaxModel m =
      HandModel({{0, 1}, {4, 0}}, {CdfAt(4, 0.5), CdfAt(1, 0.2)}, 1);
  m.params.omega_mode = OmegaMode::kPlainCdf;
  const RevisedVector r = Recalibrate(v, m);
  EXPECT_NEAR(r.omegas[0], 0.5, 1e-15);
  EXPECT_EQ(r.omegas[1], 1.0);
  EXPECT_NEAR(r.revised[0], 2.0, 1e-14);
  EXPECT_NEAR(r.unknown_mass, 2.0, 1e-14);
}

TEST(Recalibrate, TwoClassHandExample) {
  // Top class at F = 0.5 with weight 1/2, second class at weight 0.
  const std::vector<double> v = {4, 1};
  const OpenMaxModel m =
      HandModel({{0, 1}, {4, 0}}, {CdfAt(4, 0.5), CdfAt(1, 0.2)}, 2);
  const RevisedVector r = Recalibrate(v, m);
  EXPECT_NEAR(r.omegas[0], 0.75, 1e-15);
  EXPECT_EQ(r.omegas[1], 1.0);
  EXPECT_NEAR(r.revised[0], 3.0, 1e-14);
  EXPECT_EQ(r.revised[1], 1.0);
  EXPECT_NEAR(r.unknown_mass, 1.0, 1e-14);
}

TEST(Recalibrate, MatchesScriptedOracle) {
  std::mt19937_64 rng(21);
  const OpenMaxModel fitted = FitOpenMax(Fixture().train, OpenMaxParams{});
  for (int trial = 0; trial < 200; ++trial) {
    OpenMaxModel m = fitted;
    m.params.alpha = 1 + static_cast<int>(rng() % 10);
    m.params.omega_mode =
        rng() % 2 ? OmegaMode::kPlainCdf : OmegaMode::kRankWeighted;
    const std::vector<double>& v =
        Fixture().test.records[rng() % Fixture().test.records.size()]
            .activations;
    // Independent evaluation: rank by repeated max extraction.
    std::vector<double> omega(10, 1.0);
    std::vector<bool> used(10, false);
    for (int rank = 1; rank <= m.params.alpha; ++rank) {
      int top = -1;
      for (int j = 0; j < 10; ++j) {
        if (!used[j] && (top < 0 || v[j] > v[top])) top = j;
      }
      used[top] = true;
      double sq = 0;
      for (int j = 0; j < 10; ++j) {
        sq += (v[j] - m.classes[top].mav[j]) * (v[j] - m.classes[top].mav[j]);
      }
      const WeibullParams& w = m.classes[top].weibull;
      const double f = 1.0 - std::exp(-std::pow(std::sqrt(sq) / w.scale,
                                                w.shape));
      const double weight = m.params.omega_mode == OmegaMode::kRankWeighted
                                ? (m.params.alpha - rank) /
                                      static_cast<double>(m.params.alpha)
                                : 1.0;
      omega[top] = 1.0 - weight * f;
    }
    const RevisedVector r = Recalibrate(v, m);
    double unknown = 0;
    for (int j = 0; j < 10; ++j) {
      EXPECT_NEAR(r.omegas[j], omega[j], 1e-12);
      EXPECT_NEAR(r.revised[j], v[j] * omega[j], 1e-12);
      unknown += v[j] * (1.0 - omega[j]);
    }
    EXPECT_NEAR(r.unknown_mass, unknown, 1e-11);
  }
}

TEST(Recalibrate, MassIsRedistributed) {
  std::mt19937_64 rng(22);
  OpenMaxModel m = FitOpenMax(Fixture().train, OpenMaxParams{});
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(10);
    for (double& x : v) x = testing::Unit(rng) * 12.0;
    const RevisedVector r = Recalibrate(v, m);
    const double before = std::accumulate(v.begin(), v.end(), 0.0);
    const double after =
        std::accumulate(r.revised.begin(), r.revised.end(), r.unknown_mass);
    EXPECT_NEAR(after, before, 1e-12 * before);
    EXPECT_GE(r.unknown_mass, 0.0);
  }
}

TEST(Recalibrate, RankWeightDecreasesDownTheRanking) {
  // Equal means and equal Weibulls give every class the same F.
  const int n = 6;
  std::vector<std::vector<double>> mavs(n, std::vector<double>(n, 0.0));
  std::vector<WeibullParams> w(n, WeibullParams{1.0, 2.0});
  const OpenMaxModel m = HandModel(mavs, w, n);
  const std::vector<double> v = {0.5, 3, 1, 2.5, 0.2, 1.7};
  const RevisedVector r = Recalibrate(v, m);
  const std::vector<int> ranks = RankClasses(v);
  for (int i = 1; i < n; ++i) {
    EXPECT_GE(1.0 - r.omegas[ranks[i - 1]], 1.0 - r.omegas[ranks[i]]);
  }
  EXPECT_EQ(r.omegas[ranks[n - 1]], 1.0);
}

TEST(Recalibrate, DimensionMismatch) {
  const OpenMaxModel m = FitOpenMax(Fixture().train, OpenMaxParams{});
  EXPECT_THROW(Recalibrate(std::vector<double>(3, 1.0), m), Error);
}

TEST(RankClasses, StableDescending) {
  EXPECT_EQ(RankClasses(std::vector<double>{1, 3, 3, 0}),
            (std::vector<int>{1, 2, 0, 3}));
}

TEST(OpenMaxPredict, UnknownDominates) {
  OpenMaxModel m = HandModel({{0, 0}, {0, 0}}, {{1.0, 1e-9}, {1.0, 1e-9}}, 1);
  m.params.omega_mode = OmegaMode::kPlainCdf;
  const SampleRecord r = SampleRecord::Outlier(1, {10, 0});
  const ScoredSample s = OpenMaxPredict(r, m);
  EXPECT_EQ(s.predicted_class, 2);
  EXPECT_EQ(s.verdict, Verdict::kReject);

  m.params.unknown_rule = UnknownRule::kAcceptLiteral;
  EXPECT_EQ(OpenMaxPredict(r, m).verdict, Verdict::kAccept);
}

TEST(OpenMaxPredict, ZeroUnknownMassNeverWins) {
  const std::vector<double> v = {-3, -1, -2};
  const OpenMaxModel m = HandModel({v, v, v}, {{1, 1}, {1, 1}, {1, 1}}, 3);
  const ScoredSample s = OpenMaxPredict(SampleRecord::Inlier(1, 1, v), m);
  EXPECT_EQ(s.predicted_class, 1);
}

TEST(OpenMaxPredict, AnomalyBounds) {
  OpenMaxModel m = FitOpenMax(Fixture().train, OpenMaxParams{});
  for (ScoreDomain domain :
       {ScoreDomain::kKnownClasses, ScoreDomain::kWithUnknown}) {
    m.params.score_domain = domain;
    const double cap =
        1.0 - 1.0 / (domain == ScoreDomain::kKnownClasses ? 10 : 11);
    for (const ActivationDump* d : {&Fixture().test, &Fixture().outlier}) {
      for (const SampleRecord& r : d->records) {
        const ScoredSample s = OpenMaxPredict(r, m);
        EXPECT_GE(s.anomaly.value(), 0.0);
        EXPECT_LE(s.anomaly.value(), cap + 1e-15);
        if (s.predicted_class < 10) {
          EXPECT_EQ(s.verdict, ThresholdVerdict(s.anomaly, m.params.epsilon));
        } else {
          EXPECT_EQ(s.verdict, Verdict::kReject);
        }
      }
    }
  }
}

TEST(OpenMaxPredict, WithUnknownDomainReducesToAugmentedBaseline) {
  const std::vector<double> v = {2, 0.5, -1};
  OpenMaxModel m = HandModel({v, v, v}, {{1, 1}, {1, 1}, {1, 1}}, 3);
  m.params.score_domain = ScoreDomain::kWithUnknown;
  const ScoredSample s = OpenMaxPredict(SampleRecord::Inlier(1, 0, v), m);
  EXPECT_EQ(s.anomaly, BaselineScore(std::vector<double>{2, 0.5, -1, 0}));
}

TEST(OpenMaxSupervisor, MatchesPredict) {
  const OpenMaxModel m = FitOpenMax(Fixture().train, OpenMaxParams{});
  const OpenMaxSupervisor sup(m);
  EXPECT_EQ(sup.name(), "OpenMax");
  const SampleRecord& r = Fixture().outlier.records[3];
  EXPECT_EQ(sup.Score(r), OpenMaxPredict(r, m));
}

TEST(ModelJson, RoundTripIsExact) {
  OpenMaxParams p;
  p.distance = Distance::kEuCos;
  p.omega_mode = OmegaMode::kPlainCdf;
  p.unknown_rule = UnknownRule::kAcceptLiteral;
  p.score_domain = ScoreDomain::kWithUnknown;
  p.epsilon = 0.1;
  const OpenMaxModel m = FitOpenMax(Fixture().train, p);
  EXPECT_EQ(ModelFromJson(ModelToJson(m)), m);

  testing::TempDir tmp;
  const std::string path = (tmp.path() / "model.json").string();
  SaveModel(m, path);
  EXPECT_EQ(LoadModel(path), m);
}

TEST(ModelJson, RejectsMalformed) {
  EXPECT_THROW(ModelFromJson("{"), Error);
  EXPECT_THROW(ModelFromJson(R"({"params": {}, "classes": []})"), Error);
}

}  // namespace
}  // namespace oodkit
