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

#include "oodkit/metrics.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "oodkit/error.h"

namespace oodkit {

namespace {

void CheckScores(std::span<const LabeledScore> scores) {
  for (const LabeledScore& s : scores) {
    if (std::isnan(s.anomaly)) {
      throw Error(ErrorCode::kInvalidArgument, "NaN anomaly score");
    }
    if (s.is_outlier && s.inlier_correct) {
      throw Error(ErrorCode::kInvalidArgument,
                  "an outlier cannot be a correct classification");
    }
  }
}

// Tie order for coverage prefixes: pessimistic, errors first.
int TieRank(const LabeledScore& s) {
  if (s.is_outlier) return 0;
  return s.inlier_correct ? 2 : 1;
}

}  // namespace

CurveSet BuildCurves(std::span<const LabeledScore> scores) {
  CheckScores(scores);
  CurveSet curves;
  for (const LabeledScore& s : scores) {
    (s.is_outlier ? curves.positives : curves.negatives) += 1;
  }
  if (curves.positives == 0 || curves.negatives == 0) {
    throw Error(ErrorCode::kSingleClass,
                fmt::format("need inliers and outliers, got {} and {}",
                            curves.negatives, curves.positives));
  }

  std::vector<LabeledScore> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledScore& a, const LabeledScore& b) {
                     return a.anomaly > b.anomaly;
                   });

  const auto pos = static_cast<double>(curves.positives);
  const auto neg = static_cast<double>(curves.negatives);
  curves.roc.push_back(
      {std::numeric_limits<double>::infinity(), 0, 0, 0.0, 0.0});
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].is_outlier ? tp : fp) += 1;
    if (i + 1 < sorted.size() && sorted[i + 1].anomaly == sorted[i].anomaly) {
      continue;
    }
    const double t = sorted[i].anomaly;
    curves.roc.push_back({t, fp, tp, fp / neg, tp / pos});
    curves.pr.push_back({t, tp, tp + fp, tp / pos,
                         static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  curves.coverage = CoverageCurve(scores);
  return curves;
}

double Auroc(const CurveSet& curves) {
  // Twice the trapezoid area in count units; exact in integers.
  std::int64_t twice_area = 0;
  for (std::size_t i = 1; i < curves.roc.size(); ++i) {
    const RocPoint& a = curves.roc[i - 1];
    const RocPoint& b = curves.roc[i];
    twice_area += (b.false_positives - a.false_positives) *
                  (b.true_positives + a.true_positives);
  }
  return static_cast<double>(twice_area) /
         (2.0 * static_cast<double>(curves.positives) *
          static_cast<double>(curves.negatives));
}

double Auprc(const CurveSet& curves) {
  double area = 0.0;
  std::int64_t prev_tp = 0;
  for (const PrPoint& p : curves.pr) {
    const std::int64_t gained = p.true_positives - prev_tp;
    if (gained > 0) {
      area += static_cast<double>(gained) /
              static_cast<double>(curves.positives) * p.precision;
    }
    prev_tp = p.true_positives;
  }
  return area;
}

namespace {

double Interpolate(double x0, double y0, double x1, double y1, double x) {
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

// Value of the ROC polyline at fpr = level, taking the highest TPR where
// the curve is vertical.
double TprAtFpr(const CurveSet& curves, double level) {
  const auto& roc = curves.roc;
  std::size_t i = 0;
  while (i + 1 < roc.size() && roc[i + 1].fpr <= level) ++i;
  if (i + 1 == roc.size()) return roc[i].tpr;
  return Interpolate(roc[i].fpr, roc[i].tpr, roc[i + 1].fpr, roc[i + 1].tpr,
                     level);
}

// Value of the PR polyline where recall first reaches `level`.
double PrecisionAtRecall(const CurveSet& curves, double level) {
  const auto& pr = curves.pr;
  std::size_t j = 0;
  while (j < pr.size() && pr[j].recall < level) ++j;
  if (j == pr.size()) return pr.back().precision;
  if (j == 0) return pr.front().precision;
  return Interpolate(pr[j - 1].recall, pr[j - 1].precision, pr[j].recall,
                     pr[j].precision, level);
}

}  // namespace

double RateAt(const CurveSet& curves, RateKind kind, double level) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("operating level {} outside [0, 1]", level));
  }
  if (curves.roc.empty() || curves.pr.empty()) {
    throw Error(ErrorCode::kEmptyInput, "empty curve set");
  }
  double value = 0.0;
  switch (kind) {
    case RateKind::kTprAtFpr:
      value = TprAtFpr(curves, level);
      break;
    case RateKind::kFnrAtFpr:
      value = 1.0 - TprAtFpr(curves, level);
      break;
    case RateKind::kPrecisionAtRecall:
      value = PrecisionAtRecall(curves, level);
      break;
  }
  return std::clamp(value, 0.0, 1.0);
}

std::string_view Fnr95ModeName(Fnr95Mode mode) {
  return mode == Fnr95Mode::kTnr95 ? "tnr95" : "fpr95";
}

Fnr95Mode ParseFnr95Mode(std::string_view name) {
  if (name == "tnr95") return Fnr95Mode::kTnr95;
  if (name == "fpr95") return Fnr95Mode::kFpr95;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown FNR95 mode '{}'", name));
}

std::vector<CoveragePoint> CoverageCurve(std::span<const LabeledScore> scores) {
  CheckScores(scores);
  std::vector<LabeledScore> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledScore& a, const LabeledScore& b) {
                     if (a.anomaly != b.anomaly) return a.anomaly < b.anomaly;
                     return TieRank(a) < TieRank(b);
                   });
  std::vector<CoveragePoint> curve;
  curve.reserve(sorted.size());
  const auto n = static_cast<double>(sorted.size());
  std::int64_t correct = 0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    if (sorted[k - 1].inlier_correct) ++correct;
    curve.push_back({static_cast<double>(k) / n,
                     static_cast<double>(correct) / static_cast<double>(k)});
  }
  return curve;
}

CoverageBreakpoints ComputeCoverageBreakpoints(
    std::span<const LabeledScore> scores, double reference_accuracy) {
  if (scores.empty()) {
    throw Error(ErrorCode::kEmptyInput, "coverage of an empty score list");
  }
  if (!(reference_accuracy >= 0.0 && reference_accuracy <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("reference accuracy {} outside [0, 1]",
                            reference_accuracy));
  }
  CheckScores(scores);
  std::vector<LabeledScore> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledScore& a, const LabeledScore& b) {
                     if (a.anomaly != b.anomaly) return a.anomaly < b.anomaly;
                     return TieRank(a) < TieRank(b);
                   });
  const auto n = static_cast<double>(sorted.size());
  CoverageBreakpoints out;
  std::int64_t correct = 0;
  bool clean = true;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    const LabeledScore& s = sorted[k - 1];
    if (s.inlier_correct) ++correct;
    if (s.is_outlier) clean = false;
    const double coverage = static_cast<double>(k) / n;
    if (static_cast<double>(correct) / static_cast<double>(k) >=
        reference_accuracy) {
      out.cbpl = coverage;
    }
    if (clean) out.cbfad = coverage;
  }
  return out;
}

MetricReport FullReport(std::span<const LabeledScore> scores,
                        double reference_accuracy,
                        const ReportMetadata& metadata) {
  return FullReport(scores, BuildCurves(scores), reference_accuracy, metadata);
}

MetricReport FullReport(std::span<const LabeledScore> scores,
                        const CurveSet& curves, double reference_accuracy,
                        const ReportMetadata& metadata) {
  MetricReport r;
  r.auroc = Auroc(curves);
  r.auprc = Auprc(curves);
  r.tpr05 = RateAt(curves, RateKind::kTprAtFpr, 0.05);
  r.fnr95 = RateAt(curves, RateKind::kFnrAtFpr,
                   metadata.fnr95_mode == Fnr95Mode::kTnr95 ? 0.05 : 0.95);
  r.p95 = RateAt(curves, RateKind::kPrecisionAtRecall, 0.95);
  const CoverageBreakpoints cb =
      ComputeCoverageBreakpoints(scores, reference_accuracy);
  r.cbpl = cb.cbpl;
  r.cbfad = cb.cbfad;
  r.reference_accuracy = reference_accuracy;
  r.metadata = metadata;
  return r;
}

std::string FormatReal(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

void WriteRocCsv(const CurveSet& curves, std::ostream& out) {
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : curves.roc) {
    out << FormatReal(p.threshold) << ',' << FormatReal(p.fpr) << ','
        << FormatReal(p.tpr) << '\n';
  }
}

void WritePrCsv(const CurveSet& curves, std::ostream& out) {
  out << "threshold,recall,precision\n";
  for (const PrPoint& p : curves.pr) {
    out << FormatReal(p.threshold) << ',' << FormatReal(p.recall) << ','
        << FormatReal(p.precision) << '\n';
  }
}

void WriteCoverageCsv(const CurveSet& curves, std::ostream& out) {
  out << "coverage,accuracy\n";
  for (const CoveragePoint& p : curves.coverage) {
    out << FormatReal(p.coverage) << ',' << FormatReal(p.accuracy) << '\n';
  }
}

std::string ReportCsvHeader() {
  return "Model,Augmented,Supervisor,Epoch,Acc,Loss,AUROC,AUPRC,TPR05,FNR95,"
         "P95,CBPL,CBFAD";
}

std::string ReportCsvRow(const MetricReport& r) {
  const ReportMetadata& m = r.metadata;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", m.model_name,
                     m.augmented, m.supervisor, m.epoch,
                     FormatReal(r.reference_accuracy),
                     m.loss ? FormatReal(*m.loss) : std::string("NA"),
                     FormatReal(r.auroc), FormatReal(r.auprc),
                     FormatReal(r.tpr05), FormatReal(r.fnr95),
                     FormatReal(r.p95), FormatReal(r.cbpl),
                     FormatReal(r.cbfad));
}

std::string ReportToJson(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.metadata.model_name;
  j["epoch"] = r.metadata.epoch;
  j["supervisor"] = r.metadata.supervisor;
  j["params"] = r.metadata.params;
  j["fnr95_mode"] = std::string(Fnr95ModeName(r.metadata.fnr95_mode));
  j["reference_accuracy"] = r.reference_accuracy;
  j["auroc"] = r.auroc;
  j["auprc"] = r.auprc;
  j["tpr05"] = r.tpr05;
  j["fnr95"] = r.fnr95;
  j["p95"] = r.p95;
  j["cbpl"] = r.cbpl;
  j["cbfad"] = r.cbfad;
  return j.dump(2) + "\n";
}

}  // namespace oodkit
