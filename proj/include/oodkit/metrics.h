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

// Supervisor evaluation: ROC, precision-recall and coverage curves and the
// seven scalar metrics (AUROC, AUPRC, TPR05, FNR95, P95, CBPL, CBFAD).
//
// Outliers are the positive class. A sample is flagged as an outlier at
// threshold t iff its anomaly score is >= t, so all samples sharing a score
// move together. Every metric depends on the scores only through their
// order; any strictly increasing transform of the scores leaves all of them
// bit-identical.

#ifndef OODKIT_METRICS_H_
#define OODKIT_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oodkit {

struct LabeledScore {
  double anomaly = 0.0;
  bool is_outlier = false;
  // Classifier prediction matched the label. Always false for outliers.
  bool inlier_correct = false;
};

struct RocPoint {
  // +infinity for the leading (0, 0) point.
  double threshold = 0.0;
  std::int64_t false_positives = 0;
  std::int64_t true_positives = 0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct PrPoint {
  double threshold = 0.0;
  std::int64_t true_positives = 0;
  std::int64_t flagged = 0;
  double recall = 0.0;
  double precision = 0.0;
};

struct CoveragePoint {
  double coverage = 0.0;
  double accuracy = 0.0;
};

struct CurveSet {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  // (0, 0) followed by one point per distinct score, in decreasing
  // threshold order. The last point is always (1, 1).
  std::vector<RocPoint> roc;
  // One point per distinct score, in decreasing threshold order.
  std::vector<PrPoint> pr;
  // One point per accepted-prefix size k = 1..n.
  std::vector<CoveragePoint> coverage;
};

// Throws Error(kSingleClass) unless there is at least one inlier and one
// outlier, Error(kInvalidArgument) on NaN scores or outliers marked correct.
CurveSet BuildCurves(std::span<const LabeledScore> scores);

// Trapezoidal area, accumulated on integer counts. Equal to the
// Mann-Whitney statistic with ties counted 1/2.
double Auroc(const CurveSet& curves);

// Step-wise area: sum over thresholds of delta-recall times precision.
double Auprc(const CurveSet& curves);

enum class RateKind { kTprAtFpr, kFnrAtFpr, kPrecisionAtRecall };

// Linear interpolation on the ROC polyline (in FPR) or the PR polyline (in
// recall). Outside the curve support the endpoint value is returned.
double RateAt(const CurveSet& curves, RateKind kind, double level);

// FNR95 reading: false negative rate at 95% true negative rate
// (FPR = 0.05, the default) or at 95% false positive rate.
enum class Fnr95Mode { kTnr95, kFpr95 };

std::string_view Fnr95ModeName(Fnr95Mode mode);
Fnr95Mode ParseFnr95Mode(std::string_view name);

struct CoverageBreakpoints {
  double cbpl = 0.0;
  double cbfad = 0.0;
};

// Samples are accepted in increasing score order. Among equal scores,
// outliers go first, then misclassified inliers, then correct inliers.
// Accepted outliers count as errors.
std::vector<CoveragePoint> CoverageCurve(std::span<const LabeledScore> scores);

// CBPL: largest coverage whose accepted accuracy is >= reference_accuracy,
// 0 if none. CBFAD: largest outlier-free accepted prefix.
CoverageBreakpoints ComputeCoverageBreakpoints(
    std::span<const LabeledScore> scores, double reference_accuracy);

struct ReportMetadata {
  std::string supervisor = "Baseline";
  std::string params;  // echo of the supervisor settings
  std::string model_name;
  std::string augmented = "-";
  int epoch = 0;
  std::optional<double> loss;
  Fnr95Mode fnr95_mode = Fnr95Mode::kTnr95;
};

struct MetricReport {
  double auroc = 0.0;
  double auprc = 0.0;
  double tpr05 = 0.0;
  double fnr95 = 0.0;
  double p95 = 0.0;
  double cbpl = 0.0;
  double cbfad = 0.0;
  double reference_accuracy = 0.0;
  ReportMetadata metadata;
};

MetricReport FullReport(std::span<const LabeledScore> scores,
                        double reference_accuracy,
                        const ReportMetadata& metadata);
MetricReport FullReport(std::span<const LabeledScore> scores,
                        const CurveSet& curves, double reference_accuracy,
                        const ReportMetadata& metadata);

// Shortest round-trip decimal form used by every CSV writer.
std::string FormatReal(double value);

void WriteRocCsv(const CurveSet& curves, std::ostream& out);
void WritePrCsv(const CurveSet& curves, std::ostream& out);
void WriteCoverageCsv(const CurveSet& curves, std::ostream& out);

// Model,Augmented,Supervisor,Epoch,Acc,Loss,AUROC,AUPRC,TPR05,FNR95,P95,
// CBPL,CBFAD
std::string ReportCsvHeader();
std::string ReportCsvRow(const MetricReport& report);
std::string ReportToJson(const MetricReport& report);

}  // namespace oodkit

#endif  // OODKIT_METRICS_H_
