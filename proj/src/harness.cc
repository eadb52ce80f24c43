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

#include "oodkit/harness.h"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "oodkit/parallel.h"

namespace oodkit {

namespace fs = std::filesystem;

std::string_view SupervisorName(SupervisorKind kind) {
  return kind == SupervisorKind::kBaseline ? "Baseline" : "OpenMax";
}

SupervisorKind ParseSupervisor(std::string_view name) {
  if (name == "baseline" || name == "Baseline") return SupervisorKind::kBaseline;
  if (name == "openmax" || name == "OpenMax") return SupervisorKind::kOpenMax;
  throw Error(ErrorCode::kUsage, fmt::format("unknown supervisor '{}'", name));
}

Objective ParseObjective(std::string_view name) {
  if (name == "auroc") return Objective::kAuroc;
  if (name == "auprc") return Objective::kAuprc;
  if (name == "cbpl") return Objective::kCbpl;
  throw Error(ErrorCode::kUsage, fmt::format("unknown objective '{}'", name));
}

std::string_view ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kAuroc: return "auroc";
    case Objective::kAuprc: return "auprc";
    case Objective::kCbpl: return "cbpl";
  }
  return "";
}

SweepGrid DefaultGrid(int n_classes) {
  SweepGrid grid;
  grid.etas = {10, 20, 50, 100};
  for (int a = 1; a <= n_classes; ++a) grid.alphas.push_back(a);
  grid.distances = {Distance::kEuclidean};
  grid.omega_modes = {OmegaMode::kRankWeighted};
  return grid;
}

namespace {

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  }
  return out;
}

ActivationDump LoadRequired(const fs::path& path, std::string_view flag) {
  if (path.empty()) {
    throw Error(ErrorCode::kUsage, fmt::format("missing {}", flag));
  }
  return LoadDump(path);
}

void CheckSameClasses(const ActivationDump& a, const ActivationDump& b) {
  if (a.n_classes != b.n_classes) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("dumps disagree on class count ({} vs {})",
                            a.n_classes, b.n_classes));
  }
}

OpenMaxModel FitFromRun(const RunSpec& run) {
  ActivationDump train = LoadRequired(run.train, "--train");
  if (train.manifest.split != Split::kTrainCorrectOnly) {
    throw Error(ErrorCode::kInvalidRecord,
                fmt::format("{} is a {} dump, fit needs TrainCorrectOnly",
                            run.train.string(),
                            SplitName(train.manifest.split)));
  }
  return FitOpenMax(train, run.params, run.threads);
}

}  // namespace

std::vector<ScoredSample> ScoreDump(const ActivationDump& dump,
                                    const Supervisor& supervisor,
                                    int threads) {
  std::vector<ScoredSample> out(dump.records.size());
  ParallelFor(dump.records.size(), threads, [&](std::size_t i) {
    out[i] = supervisor.Score(dump.records[i]);
  });
  return out;
}

std::string ParamsEcho(SupervisorKind kind, const OpenMaxParams& params) {
  if (kind == SupervisorKind::kBaseline) {
    return fmt::format("epsilon={}", FormatReal(params.epsilon));
  }
  return fmt::format(
      "eta={};alpha={};distance={};omega_mode={};score_domain={};epsilon={}",
      params.eta, params.alpha, DistanceName(params.distance),
      OmegaModeName(params.omega_mode), ScoreDomainName(params.score_domain),
      FormatReal(params.epsilon));
}

Evaluation Evaluate(const ActivationDump& test, const ActivationDump& outlier,
                    const Supervisor& supervisor, SupervisorKind kind,
                    const OpenMaxParams& params, Fnr95Mode fnr95_mode,
                    int threads) {
  CheckSameClasses(test, outlier);
  if (!test.manifest.reference_accuracy.has_value()) {
    throw Error(ErrorCode::kInvalidRecord,
                "test manifest carries no reference_accuracy");
  }
  Evaluation ev;
  for (const ActivationDump* dump : {&test, &outlier}) {
    std::vector<ScoredSample> part = ScoreDump(*dump, supervisor, threads);
    for (std::size_t i = 0; i < part.size(); ++i) {
      const SampleRecord& r = dump->records[i];
      LabeledScore ls;
      ls.anomaly = part[i].anomaly.value();
      ls.is_outlier = r.origin == Origin::kOutlier;
      ls.inlier_correct = !ls.is_outlier && part[i].predicted_class == *r.true_label;
      ev.labeled.push_back(ls);
      ev.origins.push_back(r.origin);
      ev.scored.push_back(part[i]);
    }
  }
  ev.curves = BuildCurves(ev.labeled);

  ReportMetadata meta;
  meta.supervisor = std::string(SupervisorName(kind));
  meta.params = ParamsEcho(kind, params);
  meta.model_name = test.manifest.model_name;
  meta.augmented = test.manifest.augmented.value_or("-");
  meta.epoch = test.manifest.epoch;
  meta.loss = test.manifest.loss;
  meta.fnr95_mode = fnr95_mode;
  ev.report = FullReport(ev.labeled, ev.curves,
                         *test.manifest.reference_accuracy, meta);
  return ev;
}

std::unique_ptr<Supervisor> MakeSupervisor(const RunSpec& run, int n_classes) {
  if (run.supervisor == SupervisorKind::kBaseline) {
    return std::make_unique<BaselineSupervisor>(
        SupervisorConfig{run.params.epsilon});
  }
  OpenMaxModel model;
  if (!run.model.empty()) {
    model = LoadModel(run.model.string());
    // Scoring-time flags override what was stored with the fit.
    model.params.alpha = run.params.alpha;
    model.params.epsilon = run.params.epsilon;
    model.params.omega_mode = run.params.omega_mode;
    model.params.unknown_rule = run.params.unknown_rule;
    model.params.score_domain = run.params.score_domain;
  } else {
    model = FitFromRun(run);
  }
  if (model.n_classes() != n_classes) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("model has {} classes, dump has {}",
                            model.n_classes(), n_classes));
  }
  return std::make_unique<OpenMaxSupervisor>(std::move(model));
}

void CmdFit(const RunSpec& run, std::ostream& log) {
  if (run.supervisor == SupervisorKind::kBaseline) {
    fmt::print(log,
               "Baseline needs no fitting: it scores raw softmax confidence. "
               "Nothing written.\n");
    return;
  }
  OpenMaxModel model = FitFromRun(run);
  EnsureDir(run.out_dir);
  const fs::path path = run.out_dir / "model.json";
  SaveModel(model, path.string());
  fmt::print(log, "fitted {} classes (eta={}, distance={}) -> {}\n",
             model.n_classes(), model.params.eta,
             DistanceName(model.params.distance), path.string());
  for (const WeibullClassModel& c : model.classes) {
    fmt::print(log, "  class {:>3}: shape={:.6g} scale={:.6g} tail={}\n",
               c.class_index, c.weibull.shape, c.weibull.scale, c.tail_size);
  }
}

void CmdScore(const RunSpec& run, std::ostream& log) {
  std::vector<ActivationDump> dumps;
  if (!run.test.empty()) dumps.push_back(LoadDump(run.test));
  if (!run.outlier.empty()) dumps.push_back(LoadDump(run.outlier));
  if (dumps.empty()) {
    throw Error(ErrorCode::kUsage, "score needs --test and/or --outlier");
  }
  for (const ActivationDump& d : dumps) CheckSameClasses(dumps.front(), d);
  std::unique_ptr<Supervisor> supervisor =
      MakeSupervisor(run, dumps.front().n_classes);

  EnsureDir(run.out_dir);
  const fs::path path = run.out_dir / "scores.csv";
  std::ofstream out = OpenOut(path);
  out << "sample_id,origin,anomaly,predicted_class,verdict\n";
  std::size_t rows = 0;
  for (const ActivationDump& d : dumps) {
    std::vector<ScoredSample> scored = ScoreDump(d, *supervisor, run.threads);
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const ScoredSample& s = scored[i];
      out << s.sample_id << ','
          << (d.records[i].origin == Origin::kInlier ? "inlier" : "outlier")
          << ',' << FormatReal(s.anomaly.value()) << ',' << s.predicted_class
          << ',' << VerdictName(s.verdict) << '\n';
    }
    rows += scored.size();
  }
  fmt::print(log, "scored {} samples with {} -> {}\n", rows,
             supervisor->name(), path.string());
}

namespace {

void WriteEvaluation(const Evaluation& ev, const fs::path& dir) {
  EnsureDir(dir);
  {
    std::ofstream out = OpenOut(dir / "report.csv");
    out << ReportCsvHeader() << '\n' << ReportCsvRow(ev.report) << '\n';
  }
  {
    std::ofstream out = OpenOut(dir / "report.json");
    out << ReportToJson(ev.report);
  }
  {
    std::ofstream out = OpenOut(dir / "roc.csv");
    WriteRocCsv(ev.curves, out);
  }
  {
    std::ofstream out = OpenOut(dir / "pr.csv");
    WritePrCsv(ev.curves, out);
  }
  {
    std::ofstream out = OpenOut(dir / "coverage.csv");
    WriteCoverageCsv(ev.curves, out);
  }
}

MetricReport EvaluateRun(const RunSpec& run, Evaluation* keep) {
  ActivationDump test = LoadRequired(run.test, "--test");
  ActivationDump outlier = LoadRequired(run.outlier, "--outlier");
  CheckSameClasses(test, outlier);
  std::unique_ptr<Supervisor> supervisor = MakeSupervisor(run, test.n_classes);
  Evaluation ev = Evaluate(test, outlier, *supervisor, run.supervisor,
                           run.params, run.fnr95_mode, run.threads);
  MetricReport report = ev.report;
  if (keep != nullptr) *keep = std::move(ev);
  return report;
}

}  // namespace

MetricReport CmdEval(const RunSpec& run, std::ostream& log) {
  if (run.test.empty() || run.outlier.empty()) {
    throw Error(ErrorCode::kUsage, "eval needs both --test and --outlier");
  }
  Evaluation ev;
  EvaluateRun(run, &ev);
  WriteEvaluation(ev, run.out_dir);
  fmt::print(log, "{}\n{}\n", ReportCsvHeader(), ReportCsvRow(ev.report));
  return ev.report;
}

namespace {

double ObjectiveValue(const MetricReport& r, Objective objective) {
  switch (objective) {
    case Objective::kAuroc: return r.auroc;
    case Objective::kAuprc: return r.auprc;
    case Objective::kCbpl: return r.cbpl;
  }
  return 0.0;
}

auto GridKey(const OpenMaxParams& p) {
  return std::make_tuple(p.eta, p.alpha, static_cast<int>(p.distance),
                         static_cast<int>(p.omega_mode));
}

}  // namespace

std::vector<SweepRow> CmdSweep(const SweepGrid& grid, const RunSpec& run,
                               std::ostream& log) {
  if (grid.size() == 0) throw Error(ErrorCode::kUsage, "empty sweep grid");
  if (run.test.empty() || run.outlier.empty() || run.train.empty()) {
    throw Error(ErrorCode::kUsage,
                "sweep needs --train, --test and --outlier");
  }
  ActivationDump train = LoadDump(run.train);
  ActivationDump test = LoadDump(run.test);
  ActivationDump outlier = LoadDump(run.outlier);
  CheckSameClasses(train, test);
  CheckSameClasses(test, outlier);

  std::vector<SweepRow> rows;
  for (int eta : grid.etas) {
    for (int alpha : grid.alphas) {
      for (Distance distance : grid.distances) {
        for (OmegaMode omega : grid.omega_modes) {
          SweepRow row;
          row.params = run.params;
          row.params.eta = eta;
          row.params.alpha = alpha;
          row.params.distance = distance;
          row.params.omega_mode = omega;
          rows.push_back(row);
        }
      }
    }
  }

  // Fits depend only on (eta, distance); share them across the grid.
  std::map<std::pair<int, int>, std::size_t> fit_index;
  std::vector<OpenMaxParams> fit_params;
  for (const SweepRow& row : rows) {
    auto key = std::make_pair(row.params.eta,
                              static_cast<int>(row.params.distance));
    if (fit_index.emplace(key, fit_params.size()).second) {
      OpenMaxParams p = row.params;
      p.alpha = 1;
      fit_params.push_back(p);
    }
  }
  std::vector<std::optional<OpenMaxModel>> fits(fit_params.size());
  std::vector<std::string> fit_errors(fit_params.size());
  ParallelFor(fit_params.size(), run.threads, [&](std::size_t i) {
    try {
      fits[i] = FitOpenMax(train, fit_params[i]);
    } catch (const Error& e) {
      fit_errors[i] = e.what();
    }
  });

  ParallelFor(rows.size(), run.threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    const std::size_t f = fit_index.at(
        {row.params.eta, static_cast<int>(row.params.distance)});
    if (!fits[f].has_value()) {
      row.failure = fit_errors[f];
      return;
    }
    try {
      OpenMaxModel model = *fits[f];
      model.params = row.params;
      OpenMaxSupervisor supervisor(std::move(model));
      row.report = Evaluate(test, outlier, supervisor, SupervisorKind::kOpenMax,
                            row.params, run.fnr95_mode, 1)
                       .report;
      row.ok = true;
    } catch (const Error& e) {
      row.failure = e.what();
    }
  });

  std::stable_sort(rows.begin(), rows.end(),
                   [&](const SweepRow& a, const SweepRow& b) {
                     if (a.ok != b.ok) return a.ok;
                     if (a.ok) {
                       const double va = ObjectiveValue(a.report, grid.objective);
                       const double vb = ObjectiveValue(b.report, grid.objective);
                       if (va != vb) return va > vb;
                     }
                     return GridKey(a.params) < GridKey(b.params);
                   });

  EnsureDir(run.out_dir);
  const fs::path path = run.out_dir / "sweep.csv";
  std::ofstream out = OpenOut(path);
  out << "rank,eta,alpha,distance,omega_mode,status,AUROC,AUPRC,TPR05,FNR95,"
         "P95,CBPL,CBFAD,error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    out << (i + 1) << ',' << r.params.eta << ',' << r.params.alpha << ','
        << DistanceName(r.params.distance) << ','
        << OmegaModeName(r.params.omega_mode) << ','
        << (r.ok ? "ok" : "failed");
    if (r.ok) {
      const MetricReport& m = r.report;
      out << ',' << FormatReal(m.auroc) << ',' << FormatReal(m.auprc) << ','
          << FormatReal(m.tpr05) << ',' << FormatReal(m.fnr95) << ','
          << FormatReal(m.p95) << ',' << FormatReal(m.cbpl) << ','
          << FormatReal(m.cbfad) << ",\n";
    } else {
      std::string message = r.failure;
      std::replace(message.begin(), message.end(), ',', ';');
      out << ",,,,,,,," << message << '\n';
    }
  }

  const std::size_t failed = static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(),
                    [](const SweepRow& r) { return !r.ok; }));
  fmt::print(log, "swept {} grid points ({} failed) -> {}\n", rows.size(),
             failed, path.string());
  if (rows.front().ok) {
    fmt::print(log, "best by {}: {} = {}\n", ObjectiveName(grid.objective),
               ParamsEcho(SupervisorKind::kOpenMax, rows.front().params),
               FormatReal(ObjectiveValue(rows.front().report, grid.objective)));
  } else {
    fmt::print(log, "no grid point could be fitted\n");
  }
  return rows;
}

std::vector<MetricReport> CmdSeries(const std::vector<RunSpec>& runs,
                                    const fs::path& out_dir,
                                    std::ostream& log) {
  if (runs.empty()) throw Error(ErrorCode::kUsage, "series needs dumps");
  std::vector<MetricReport> reports;
  std::set<int> epochs;
  std::optional<int> n_classes;
  for (const RunSpec& run : runs) {
    ActivationDump test = LoadRequired(run.test, "--test");
    if (n_classes && *n_classes != test.n_classes) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "series dumps disagree on class count");
    }
    n_classes = test.n_classes;
    if (!epochs.insert(test.manifest.epoch).second) {
      throw Error(ErrorCode::kInvalidRecord,
                  fmt::format("epoch {} appears twice", test.manifest.epoch));
    }
    reports.push_back(EvaluateRun(run, nullptr));
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MetricReport& a, const MetricReport& b) {
                     return a.metadata.epoch < b.metadata.epoch;
                   });

  EnsureDir(out_dir);
  const fs::path path = out_dir / "series.csv";
  std::ofstream out = OpenOut(path);
  out << "epoch,reference_accuracy,supervisor,AUROC,AUPRC,TPR05,FNR95,P95,"
         "CBPL,CBFAD\n";
  for (const MetricReport& r : reports) {
    out << r.metadata.epoch << ',' << FormatReal(r.reference_accuracy) << ','
        << r.metadata.supervisor << ',' << FormatReal(r.auroc) << ','
        << FormatReal(r.auprc) << ',' << FormatReal(r.tpr05) << ','
        << FormatReal(r.fnr95) << ',' << FormatReal(r.p95) << ','
        << FormatReal(r.cbpl) << ',' << FormatReal(r.cbfad) << '\n';
  }
  fmt::print(log, "evaluated {} epochs -> {}\n", reports.size(),
             path.string());
  return reports;
}

void CmdSynth(const SyntheticSpec& spec, const fs::path& out_dir,
              std::ostream& log) {
  WriteSynthetic(spec, out_dir);
  fmt::print(log, "wrote synthetic dumps (seed {}, overlap {}, epoch {}) to {}\n",
             spec.seed, FormatReal(spec.overlap), spec.epoch, out_dir.string());
}

std::vector<SyntheticSpec> SeparabilitySeries(const SyntheticSpec& base,
                                              int epochs, double overlap_start,
                                              double overlap_end) {
  if (epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "series needs at least 1 epoch");
  }
  std::vector<SyntheticSpec> specs;
  for (int i = 0; i < epochs; ++i) {
    SyntheticSpec s = base;
    const double t = epochs == 1 ? 0.0 : static_cast<double>(i) / (epochs - 1);
    s.overlap = overlap_start + (overlap_end - overlap_start) * t;
    s.epoch = 10 * (i + 1);
    specs.push_back(s);
  }
  return specs;
}

std::string SeriesDirName(int epoch) {
  return fmt::format("epoch_{:03d}", epoch);
}

int ExitCodeFor(const Error& error) {
  if (error.code() == ErrorCode::kUsage) return 2;
  if (error.IsFitFailure()) return 4;
  return 3;
}

}  // namespace oodkit
