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

// Implementation of the `oodkit` subcommands. Each command reads dumps,
// writes its outputs under RunSpec::out_dir and logs a short summary.

#ifndef OODKIT_HARNESS_H_
#define OODKIT_HARNESS_H_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oodkit/dump_io.h"
#include "oodkit/error.h"
#include "oodkit/metrics.h"
#include "oodkit/openmax.h"
#include "oodkit/supervisor.h"
#include "oodkit/synth.h"

namespace oodkit {

enum class SupervisorKind { kBaseline, kOpenMax };

std::string_view SupervisorName(SupervisorKind kind);
SupervisorKind ParseSupervisor(std::string_view name);

struct RunSpec {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path outlier;
  // Fitted OpenMax model; fitted from `train` on the fly when empty.
  std::filesystem::path model;
  SupervisorKind supervisor = SupervisorKind::kBaseline;
  // epsilon is shared by both supervisors.
  OpenMaxParams params;
  Fnr95Mode fnr95_mode = Fnr95Mode::kTnr95;
  std::filesystem::path out_dir = ".";
  int threads = 1;
};

enum class Objective { kAuroc, kAuprc, kCbpl };

Objective ParseObjective(std::string_view name);
std::string_view ObjectiveName(Objective objective);

struct SweepGrid {
  std::vector<int> etas;
  std::vector<int> alphas;
  std::vector<Distance> distances;
  std::vector<OmegaMode> omega_modes;
  Objective objective = Objective::kAuroc;

  std::size_t size() const {
    return etas.size() * alphas.size() * distances.size() * omega_modes.size();
  }
};

// eta in {10, 20, 50, 100}, alpha in 1..n_classes, Euclidean, rank-weighted.
SweepGrid DefaultGrid(int n_classes);

struct SweepRow {
  OpenMaxParams params;
  bool ok = false;
  std::string failure;
  MetricReport report;
};

// Everything one evaluation produces, kept in memory for reuse.
struct Evaluation {
  std::vector<ScoredSample> scored;
  std::vector<Origin> origins;
  std::vector<LabeledScore> labeled;
  CurveSet curves;
  MetricReport report;
};

// Scores every record; results are in record order whatever `threads` is.
std::vector<ScoredSample> ScoreDump(const ActivationDump& dump,
                                    const Supervisor& supervisor, int threads);

std::string ParamsEcho(SupervisorKind kind, const OpenMaxParams& params);

Evaluation Evaluate(const ActivationDump& test, const ActivationDump& outlier,
                    const Supervisor& supervisor, SupervisorKind kind,
                    const OpenMaxParams& params, Fnr95Mode fnr95_mode,
                    int threads);

// Builds the supervisor a RunSpec asks for, fitting OpenMax if needed.
std::unique_ptr<Supervisor> MakeSupervisor(const RunSpec& run, int n_classes);

// Writes model.json. Baseline has no fit step and only logs that.
void CmdFit(const RunSpec& run, std::ostream& log);

// Writes scores.csv: sample_id,origin,anomaly,predicted_class,verdict.
void CmdScore(const RunSpec& run, std::ostream& log);

// Writes report.csv, report.json, roc.csv, pr.csv and coverage.csv.
MetricReport CmdEval(const RunSpec& run, std::ostream& log);

// Writes sweep.csv ranked by the objective; failed grid points are kept
// (after the successful ones) with their error message.
std::vector<SweepRow> CmdSweep(const SweepGrid& grid, const RunSpec& run,
                               std::ostream& log);

// One row per epoch (taken from the test manifest), sorted by epoch, into
// `out_dir`/series.csv.
std::vector<MetricReport> CmdSeries(const std::vector<RunSpec>& runs,
                                    const std::filesystem::path& out_dir,
                                    std::ostream& log);

void CmdSynth(const SyntheticSpec& spec, const std::filesystem::path& out_dir,
              std::ostream& log);

// A fixture family for epoch-series studies: `epochs` specs whose overlap
// goes linearly from `overlap_start` to `overlap_end`, epochs tagged
// 10, 20, ... Directory names are epoch_010, epoch_020, ...
std::vector<SyntheticSpec> SeparabilitySeries(const SyntheticSpec& base,
                                              int epochs, double overlap_start,
                                              double overlap_end);
std::string SeriesDirName(int epoch);

// 2 usage, 3 data error, 4 fit failure.
int ExitCodeFor(const Error& error);

}  // namespace oodkit

#endif  // OODKIT_HARNESS_H_
