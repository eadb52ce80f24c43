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

// oodkit synth|fit|score|eval|sweep|series

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oodkit/harness.h"

namespace {

using namespace oodkit;

struct Flags {
  std::string train, test, outlier, model, out = ".";
  std::string supervisor = "baseline";
  std::vector<int> etas;
  std::vector<int> alphas;
  std::vector<std::string> distances;
  std::vector<std::string> omega_modes;
  double epsilon = 0.5;
  std::string fnr95_mode = "tnr95";
  bool accept_unknown_literal = false;
  std::string score_domain = "known";
  int threads = 1;
  std::string objective = "auroc";
  std::vector<std::string> series_dirs;
};

void AddRunFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--train", f.train, "TrainCorrectOnly dump");
  cmd->add_option("--test", f.test, "Test dump (inliers)");
  cmd->add_option("--outlier", f.outlier, "OutlierSet dump");
  cmd->add_option("--model", f.model, "fitted OpenMax model (JSON)");
  cmd->add_option("--supervisor", f.supervisor, "baseline|openmax")
      ->check(CLI::IsMember({"baseline", "openmax"}));
  cmd->add_option("--eta", f.etas, "Weibull tail size (list for sweep)")
      ->delimiter(',');
  cmd->add_option("--alpha", f.alphas, "classes to revise (list for sweep)")
      ->delimiter(',');
  cmd->add_option("--epsilon", f.epsilon, "acceptance threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--distance", f.distances, "euclidean|cosine|eucos")
      ->delimiter(',')
      ->check(CLI::IsMember({"euclidean", "cosine", "eucos"}));
  cmd->add_option("--omega-mode", f.omega_modes, "rank-weighted|plain-cdf")
      ->delimiter(',')
      ->check(CLI::IsMember({"rank-weighted", "plain-cdf"}));
  cmd->add_option("--fnr95-mode", f.fnr95_mode, "tnr95|fpr95")
      ->check(CLI::IsMember({"tnr95", "fpr95"}));
  cmd->add_flag("--accept-unknown-literal", f.accept_unknown_literal,
                "accept samples that the unknown class wins");
  cmd->add_option("--score-domain", f.score_domain,
                  "OpenMax anomaly softmax: known|with-unknown")
      ->check(CLI::IsMember({"known", "with-unknown"}));
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

template <typename T>
T Single(const std::vector<T>& values, T fallback, const char* flag) {
  if (values.empty()) return fallback;
  if (values.size() > 1) {
    throw Error(ErrorCode::kUsage,
                std::string(flag) + " takes one value outside sweep");
  }
  return values.front();
}

RunSpec ToRunSpec(const Flags& f) {
  RunSpec run;
  run.train = f.train;
  run.test = f.test;
  run.outlier = f.outlier;
  run.model = f.model;
  run.supervisor = ParseSupervisor(f.supervisor);
  run.params.eta = Single(f.etas, 20, "--eta");
  run.params.alpha = Single(f.alphas, 10, "--alpha");
  run.params.epsilon = f.epsilon;
  run.params.distance =
      ParseDistance(Single<std::string>(f.distances, "euclidean", "--distance"));
  run.params.omega_mode = ParseOmegaMode(
      Single<std::string>(f.omega_modes, "rank-weighted", "--omega-mode"));
  run.params.unknown_rule = f.accept_unknown_literal
                                ? UnknownRule::kAcceptLiteral
                                : UnknownRule::kReject;
  run.params.score_domain = ParseScoreDomain(f.score_domain);
  run.fnr95_mode = ParseFnr95Mode(f.fnr95_mode);
  run.out_dir = f.out;
  run.threads = f.threads;
  return run;
}

int NClassesOf(const std::string& path) {
  return LoadDump(path).n_classes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-distribution supervisor toolkit"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic dumps");
  SyntheticSpec spec;
  int series = 0;
  double overlap_end = 0.7;
  synth->add_option("--seed", spec.seed, "64-bit seed");
  synth->add_option("--classes", spec.n_classes, "class count");
  synth->add_option("--train-per-class", spec.train_per_class);
  synth->add_option("--test-per-class", spec.test_per_class);
  synth->add_option("--outliers", spec.n_outliers);
  synth->add_option("--mean-scale", spec.mean_scale);
  synth->add_option("--inlier-spread", spec.inlier_spread);
  synth->add_option("--outlier-spread", spec.outlier_spread);
  synth->add_option("--overlap", spec.overlap, "noise multiplier (>= 0)");
  synth->add_option("--confusable-fraction", spec.confusable_fraction,
                    "share of outliers drawn like inliers");
  synth->add_option("--confusable-scale", spec.confusable_scale,
                    "dominant logit of confusable outliers / mean scale");
  synth->add_option("--epoch", spec.epoch);
  synth->add_option("--model-name", spec.model_name);
  synth->add_option("--series", series,
                    "write this many epochs, overlap falling to --overlap-end");
  synth->add_option("--overlap-end", overlap_end);
  synth->add_option("--out", f.out, "output directory");

  CLI::App* fit = app.add_subcommand("fit", "fit OpenMax Weibull models");
  CLI::App* score = app.add_subcommand("score", "score dumps");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a supervisor");
  CLI::App* sweep = app.add_subcommand("sweep", "OpenMax grid search");
  CLI::App* series_cmd =
      app.add_subcommand("series", "evaluate an epoch series");
  for (CLI::App* cmd : {fit, score, eval, sweep, series_cmd}) {
    AddRunFlags(cmd, f);
  }
  sweep->add_option("--objective", f.objective, "auroc|auprc|cbpl")
      ->check(CLI::IsMember({"auroc", "auprc", "cbpl"}));
  series_cmd->add_option("--dir", f.series_dirs,
                         "epoch directory with train/test/outlier dumps")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (series > 0) {
        for (const SyntheticSpec& s :
             SeparabilitySeries(spec, series, spec.overlap, overlap_end)) {
          CmdSynth(s, std::filesystem::path(f.out) / SeriesDirName(s.epoch),
                   std::cout);
        }
      } else {
        CmdSynth(spec, f.out, std::cout);
      }
    } else if (fit->parsed()) {
      CmdFit(ToRunSpec(f), std::cout);
    } else if (score->parsed()) {
      CmdScore(ToRunSpec(f), std::cout);
    } else if (eval->parsed()) {
      CmdEval(ToRunSpec(f), std::cout);
    } else if (sweep->parsed()) {
      if (f.train.empty() || f.test.empty() || f.outlier.empty()) {
        throw Error(ErrorCode::kUsage,
                    "sweep needs --train, --test and --outlier");
      }
      SweepGrid grid = DefaultGrid(NClassesOf(f.test));
      if (!f.etas.empty()) grid.etas = f.etas;
      if (!f.alphas.empty()) grid.alphas = f.alphas;
      if (!f.distances.empty()) {
        grid.distances.clear();
        for (const auto& d : f.distances) grid.distances.push_back(ParseDistance(d));
      }
      if (!f.omega_modes.empty()) {
        grid.omega_modes.clear();
        for (const auto& m : f.omega_modes) {
          grid.omega_modes.push_back(ParseOmegaMode(m));
        }
      }
      grid.objective = ParseObjective(f.objective);
      Flags single = f;
      single.etas.clear();
      single.alphas.clear();
      single.distances.clear();
      single.omega_modes.clear();
      RunSpec run = ToRunSpec(single);
      run.supervisor = SupervisorKind::kOpenMax;
      CmdSweep(grid, run, std::cout);
    } else if (series_cmd->parsed()) {
      RunSpec base = ToRunSpec(f);
      std::vector<RunSpec> runs;
      for (const std::string& dir : f.series_dirs) {
        RunSpec run = base;
        run.train = std::filesystem::path(dir) / kTrainFile;
        run.test = std::filesystem::path(dir) / kTestFile;
        run.outlier = std::filesystem::path(dir) / kOutlierFile;
        runs.push_back(run);
      }
      CmdSeries(runs, base.out_dir, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
