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

#include "oodkit/weibull.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oodkit/error.h"

namespace oodkit {

double WeibullCdf(const WeibullParams& params, double d) {
  if (!(d >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("Weibull CDF needs d >= 0, got {}", d));
  }
  // Capped just below 1 so the law keeps its open upper bound in doubles.
  constexpr double kBelowOne = 1.0 - 0x1p-53;
  return std::min(-std::expm1(-std::pow(d / params.scale, params.shape)),
                  kBelowOne);
}

double WeibullLogLikelihood(const WeibullParams& params,
                            std::span<const double> samples) {
  const double k = params.shape;
  const double lambda = params.scale;
  double ll = 0.0;
  for (double x : samples) {
    const double z = x / lambda;
    ll += std::log(k / lambda) + (k - 1.0) * std::log(z) - std::pow(z, k);
  }
  return ll;
}

namespace {

struct ProfileTerms {
  double score = 0.0;       // g(k)
  double derivative = 0.0;  // g'(k)
  double mean_power = 0.0;  // mean y^k
};

// `log_y` holds ln(x / max x) <= 0, so y^k stays in (0, 1] for any k > 0.
ProfileTerms Profile(std::span<const double> log_y, double mean_log_y,
                     double k) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (double ly : log_y) {
    const double w = std::exp(k * ly);
    s0 += w;
    s1 += w * ly;
    s2 += w * ly * ly;
  }
  ProfileTerms t;
  const double ratio = s1 / s0;
  t.score = ratio - 1.0 / k - mean_log_y;
  t.derivative = s2 / s0 - ratio * ratio + 1.0 / (k * k);
  t.mean_power = s0 / static_cast<double>(log_y.size());
  return t;
}

}  // namespace

WeibullFit FitWeibull(std::span<const double> samples,
                      const WeibullFitOptions& options) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "Weibull fit needs at least 2 samples");
  }
  double max_x = 0.0, mean = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x) || x <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("Weibull fit needs finite positive samples, "
                              "got {}",
                              x));
    }
    max_x = std::max(max_x, x);
    mean += x;
  }
  mean /= static_cast<double>(n);
  double variance = 0.0;
  for (double x : samples) variance += (x - mean) * (x - mean);
  variance /= static_cast<double>(n);
  if (variance < options.min_variance) {
    throw Error(ErrorCode::kDegenerateTail,
                fmt::format("sample variance {} below {}", variance,
                            options.min_variance));
  }

  std::vector<double> log_y(n);
  double mean_log_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_y[i] = std::log(samples[i] / max_x);
    mean_log_y += log_y[i];
  }
  mean_log_y /= static_cast<double>(n);

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double k = options.initial_shape;
  ProfileTerms t = Profile(log_y, mean_log_y, k);
  int iter = 0;
  while (std::abs(t.score) >= options.tolerance) {
    if (iter == options.max_iterations) {
      throw Error(ErrorCode::kNonConvergence,
                  fmt::format("shape iteration stalled at k={} with score {} "
                              "after {} iterations",
                              k, t.score, iter));
    }
    ++iter;
    if (t.score < 0.0) {
      lo = k;
    } else {
      hi = k;
    }
    double next = k - t.score / t.derivative;
    if (!(next > lo && next < hi)) {
      next = std::isinf(hi) ? 2.0 * k : 0.5 * (lo + hi);
    }
    if (next == k) {
      // Bracket collapsed to adjacent doubles.
      break;
    }
    k = next;
    t = Profile(log_y, mean_log_y, k);
  }
  if (!(std::abs(t.score) < options.tolerance)) {
    throw Error(ErrorCode::kNonConvergence,
                fmt::format("shape bracket collapsed at k={} with score {}", k,
                            t.score));
  }

  WeibullFit fit;
  fit.params.shape = k;
  fit.params.scale = max_x * std::pow(t.mean_power, 1.0 / k);
  fit.iterations = iter;
  fit.gradient = t.score;
  return fit;
}

}  // namespace oodkit
