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

// Two-parameter Weibull law and its maximum-likelihood fit.

#ifndef OODKIT_WEIBULL_H_
#define OODKIT_WEIBULL_H_

#include <span>

namespace oodkit {

struct WeibullParams {
  double shape = 1.0;  // k
  double scale = 1.0;  // lambda

  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;
};

// F(d) = 1 - exp(-(d / scale)^shape). Throws Error(kInvalidArgument) for
// negative or NaN d.
double WeibullCdf(const WeibullParams& params, double d);

double WeibullLogLikelihood(const WeibullParams& params,
                            std::span<const double> samples);

struct WeibullFitOptions {
  double tolerance = 1e-9;
  int max_iterations = 200;
  double initial_shape = 1.0;
  // Sample variance below this is rejected as a degenerate tail.
  double min_variance = 1e-12;
};

struct WeibullFit {
  WeibullParams params;
  int iterations = 0;
  // Profile score of the shape at the returned estimate.
  double gradient = 0.0;
};

// Maximum-likelihood fit on strictly positive samples.
//
// The scale has the closed form lambda = (mean x^k)^(1/k) for a given shape,
// which leaves the one-dimensional profile equation
//
//   g(k) = sum x^k ln x / sum x^k - 1/k - mean ln x = 0.
//
// g is strictly increasing, so Newton steps are safeguarded by a bracket
// and fall back to bisection when they leave it.
//
// Errors: kInvalidArgument (fewer than 2 samples, nonpositive or non-finite
// values), kDegenerateTail (variance below min_variance), kNonConvergence.
WeibullFit FitWeibull(std::span<const double> samples,
                      const WeibullFitOptions& options = {});

}  // namespace oodkit

#endif  // OODKIT_WEIBULL_H_
