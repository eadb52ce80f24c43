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

#ifndef OODKIT_ERROR_H_
#define OODKIT_ERROR_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oodkit {

enum class ErrorCode {
  // Dump format.
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kLengthMismatch,
  kNonFinite,
  kInvalidRecord,
  kDuplicateId,
  kRaggedRow,
  kParse,
  kIo,
  // Scoring and evaluation.
  kDimensionMismatch,
  kInvalidArgument,
  kSingleClass,
  kEmptyInput,
  kEmptyClass,
  // Weibull fitting.
  kInsufficientTail,
  kDegenerateTail,
  kNonConvergence,
  // Command line.
  kUsage,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library. `class_index` is set when the
// failure is attributable to a single class (fit errors).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<int> class_index = std::nullopt);

  ErrorCode code() const { return code_; }
  std::optional<int> class_index() const { return class_index_; }

  bool IsFitFailure() const;

 private:
  ErrorCode code_;
  std::optional<int> class_index_;
};

}  // namespace oodkit

#endif  // OODKIT_ERROR_H_
