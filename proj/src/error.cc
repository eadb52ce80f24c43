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

#include "oodkit/error.h"

#include <fmt/format.h>

namespace oodkit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kRaggedRow: return "RaggedRow";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kInsufficientTail: return "InsufficientTail";
    case ErrorCode::kDegenerateTail: return "DegenerateTail";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kUsage: return "Usage";
  }
  return "Unknown";
}

namespace {

std::string Decorate(ErrorCode code, const std::string& message,
                     std::optional<int> class_index) {
  if (class_index.has_value()) {
    return fmt::format("{} (class {}): {}", ErrorCodeName(code), *class_index,
                       message);
  }
  return fmt::format("{}: {}", ErrorCodeName(code), message);
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<int> class_index)
    : std::runtime_error(Decorate(code, message, class_index)),
      code_(code),
      class_index_(class_index) {}

bool Error::IsFitFailure() const {
  return code_ == ErrorCode::kInsufficientTail ||
         code_ == ErrorCode::kDegenerateTail ||
         code_ == ErrorCode::kNonConvergence;
}

}  // namespace oodkit
