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

// Activation dump interchange format.
//
// A dump holds one activation vector per sample, as produced by a single
// model snapshot. The binary layout (all little-endian) is
//
//   "OODD" | u32 version = 1 | u32 n_classes | u64 n_records
//   per record: u64 sample_id | i32 label (-1 = outlier) | n_classes x f32
//
// and the manifest lives next to it as `<dump>.manifest.json`. Activations
// are stored as f32 and held as double in memory; every in-memory value of a
// valid dump is therefore exactly representable as a float.

#ifndef OODKIT_DUMP_IO_H_
#define OODKIT_DUMP_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oodkit {

inline constexpr char kDumpMagic[4] = {'O', 'O', 'D', 'D'};
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 20;

enum class Origin { kInlier, kOutlier };

enum class Split { kTrainCorrectOnly, kTest, kOutlierSet };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct SampleRecord {
  std::uint64_t sample_id = 0;
  Origin origin = Origin::kInlier;
  // Present iff origin == kInlier.
  std::optional<int> true_label;
  std::vector<double> activations;

  static SampleRecord Inlier(std::uint64_t id, int label,
                             std::vector<double> activations);
  static SampleRecord Outlier(std::uint64_t id,
                              std::vector<double> activations);

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DumpManifest {
  std::string model_name;
  std::string dataset_name;
  int epoch = 0;
  // Required for Test splits; used as the CBPL reference.
  std::optional<double> reference_accuracy;
  Split split = Split::kTest;
  // Optional report columns; absent unless an exporter provides them.
  std::optional<std::string> augmented;
  std::optional<double> loss;

  friend bool operator==(const DumpManifest&, const DumpManifest&) = default;
};

struct ActivationDump {
  int n_classes = 0;
  std::vector<SampleRecord> records;
  DumpManifest manifest;

  friend bool operator==(const ActivationDump&,
                         const ActivationDump&) = default;
};

// Throws Error(kInvalidRecord | kDuplicateId | kNonFinite) on the first
// violated invariant.
void ValidateDump(const ActivationDump& dump);
void ValidateManifest(const DumpManifest& manifest);

// Binary encoding of n_classes and records. The manifest is not part of the
// byte stream. Nothing is written if the dump is invalid.
void WriteDump(const ActivationDump& dump, std::ostream& sink);
std::vector<std::uint8_t> EncodeDump(const ActivationDump& dump);

// Returns a dump with a default manifest.
ActivationDump ReadDump(std::istream& source);
ActivationDump DecodeDump(const std::vector<std::uint8_t>& bytes);

// CSV with header `sample_id,label,logit_0,...,logit_{N-1}`.
ActivationDump ReadCsvDump(std::istream& source, int n_classes);
void WriteCsvDump(const ActivationDump& dump, std::ostream& sink);

std::string ManifestToJson(const DumpManifest& manifest);
DumpManifest ManifestFromJson(std::string_view text);

std::filesystem::path ManifestPath(const std::filesystem::path& dump_path);

// File-level helpers: binary dump plus manifest sidecar. LoadDump accepts a
// missing sidecar only when `require_manifest` is false.
void SaveDump(const ActivationDump& dump, const std::filesystem::path& path);
ActivationDump LoadDump(const std::filesystem::path& path,
                        bool require_manifest = true);

}  // namespace oodkit

#endif  // OODKIT_DUMP_IO_H_
