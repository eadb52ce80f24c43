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

#include "oodkit/dump_io.h"

#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "oodkit/error.h"

namespace oodkit {

using json = nlohmann::json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrainCorrectOnly: return "TrainCorrectOnly";
    case Split::kTest: return "Test";
    case Split::kOutlierSet: return "OutlierSet";
  }
  return "";
}

Split ParseSplit(std::string_view name) {
  if (name == "TrainCorrectOnly") return Split::kTrainCorrectOnly;
  if (name == "Test") return Split::kTest;
  if (name == "OutlierSet") return Split::kOutlierSet;
  throw Error(ErrorCode::kParse, fmt::format("unknown split '{}'", name));
}

SampleRecord SampleRecord::Inlier(std::uint64_t id, int label,
                                  std::vector<double> activations) {
  return SampleRecord{id, Origin::kInlier, label, std::move(activations)};
}

SampleRecord SampleRecord::Outlier(std::uint64_t id,
                                   std::vector<double> activations) {
  return SampleRecord{id, Origin::kOutlier, std::nullopt,
                      std::move(activations)};
}

void ValidateDump(const ActivationDump& dump) {
  if (dump.n_classes < 2) {
    throw Error(ErrorCode::kInvalidRecord,
                fmt::format("n_classes must be >= 2, got {}", dump.n_classes));
  }
  std::unordered_set<std::uint64_t> ids;
  ids.reserve(dump.records.size());
  for (const SampleRecord& r : dump.records) {
    if (!ids.insert(r.sample_id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  fmt::format("sample_id {} appears twice", r.sample_id));
    }
    if (r.activations.size() != static_cast<std::size_t>(dump.n_classes)) {
      throw Error(ErrorCode::kInvalidRecord,
                  fmt::format("sample {} has {} activations, expected {}",
                              r.sample_id, r.activations.size(),
                              dump.n_classes));
    }
    if (r.origin == Origin::kInlier) {
      if (!r.true_label.has_value() || *r.true_label < 0 ||
          *r.true_label >= dump.n_classes) {
        throw Error(ErrorCode::kInvalidRecord,
                    fmt::format("inlier {} needs a label in [0, {})",
                                r.sample_id, dump.n_classes));
      }
    } else if (r.true_label.has_value()) {
      throw Error(ErrorCode::kInvalidRecord,
                  fmt::format("outlier {} carries a label", r.sample_id));
    }
    for (double a : r.activations) {
      // The on-disk value must stay finite after narrowing too.
      if (!std::isfinite(a) || !std::isfinite(static_cast<float>(a))) {
        throw Error(ErrorCode::kNonFinite,
                    fmt::format("sample {} has a non-finite activation",
                                r.sample_id));
      }
    }
  }
}

void ValidateManifest(const DumpManifest& manifest) {
  if (manifest.epoch < 0) {
    throw Error(ErrorCode::kInvalidRecord, "epoch must be nonnegative");
  }
  if (manifest.reference_accuracy.has_value()) {
    double acc = *manifest.reference_accuracy;
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw Error(ErrorCode::kInvalidRecord,
                  "reference_accuracy must lie in [0, 1]");
    }
  } else if (manifest.split == Split::kTest) {
    throw Error(ErrorCode::kInvalidRecord,
                "Test manifests need a reference_accuracy");
  }
}

namespace {

template <typename T>
void PutLe(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  U bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T GetLe(const std::uint8_t* p) {
  using U = std::make_unsigned_t<T>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  }
  return static_cast<T>(bits);
}

std::size_t RecordBytes(std::uint32_t n_classes) {
  return 8 + 4 + 4 * static_cast<std::size_t>(n_classes);
}

}  // namespace

std::vector<std::uint8_t> EncodeDump(const ActivationDump& dump) {
  ValidateDump(dump);
  std::vector<std::uint8_t> out;
  const auto n = static_cast<std::uint32_t>(dump.n_classes);
  out.reserve(kDumpHeaderBytes + dump.records.size() * RecordBytes(n));
  out.insert(out.end(), std::begin(kDumpMagic), std::end(kDumpMagic));
  PutLe<std::uint32_t>(out, kDumpVersion);
  PutLe<std::uint32_t>(out, n);
  PutLe<std::uint64_t>(out, dump.records.size());
  for (const SampleRecord& r : dump.records) {
    PutLe<std::uint64_t>(out, r.sample_id);
    PutLe<std::int32_t>(out, r.true_label.value_or(-1));
    for (double a : r.activations) {
      PutLe<std::uint32_t>(out, std::bit_cast<std::uint32_t>(
                                    static_cast<float>(a)));
    }
  }
  return out;
}

void WriteDump(const ActivationDump& dump, std::ostream& sink) {
  std::vector<std::uint8_t> bytes = EncodeDump(dump);
  sink.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error(ErrorCode::kIo, "failed writing dump");
}

ActivationDump DecodeDump(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kDumpMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "input does not start with \"OODD\"");
  }
  if (bytes.size() < kDumpHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "header is incomplete");
  }
  const std::uint8_t* p = bytes.data();
  const auto version = GetLe<std::uint32_t>(p + 4);
  if (version != kDumpVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                fmt::format("version {} (expected {})", version, kDumpVersion));
  }
  const auto n_classes = GetLe<std::uint32_t>(p + 8);
  const auto n_records = GetLe<std::uint64_t>(p + 12);
  if (n_classes < 2 ||
      n_classes > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorCode::kInvalidRecord,
                fmt::format("invalid n_classes {}", n_classes));
  }

  const std::size_t record_bytes = RecordBytes(n_classes);
  const std::size_t payload = bytes.size() - kDumpHeaderBytes;
  if (n_records > payload / record_bytes) {
    throw Error(ErrorCode::kTruncated,
                fmt::format("header announces {} records but only {} bytes "
                            "follow",
                            n_records, payload));
  }
  if (n_records * record_bytes != payload) {
    throw Error(ErrorCode::kLengthMismatch,
                fmt::format("{} trailing bytes after {} records",
                            payload - n_records * record_bytes, n_records));
  }

  ActivationDump dump;
  dump.n_classes = static_cast<int>(n_classes);
  dump.records.reserve(n_records);
  p += kDumpHeaderBytes;
  for (std::uint64_t i = 0; i < n_records; ++i) {
    SampleRecord r;
    r.sample_id = GetLe<std::uint64_t>(p);
    const auto label = GetLe<std::int32_t>(p + 8);
    p += 12;
    if (label == -1) {
      r.origin = Origin::kOutlier;
    } else {
      r.origin = Origin::kInlier;
      r.true_label = label;
    }
    r.activations.resize(n_classes);
    for (std::uint32_t j = 0; j < n_classes; ++j, p += 4) {
      r.activations[j] = std::bit_cast<float>(GetLe<std::uint32_t>(p));
    }
    dump.records.push_back(std::move(r));
  }
  ValidateDump(dump);
  return dump;
}

ActivationDump ReadDump(std::istream& source) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(source),
                                  std::istreambuf_iterator<char>()};
  return DecodeDump(bytes);
}

namespace {

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T ParseNumber(std::string_view field, std::size_t line_no) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw Error(ErrorCode::kParse,
                fmt::format("line {}: cannot parse '{}'", line_no, field));
  }
  return value;
}

std::string CsvHeader(int n_classes) {
  std::string header = "sample_id,label";
  for (int j = 0; j < n_classes; ++j) header += fmt::format(",logit_{}", j);
  return header;
}

void StripCr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

ActivationDump ReadCsvDump(std::istream& source, int n_classes) {
  std::string line;
  if (!std::getline(source, line)) {
    throw Error(ErrorCode::kParse, "missing CSV header");
  }
  StripCr(line);
  if (line != CsvHeader(n_classes)) {
    throw Error(ErrorCode::kParse,
                fmt::format("CSV header does not match {} classes", n_classes));
  }
  ActivationDump dump;
  dump.n_classes = n_classes;
  const std::size_t expected = 2 + static_cast<std::size_t>(n_classes);
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    std::vector<std::string_view> fields = SplitCsvLine(line);
    if (fields.size() != expected) {
      throw Error(ErrorCode::kRaggedRow,
                  fmt::format("line {} has {} columns, expected {}", line_no,
                              fields.size(), expected));
    }
    SampleRecord r;
    r.sample_id = ParseNumber<std::uint64_t>(fields[0], line_no);
    const int label = ParseNumber<int>(fields[1], line_no);
    if (label == -1) {
      r.origin = Origin::kOutlier;
    } else {
      r.origin = Origin::kInlier;
      r.true_label = label;
    }
    r.activations.reserve(n_classes);
    for (std::size_t j = 2; j < expected; ++j) {
      // Narrow to f32 so both encodings agree on equal data.
      r.activations.push_back(
          static_cast<float>(ParseNumber<double>(fields[j], line_no)));
    }
    dump.records.push_back(std::move(r));
  }
  ValidateDump(dump);
  return dump;
}

void WriteCsvDump(const ActivationDump& dump, std::ostream& sink) {
  ValidateDump(dump);
  sink << CsvHeader(dump.n_classes) << '\n';
  for (const SampleRecord& r : dump.records) {
    sink << r.sample_id << ',' << r.true_label.value_or(-1);
    for (double a : r.activations) {
      // max_digits10 for float round-trips exactly.
      sink << ',' << fmt::format("{:.9g}", static_cast<float>(a));
    }
    sink << '\n';
  }
  if (!sink) throw Error(ErrorCode::kIo, "failed writing CSV dump");
}

std::string ManifestToJson(const DumpManifest& manifest) {
  json j;
  j["model_name"] = manifest.model_name;
  j["dataset_name"] = manifest.dataset_name;
  j["epoch"] = manifest.epoch;
  j["reference_accuracy"] = manifest.reference_accuracy.has_value()
                                ? json(*manifest.reference_accuracy)
                                : json(nullptr);
  j["split"] = std::string(SplitName(manifest.split));
  if (manifest.augmented) j["augmented"] = *manifest.augmented;
  if (manifest.loss) j["loss"] = *manifest.loss;
  return j.dump(2) + "\n";
}

DumpManifest ManifestFromJson(std::string_view text) {
  DumpManifest m;
  try {
    json j = json::parse(text);
    m.model_name = j.at("model_name").get<std::string>();
    m.dataset_name = j.at("dataset_name").get<std::string>();
    m.epoch = j.at("epoch").get<int>();
    if (j.contains("reference_accuracy") && !j["reference_accuracy"].is_null()) {
      m.reference_accuracy = j["reference_accuracy"].get<double>();
    }
    m.split = ParseSplit(j.at("split").get<std::string>());
    if (j.contains("augmented") && !j["augmented"].is_null()) {
      m.augmented = j["augmented"].get<std::string>();
    }
    if (j.contains("loss") && !j["loss"].is_null()) {
      m.loss = j["loss"].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, fmt::format("manifest: {}", e.what()));
  }
  ValidateManifest(m);
  return m;
}

std::filesystem::path ManifestPath(const std::filesystem::path& dump_path) {
  std::filesystem::path p = dump_path;
  p += ".manifest.json";
  return p;
}

void SaveDump(const ActivationDump& dump, const std::filesystem::path& path) {
  ValidateManifest(dump.manifest);
  std::vector<std::uint8_t> bytes = EncodeDump(dump);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::kIo, fmt::format("write to {} failed",
                                              path.string()));
    }
  }
  std::ofstream side(ManifestPath(path), std::ios::binary | std::ios::trunc);
  side << ManifestToJson(dump.manifest);
  if (!side) {
    throw Error(ErrorCode::kIo, fmt::format("cannot write manifest for {}",
                                            path.string()));
  }
}

ActivationDump LoadDump(const std::filesystem::path& path,
                        bool require_manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  }
  ActivationDump dump;
  if (path.extension() == ".csv") {
    std::string header;
    std::getline(in, header);
    StripCr(header);
    const auto columns = SplitCsvLine(header).size();
    if (columns < 4) throw Error(ErrorCode::kParse, "CSV header too short");
    in.clear();
    in.seekg(0);
    dump = ReadCsvDump(in, static_cast<int>(columns - 2));
  } else {
    dump = ReadDump(in);
  }

  const auto manifest_path = ManifestPath(path);
  std::ifstream side(manifest_path, std::ios::binary);
  if (side) {
    std::stringstream ss;
    ss << side.rdbuf();
    dump.manifest = ManifestFromJson(ss.str());
  } else if (require_manifest) {
    throw Error(ErrorCode::kIo, fmt::format("missing manifest {}",
                                            manifest_path.string()));
  }
  return dump;
}

}  // namespace oodkit
