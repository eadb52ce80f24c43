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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "oodkit/error.h"
#include "support/oracles.h"

namespace oodkit {
namespace {

using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kUsage;
}

// Random valid dump; activations are f32-representable so they survive the
// binary format unchanged.
ActivationDump RandomDump(std::mt19937_64& rng) {
  ActivationDump d;
  d.n_classes = 2 + static_cast<int>(rng() % 9);
  const int records = static_cast<int>(rng() % 40);
  for (int r = 0; r < records; ++r) {
    std::vector<double> v(d.n_classes);
    for (double& x : v) {
      x = static_cast<float>((testing::Unit(rng) - 0.5) * 200.0);
    }
    const std::uint64_t id = (rng() & ~0xffULL) | static_cast<unsigned>(r);
    if (rng() % 3 == 0) {
      d.records.push_back(SampleRecord::Outlier(id, std::move(v)));
    } else {
      d.records.push_back(SampleRecord::Inlier(
          id, static_cast<int>(rng() % d.n_classes), std::move(v)));
    }
  }
  return d;
}

TEST(DumpIo, EmptyDumpIsHeaderOnly) {
  ActivationDump d;
  d.n_classes = 3;
  const std::vector<std::uint8_t> bytes = EncodeDump(d);
  ASSERT_EQ(bytes.size(), kDumpHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "OODD");
  EXPECT_EQ(DecodeDump(bytes), d);
}

TEST(DumpIo, OneRecordLayout) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Inlier(7, 1, {0.5, -2.0}));
  const std::vector<std::uint8_t> bytes = EncodeDump(d);
  ASSERT_EQ(bytes.size(), 20u + 8u + 4u + 2u * 4u);
  EXPECT_EQ(bytes[4], 1);   // version, little-endian
  EXPECT_EQ(bytes[8], 2);   // n_classes
  EXPECT_EQ(bytes[12], 1);  // n_records
  EXPECT_EQ(bytes[20], 7);  // sample_id
  EXPECT_EQ(bytes[28], 1);  // label
}

TEST(DumpIo, OutlierLabelIsMinusOne) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Outlier(1, {0.0, 0.0}));
  const std::vector<std::uint8_t> bytes = EncodeDump(d);
  for (int i = 28; i < 32; ++i) EXPECT_EQ(bytes[i], 0xff);
}

TEST(DumpIo, RoundTripRandomized) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const ActivationDump d = RandomDump(rng);
    EXPECT_EQ(DecodeDump(EncodeDump(d)), d) << "trial " << trial;
  }
}

TEST(DumpIo, StreamRoundTripPreservesOrder) {
  ActivationDump d;
  d.n_classes = 2;
  for (std::uint64_t id : {9, 3, 5, 1}) {
    d.records.push_back(SampleRecord::Inlier(id, 0, {1.0, 0.0}));
  }
  std::stringstream s;
  WriteDump(d, s);
  const ActivationDump back = ReadDump(s);
  ASSERT_EQ(back.records.size(), 4u);
  EXPECT_EQ(back.records[0].sample_id, 9u);
  EXPECT_EQ(back.records[3].sample_id, 1u);
}

TEST(DumpIo, BadMagic) {
  std::vector<std::uint8_t> bytes = EncodeDump(ActivationDump{2, {}, {}});
  bytes[0] = bytes[1] = bytes[2] = bytes[3] = 'X';
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kBadMagic);
}

TEST(DumpIo, VersionMismatch) {
  std::vector<std::uint8_t> bytes = EncodeDump(ActivationDump{2, {}, {}});
  bytes[4] = 2;
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kVersionMismatch);
}

TEST(DumpIo, TruncatedMidRecord) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Inlier(1, 0, {1.0, 2.0}));
  d.records.push_back(SampleRecord::Inlier(2, 1, {1.0, 2.0}));
  std::vector<std::uint8_t> bytes = EncodeDump(d);
  bytes.resize(bytes.size() - 3);
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kTruncated);
  bytes.resize(10);
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kTruncated);
}

TEST(DumpIo, TrailingBytes) {
  std::vector<std::uint8_t> bytes = EncodeDump(ActivationDump{2, {}, {}});
  bytes.push_back(0);
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kLengthMismatch);
}

TEST(DumpIo, NonFiniteRejected) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(
      SampleRecord::Inlier(1, 0, {std::numeric_limits<double>::quiet_NaN(), 0}));
  EXPECT_EQ(CodeOf([&] { EncodeDump(d); }), ErrorCode::kNonFinite);

  d.records[0].activations[0] = 1.0;
  std::vector<std::uint8_t> bytes = EncodeDump(d);
  // Overwrite the first activation with +inf (0x7f800000).
  bytes[32] = 0x00;
  bytes[33] = 0x00;
  bytes[34] = 0x80;
  bytes[35] = 0x7f;
  EXPECT_EQ(CodeOf([&] { DecodeDump(bytes); }), ErrorCode::kNonFinite);
}

TEST(DumpIo, DuplicateIdRejected) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Inlier(4, 0, {1.0, 0.0}));
  d.records.push_back(SampleRecord::Outlier(4, {1.0, 0.0}));
  EXPECT_EQ(CodeOf([&] { ValidateDump(d); }), ErrorCode::kDuplicateId);
}

TEST(DumpIo, LabelOutOfRangeRejected) {
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Inlier(4, 2, {1.0, 0.0}));
  EXPECT_EQ(CodeOf([&] { ValidateDump(d); }), ErrorCode::kInvalidRecord);
}

TEST(DumpIo, EverySingleByteHeaderCorruptionDetected) {
  std::mt19937_64 rng(11);
  ActivationDump d;
  while (d.records.empty()) d = RandomDump(rng);
  const std::vector<std::uint8_t> clean = EncodeDump(d);
  for (std::size_t pos = 0; pos < kDumpHeaderBytes; ++pos) {
    for (int value = 0; value < 256; ++value) {
      if (value == clean[pos]) continue;
      std::vector<std::uint8_t> bytes = clean;
      bytes[pos] = static_cast<std::uint8_t>(value);
      EXPECT_THROW(DecodeDump(bytes), Error)
          << "byte " << pos << " set to " << value;
    }
  }
}

TEST(DumpIo, CsvThreeRows) {
  std::istringstream in(
      "sample_id,label,logit_0,logit_1\n"
      "1,0,0.5,-1\n"
      "2,1,3,4\n"
      "3,-1,0,0\n");
  const ActivationDump d = ReadCsvDump(in, 2);
  ASSERT_EQ(d.records.size(), 3u);
  EXPECT_EQ(d.records[2].origin, Origin::kOutlier);
  EXPECT_FALSE(d.records[2].true_label.has_value());
  EXPECT_EQ(*d.records[1].true_label, 1);
  EXPECT_EQ(d.records[0].activations[0], 0.5);
}

TEST(DumpIo, CsvRaggedRow) {
  std::istringstream in(
      "sample_id,label,logit_0,logit_1\n"
      "1,0,0.5\n");
  EXPECT_EQ(CodeOf([&] { ReadCsvDump(in, 2); }), ErrorCode::kRaggedRow);
}

TEST(DumpIo, CsvUnparsableNumber) {
  std::istringstream in(
      "sample_id,label,logit_0,logit_1\n"
      "1,0,abc,1\n");
  EXPECT_EQ(CodeOf([&] { ReadCsvDump(in, 2); }), ErrorCode::kParse);
}

TEST(DumpIo, CsvAndBinaryAgree) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const ActivationDump d = RandomDump(rng);
    std::stringstream csv;
    WriteCsvDump(d, csv);
    const ActivationDump from_csv = ReadCsvDump(csv, d.n_classes);
    EXPECT_EQ(from_csv, DecodeDump(EncodeDump(d))) << "trial " << trial;
  }
}

TEST(DumpIo, ManifestRoundTrip) {
  DumpManifest m;
  m.model_name = "vgg16";
  m.dataset_name = "cifar10-test";
  m.epoch = 30;
  m.reference_accuracy = 0.8125;
  m.split = Split::kTest;
  m.loss = 0.25;
  EXPECT_EQ(ManifestFromJson(ManifestToJson(m)), m);
}

TEST(DumpIo, TestManifestNeedsReferenceAccuracy) {
  DumpManifest m;
  m.split = Split::kTest;
  EXPECT_THROW(ValidateManifest(m), Error);
}

TEST(DumpIo, SaveLoadWithSidecar) {
  TempDir tmp;
  ActivationDump d;
  d.n_classes = 2;
  d.records.push_back(SampleRecord::Inlier(1, 0, {1.0, 0.25}));
  d.manifest.model_name = "m";
  d.manifest.dataset_name = "ds";
  d.manifest.split = Split::kTrainCorrectOnly;
  const auto path = tmp.path() / "train.oodd";
  SaveDump(d, path);
  EXPECT_TRUE(std::filesystem::exists(ManifestPath(path)));
  EXPECT_EQ(LoadDump(path), d);

  std::filesystem::remove(ManifestPath(path));
  EXPECT_THROW(LoadDump(path), Error);
  EXPECT_EQ(LoadDump(path, false).records, d.records);
}

}  // namespace
}  // namespace oodkit
