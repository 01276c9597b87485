#include <gtest/gtest.h>
#include <zlib.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "nomafl/data.hpp"
#include "nomafl/error.hpp"
#include "nomafl/rng.hpp"
#include "test_util.hpp"

namespace nomafl {
namespace {

using testing::TempDir;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Four 2x3 images whose pixels are 10*i + j, labels 3, 1, 4, 1.
std::vector<std::uint8_t> fixture_images(std::uint32_t count = 4) {
  std::vector<std::uint8_t> out;
  put_u32(out, 0x00000803);
  put_u32(out, count);
  put_u32(out, 2);
  put_u32(out, 3);
  for (std::uint8_t i = 0; i < 4; ++i) {
    for (std::uint8_t j = 0; j < 6; ++j) out.push_back(static_cast<std::uint8_t>(10 * i + j));
  }
  return out;
}

std::vector<std::uint8_t> fixture_labels(std::uint32_t count = 4) {
  std::vector<std::uint8_t> out;
  put_u32(out, 0x00000801);
  put_u32(out, count);
  for (std::uint8_t v : {3, 1, 4, 1}) out.push_back(v);
  return out;
}

void write_raw(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_gz(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  gzFile f = gzopen(p.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
}

void expect_fixture(const Samples& s) {
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.feature_dim, 6u);
  EXPECT_EQ(s.labels, (std::vector<int>{3, 1, 4, 1}));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_FLOAT_EQ(s.row(i)[j], static_cast<float>(10 * i + j) / 255.0f);
    }
  }
}

TEST(LoadIdx, RawFixture) {
  TempDir dir("idx_raw");
  write_raw(dir / "img", fixture_images());
  write_raw(dir / "lbl", fixture_labels());
  expect_fixture(load_idx(dir / "img", dir / "lbl"));
}

TEST(LoadIdx, GzipFixture) {
  TempDir dir("idx_gz");
  write_gz(dir / "img.gz", fixture_images());
  write_gz(dir / "lbl.gz", fixture_labels());
  expect_fixture(load_idx(dir / "img.gz", dir / "lbl.gz"));
}

TEST(LoadIdx, CountMismatch) {
  TempDir dir("idx_count");
  write_raw(dir / "img", fixture_images());
  auto labels = fixture_labels(5);
  labels.push_back(2);
  write_raw(dir / "lbl", labels);
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), FormatError);
}

TEST(LoadIdx, EmptyFile) {
  TempDir dir("idx_empty");
  write_raw(dir / "img", {});
  write_raw(dir / "lbl", fixture_labels());
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), FormatError);
}

TEST(LoadIdx, BadMagicReportsOffsetZero) {
  TempDir dir("idx_magic");
  auto img = fixture_images();
  img[3] = 0x01;
  write_raw(dir / "img", img);
  write_raw(dir / "lbl", fixture_labels());
  try {
    load_idx(dir / "img", dir / "lbl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.byte_offset(), 0u);
  }
}

TEST(LoadIdx, TruncatedPixels) {
  TempDir dir("idx_trunc");
  auto img = fixture_images();
  img.resize(img.size() - 3);
  write_raw(dir / "img", img);
  write_raw(dir / "lbl", fixture_labels());
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), FormatError);
}

TEST(LoadIdx, LabelOutOfRange) {
  TempDir dir("idx_label");
  auto lbl = fixture_labels();
  lbl.back() = 10;
  write_raw(dir / "img", fixture_images());
  write_raw(dir / "lbl", lbl);
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), FormatError);
}

TEST(LoadIdx, MissingFile) {
  TempDir dir("idx_missing");
  EXPECT_THROW(load_idx(dir / "nope", dir / "nope2"), FormatError);
}

TEST(TrainCount, ClampsBothSides) {
  EXPECT_EQ(train_count(100, 0.9), 90u);
  EXPECT_EQ(train_count(2, 0.9), 1u);
  EXPECT_EQ(train_count(3, 0.01), 1u);
  EXPECT_THROW(train_count(1, 0.9), DomainError);
}

// Each sample gets a unique first feature so it can be tracked.
Samples tagged_samples(std::size_t n, int classes) {
  Samples s;
  s.feature_dim = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>((i * 7) % static_cast<std::size_t>(classes));
    s.push_back(std::vector<float>{static_cast<float>(i), 0.5f}, label);
  }
  return s;
}

TEST(PartitionNoniid, UnionIsInputMultiset) {
  const auto s = tagged_samples(1000, 10);
  Rng rng = make_stream(1, StreamTag::kPartition);
  const auto ds = partition_noniid(s, 20, 2, rng);
  EXPECT_NO_THROW(ds.validate());
  std::multiset<std::pair<float, int>> seen;
  for (const auto& d : ds.devices) {
    for (const Samples* part : {&d.train, &d.test}) {
      for (std::size_t i = 0; i < part->size(); ++i) seen.insert({part->row(i)[0], part->labels[i]});
    }
  }
  std::multiset<std::pair<float, int>> expected;
  for (std::size_t i = 0; i < s.size(); ++i) expected.insert({s.row(i)[0], s.labels[i]});
  EXPECT_EQ(seen, expected);
}

TEST(PartitionNoniid, SingleShardGivesAboutOneLabel) {
  const auto s = tagged_samples(1000, 10);
  Rng rng = make_stream(2, StreamTag::kPartition);
  const auto ds = partition_noniid(s, 10, 1, rng);
  for (const auto& d : ds.devices) {
    std::set<int> labels(d.train.labels.begin(), d.train.labels.end());
    labels.insert(d.test.labels.begin(), d.test.labels.end());
    EXPECT_EQ(labels.size(), 1u);
  }
}

TEST(PartitionNoniid, ManyShardsApproachIid) {
  const auto s = tagged_samples(5000, 10);
  Rng rng = make_stream(3, StreamTag::kPartition);
  const auto ds = partition_noniid(s, 10, 50, rng);
  for (const auto& d : ds.devices) {
    std::set<int> labels(d.train.labels.begin(), d.train.labels.end());
    EXPECT_EQ(labels.size(), 10u);
  }
}

TEST(PartitionNoniid, SplitIsNinetyTen) {
  const auto s = tagged_samples(1000, 10);
  Rng rng = make_stream(4, StreamTag::kPartition);
  const auto ds = partition_noniid(s, 10, 2, rng);
  for (const auto& d : ds.devices) {
    EXPECT_EQ(d.train.size(), 90u);
    EXPECT_EQ(d.test.size(), 10u);
  }
}

TEST(PartitionNoniid, DeterministicAndRejectsTooFewSamples) {
  const auto s = tagged_samples(400, 10);
  Rng a = make_stream(5, StreamTag::kPartition);
  Rng b = make_stream(5, StreamTag::kPartition);
  const auto x = partition_noniid(s, 10, 2, a);
  const auto y = partition_noniid(s, 10, 2, b);
  for (std::size_t d = 0; d < 10; ++d) {
    EXPECT_EQ(x.devices[d].train.features, y.devices[d].train.features);
    EXPECT_EQ(x.devices[d].test.labels, y.devices[d].test.labels);
  }
  Rng c = make_stream(5, StreamTag::kPartition);
  EXPECT_THROW(partition_noniid(s, 100, 5, c), DomainError);  // 500 shards > 400 samples
}

TEST(Synthetic, DeterministicForSeed) {
  SyntheticSpec spec;
  spec.num_devices = 8;
  Rng a = make_stream(9, StreamTag::kDataset);
  Rng b = make_stream(9, StreamTag::kDataset);
  const auto x = generate_synthetic(spec, a);
  const auto y = generate_synthetic(spec, b);
  for (std::size_t d = 0; d < 8; ++d) {
    EXPECT_EQ(x.devices[d].train.features, y.devices[d].train.features);
    EXPECT_EQ(x.devices[d].train.labels, y.devices[d].train.labels);
    EXPECT_EQ(x.devices[d].test.features, y.devices[d].test.features);
  }
}

TEST(Synthetic, SingleDeviceHoldsEverything) {
  SyntheticSpec spec;
  spec.num_devices = 1;
  spec.median_samples = 200;
  spec.samples_log_sigma = 0.0;
  Rng rng = make_stream(1, StreamTag::kDataset);
  const auto ds = generate_synthetic(spec, rng);
  ASSERT_EQ(ds.devices.size(), 1u);
  EXPECT_EQ(ds.devices[0].train.size() + ds.devices[0].test.size(), 200u);
  EXPECT_NO_THROW(ds.validate());
}

TEST(Synthetic, UniformLabelsInTheLimit) {
  SyntheticSpec spec;
  spec.num_devices = 100;
  spec.label_concentration = std::numeric_limits<double>::infinity();
  Rng rng = make_stream(2, StreamTag::kDataset);
  const auto ds = generate_synthetic(spec, rng);
  // Per-device chi-square statistics summed over all devices.
  double stat = 0.0;
  double dof = 0.0;
  for (const auto& d : ds.devices) {
    std::vector<double> counts(10, 0.0);
    for (int y : d.train.labels) counts[static_cast<std::size_t>(y)] += 1;
    for (int y : d.test.labels) counts[static_cast<std::size_t>(y)] += 1;
    const double n = d.train.size() + d.test.size();
    for (double c : counts) stat += (c - n / 10) * (c - n / 10) / (n / 10);
    dof += 9;
  }
  const boost::math::chi_squared chi(dof);
  EXPECT_GT(boost::math::cdf(boost::math::complement(chi, stat)), 0.01);
}

TEST(Synthetic, SkewedLabelsAreFarFromUniform) {
  SyntheticSpec spec;
  spec.num_devices = 50;
  spec.label_concentration = 0.1;
  Rng rng = make_stream(3, StreamTag::kDataset);
  const auto ds = generate_synthetic(spec, rng);
  std::size_t dominated = 0;
  for (const auto& d : ds.devices) {
    std::map<int, int> counts;
    for (int y : d.train.labels) ++counts[y];
    int top = 0;
    for (const auto& [label, c] : counts) top = std::max(top, c);
    if (top * 2 > static_cast<int>(d.train.size())) ++dominated;
  }
  EXPECT_GT(dominated, 25u);
}

}  // namespace
}  // namespace nomafl
