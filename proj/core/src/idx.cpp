#include <zlib.h>

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "nomafl/data.hpp"
#include "nomafl/error.hpp"

namespace nomafl {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

// gzread reads plain files transparently, so one path covers both.
std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> file(gzopen(path.c_str(), "rb"), &gzclose);
  if (!file) {
    throw FormatError("cannot open " + path.string(), 0);
  }
  std::vector<std::uint8_t> data;
  std::array<std::uint8_t, 1 << 16> chunk{};
  for (;;) {
    const int n = gzread(file.get(), chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      throw FormatError("read error in " + path.string(), data.size());
    }
    if (n == 0) break;
    data.insert(data.end(), chunk.begin(), chunk.begin() + n);
  }
  return data;
}

std::uint32_t be32(const std::vector<std::uint8_t>& data, std::size_t offset,
                   const std::filesystem::path& path) {
  if (data.size() < offset + 4) {
    throw FormatError("truncated header in " + path.string(), data.size());
  }
  return (std::uint32_t{data[offset]} << 24) | (std::uint32_t{data[offset + 1]} << 16) |
         (std::uint32_t{data[offset + 2]} << 8) | std::uint32_t{data[offset + 3]};
}

}  // namespace

Samples load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_all(images);
  const auto lab = read_all(labels);

  if (be32(img, 0, images) != kImageMagic) {
    throw FormatError("bad image magic in " + images.string(), 0);
  }
  if (be32(lab, 0, labels) != kLabelMagic) {
    throw FormatError("bad label magic in " + labels.string(), 0);
  }
  const std::size_t count = be32(img, 4, images);
  const std::size_t rows = be32(img, 8, images);
  const std::size_t cols = be32(img, 12, images);
  const std::size_t label_count = be32(lab, 4, labels);
  if (label_count != count) {
    throw FormatError(labels.string() + " holds " + std::to_string(label_count) +
                          " labels for " + std::to_string(count) + " images",
                      4);
  }
  const std::size_t dim = rows * cols;
  if (img.size() < 16 + count * dim) {
    throw FormatError("truncated image data in " + images.string(), img.size());
  }
  if (lab.size() < 8 + count) {
    throw FormatError("truncated label data in " + labels.string(), lab.size());
  }

  Samples out;
  out.feature_dim = dim;
  out.features.resize(count * dim);
  out.labels.resize(count);
  for (std::size_t i = 0; i < count * dim; ++i) {
    out.features[i] = static_cast<float>(img[16 + i]) / 255.0f;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const int label = lab[8 + i];
    if (label > 9) {
      throw FormatError("label out of range in " + labels.string(), 8 + i);
    }
    out.labels[i] = label;
  }
  return out;
}

}  // namespace nomafl
