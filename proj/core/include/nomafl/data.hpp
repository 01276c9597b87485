#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "nomafl/rng.hpp"

namespace nomafl {

// Row-major feature matrix plus labels.
struct Samples {
  std::size_t feature_dim = 0;
  std::vector<float> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const float> row(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
  void push_back(std::span<const float> x, int label);
  Samples subset(std::span<const std::size_t> indices) const;
};

struct DeviceData {
  Samples train;
  Samples test;
};

struct FederatedDataset {
  std::vector<DeviceData> devices;
  int num_classes = 0;
  std::size_t feature_dim = 0;

  // Shards hold >= 2 samples with >= 1 on each side of the split, and
  // labels fall in [0, num_classes).
  void validate() const;
};

// Splits `n` shuffled samples: round(fraction n) for training, clamped so
// that both sides get at least one.
std::size_t train_count(std::size_t n, double train_fraction);

struct SyntheticSpec {
  std::size_t num_devices = 100;
  int num_classes = 10;
  std::size_t feature_dim = 20;
  double median_samples = 100.0;    // log-normal sample count per device
  double samples_log_sigma = 0.5;
  double label_concentration = 0.5;  // Dirichlet; large -> near-uniform labels
  double class_separation = 1.0;     // std-dev of class means
  double train_fraction = 0.9;
};

// Gaussian class clusters (unit variance), per-device Dirichlet label mix
// and log-normal shard sizes.
FederatedDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng);

// Reads an IDX image/label pair (gzip-compressed or raw). Pixels scale to
// [0, 1]. Throws FormatError with the byte offset of the problem.
Samples load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// Sorts by label, cuts into num_devices * shards_per_device contiguous
// shards of near-equal size, and deals them out at random; each device then
// splits its samples train/test.
FederatedDataset partition_noniid(const Samples& samples, std::size_t num_devices,
                                  std::size_t shards_per_device, Rng& rng,
                                  double train_fraction = 0.9);

}  // namespace nomafl
