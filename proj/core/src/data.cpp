#include "nomafl/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "nomafl/error.hpp"

namespace nomafl {

void Samples::push_back(std::span<const float> x, int label) {
  if (x.size() != feature_dim) {
    throw DomainError("Samples::push_back: feature dimension mismatch");
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

Samples Samples::subset(std::span<const std::size_t> indices) const {
  Samples out;
  out.feature_dim = feature_dim;
  out.features.reserve(indices.size() * feature_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(row(i), labels[i]);
  return out;
}

void FederatedDataset::validate() const {
  for (std::size_t d = 0; d < devices.size(); ++d) {
    const auto& dev = devices[d];
    if (dev.train.size() < 1 || dev.test.size() < 1) {
      throw DomainError("device " + std::to_string(d) + " needs a train and a test sample");
    }
    for (const Samples* part : {&dev.train, &dev.test}) {
      if (part->feature_dim != feature_dim) {
        throw DomainError("device " + std::to_string(d) + " has wrong feature dimension");
      }
      for (int label : part->labels) {
        if (label < 0 || label >= num_classes) {
          throw DomainError("device " + std::to_string(d) + " has label out of range");
        }
      }
    }
  }
}

std::size_t train_count(std::size_t n, double train_fraction) {
  if (n < 2) {
    throw DomainError("train_count: need at least two samples");
  }
  const auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

namespace {

DeviceData split_device(const Samples& all, std::vector<std::size_t> indices, Rng& rng,
                        double train_fraction) {
  std::shuffle(indices.begin(), indices.end(), rng);
  const std::size_t n_train = train_count(indices.size(), train_fraction);
  DeviceData dev;
  dev.train = all.subset(std::span(indices).first(n_train));
  dev.test = all.subset(std::span(indices).subspan(n_train));
  return dev;
}

std::vector<double> dirichlet(int k, double concentration, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(k), 1.0 / k);
  if (std::isinf(concentration)) return p;
  std::gamma_distribution<double> gamma(concentration, 1.0);
  double total = 0.0;
  for (auto& v : p) {
    v = gamma(rng);
    total += v;
  }
  if (!(total > 0.0)) {
    // Every draw underflowed (tiny concentration): all mass on one class.
    std::fill(p.begin(), p.end(), 0.0);
    p[std::uniform_int_distribution<int>(0, k - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

FederatedDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
  if (spec.num_devices < 1) throw DomainError("synthetic: need at least one device");
  if (spec.num_classes < 2) throw DomainError("synthetic: need at least two classes");
  if (spec.feature_dim < 1) throw DomainError("synthetic: feature_dim must be positive");
  if (!(spec.median_samples >= 2.0)) throw DomainError("synthetic: median_samples must be >= 2");
  if (!(spec.samples_log_sigma >= 0.0)) throw DomainError("synthetic: samples_log_sigma < 0");
  if (!(spec.label_concentration > 0.0)) {
    throw DomainError("synthetic: label_concentration must be positive");
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DomainError("synthetic: train_fraction must lie in (0, 1)");
  }

  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<float> means(static_cast<std::size_t>(spec.num_classes) * spec.feature_dim);
  for (auto& m : means) m = static_cast<float>(spec.class_separation * unit(rng));

  std::lognormal_distribution<double> size_dist(std::log(spec.median_samples),
                                                spec.samples_log_sigma);
  FederatedDataset out;
  out.num_classes = spec.num_classes;
  out.feature_dim = spec.feature_dim;
  out.devices.reserve(spec.num_devices);
  std::vector<float> x(spec.feature_dim);
  for (std::size_t d = 0; d < spec.num_devices; ++d) {
    const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(size_dist(rng))));
    const auto mix = dirichlet(spec.num_classes, spec.label_concentration, rng);
    std::discrete_distribution<int> pick(mix.begin(), mix.end());
    Samples all;
    all.feature_dim = spec.feature_dim;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = pick(rng);
      const float* mu = means.data() + static_cast<std::size_t>(label) * spec.feature_dim;
      for (std::size_t j = 0; j < spec.feature_dim; ++j) {
        x[j] = mu[j] + static_cast<float>(unit(rng));
      }
      all.push_back(x, label);
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    out.devices.push_back(split_device(all, std::move(idx), rng, spec.train_fraction));
  }
  return out;
}

FederatedDataset partition_noniid(const Samples& samples, std::size_t num_devices,
                                  std::size_t shards_per_device, Rng& rng,
                                  double train_fraction) {
  if (num_devices < 1 || shards_per_device < 1) {
    throw DomainError("partition_noniid: need at least one device and one shard per device");
  }
  const std::size_t shards = num_devices * shards_per_device;
  if (samples.size() < shards || samples.size() < 2 * num_devices) {
    throw DomainError("partition_noniid: " + std::to_string(samples.size()) +
                      " samples cannot fill " + std::to_string(shards) + " shards on " +
                      std::to_string(num_devices) + " devices");
  }

  std::vector<std::size_t> by_label(samples.size());
  std::iota(by_label.begin(), by_label.end(), std::size_t{0});
  std::stable_sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) {
    return samples.labels[a] < samples.labels[b];
  });

  // Shard s covers [s n / S, (s + 1) n / S).
  std::vector<std::size_t> shard_ids(shards);
  std::iota(shard_ids.begin(), shard_ids.end(), std::size_t{0});
  std::shuffle(shard_ids.begin(), shard_ids.end(), rng);

  FederatedDataset out;
  out.feature_dim = samples.feature_dim;
  out.num_classes = samples.labels.empty()
                        ? 0
                        : *std::max_element(samples.labels.begin(), samples.labels.end()) + 1;
  out.devices.reserve(num_devices);
  const std::size_t n = samples.size();
  for (std::size_t d = 0; d < num_devices; ++d) {
    std::vector<std::size_t> mine;
    for (std::size_t j = 0; j < shards_per_device; ++j) {
      const std::size_t s = shard_ids[d * shards_per_device + j];
      mine.insert(mine.end(), by_label.begin() + static_cast<std::ptrdiff_t>(s * n / shards),
                  by_label.begin() + static_cast<std::ptrdiff_t>((s + 1) * n / shards));
    }
    if (mine.size() < 2) {
      throw DomainError("partition_noniid: device " + std::to_string(d) +
                        " received fewer than two samples");
    }
    out.devices.push_back(split_device(samples, std::move(mine), rng, train_fraction));
  }
  return out;
}

}  // namespace nomafl
