#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nomafl/channel.hpp"
#include "nomafl/data.hpp"

namespace nomafl {

enum class Mode { kTdma, kNomaQuant, kNomaSparse };

std::string_view to_string(Mode mode);
// Accepts "tdma", "noma-quant", "noma-sparse" (also "quant", "sparse").
Mode parse_mode(std::string_view text);

struct DatasetConfig {
  std::string source;  // "idx" or "synthetic"; required
  std::filesystem::path images;
  std::filesystem::path labels;
  std::size_t limit = 0;  // first N samples of the IDX files, 0 = all
  std::size_t shards_per_device = 2;
  double train_fraction = 0.9;
  SyntheticSpec synthetic;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t num_users = 100;
  double participation = 0.1;
  std::size_t rounds = 100;
  Mode mode = Mode::kNomaSparse;
  std::size_t eval_interval = 1;
  bool eval_participants_only = false;
  std::filesystem::path out_dir = "out";

  ChannelParams channel;
  double cell_radius_m = 500.0;
  double min_distance_m = 10.0;

  double learning_rate = 0.001;
  std::size_t batch_size = 10;
  double time_budget_s = 1.0;
  double compute_speed_min = 900.0;   // samples / s, log-uniform
  double compute_speed_max = 1800.0;
  std::vector<int> hidden_layers{300, 100};

  int forced_quant_bits = 0;  // 0 = adaptive

  DatasetConfig dataset;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

// INI-style file: [section] headers and `key = value` lines. Relative
// dataset paths resolve against the file's directory. Overrides are
// "section.key=value" strings applied after the file.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {},
                              const std::vector<std::string>& overrides = {});

// Sets one "section.key" field from its textual value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

// Every recognised "section.key", in documentation order.
std::vector<std::string> config_keys();

}  // namespace nomafl
