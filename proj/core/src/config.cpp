#include "nomafl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "nomafl/error.hpp"

namespace nomafl {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::filesystem::path&)>;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + text + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_uint(key, item)));
  }
  return out;
}

std::filesystem::path to_path(const std::string& text, const std::filesystem::path& base) {
  std::filesystem::path p(trim(text));
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

// Ordered so that config_keys() doubles as schema documentation.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    auto real = [&t](std::string key, std::function<double&(ExperimentConfig&)> field) {
      t.emplace_back(key, [key, field](ExperimentConfig& c, const std::string& v,
                                       const std::filesystem::path&) { field(c) = to_double(key, v); });
    };
    auto count = [&t](std::string key, std::function<std::size_t&(ExperimentConfig&)> field) {
      t.emplace_back(key, [key, field](ExperimentConfig& c, const std::string& v,
                                       const std::filesystem::path&) {
        field(c) = static_cast<std::size_t>(to_uint(key, v));
      });
    };

    t.emplace_back("experiment.seed", [](ExperimentConfig& c, const std::string& v,
                                         const std::filesystem::path&) {
      c.seed = to_uint("experiment.seed", v);
    });
    count("experiment.num_users", [](ExperimentConfig& c) -> std::size_t& { return c.num_users; });
    real("experiment.participation", [](ExperimentConfig& c) -> double& { return c.participation; });
    count("experiment.rounds", [](ExperimentConfig& c) -> std::size_t& { return c.rounds; });
    t.emplace_back("experiment.mode", [](ExperimentConfig& c, const std::string& v,
                                         const std::filesystem::path&) {
      try {
        c.mode = parse_mode(trim(v));
      } catch (const DomainError& e) {
        throw ConfigError("experiment.mode", e.what());
      }
    });
    count("experiment.eval_interval", [](ExperimentConfig& c) -> std::size_t& { return c.eval_interval; });
    t.emplace_back("experiment.eval_participants_only",
                   [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                     c.eval_participants_only = to_bool("experiment.eval_participants_only", v);
                   });
    t.emplace_back("experiment.out_dir", [](ExperimentConfig& c, const std::string& v,
                                            const std::filesystem::path&) {
      c.out_dir = trim(v);
    });

    real("channel.wavelength_m", [](ExperimentConfig& c) -> double& { return c.channel.wavelength_m; });
    real("channel.pathloss_exponent",
         [](ExperimentConfig& c) -> double& { return c.channel.pathloss_exponent; });
    real("channel.antenna_gain", [](ExperimentConfig& c) -> double& { return c.channel.antenna_gain; });
    real("channel.noise_density_dbm_hz",
         [](ExperimentConfig& c) -> double& { return c.channel.noise_density_dbm_hz; });
    real("channel.uplink_bandwidth_hz",
         [](ExperimentConfig& c) -> double& { return c.channel.uplink_bandwidth_hz; });
    real("channel.downlink_bandwidth_hz",
         [](ExperimentConfig& c) -> double& { return c.channel.downlink_bandwidth_hz; });
    real("channel.tx_power_w", [](ExperimentConfig& c) -> double& { return c.channel.tx_power_w; });
    real("channel.ps_power_w", [](ExperimentConfig& c) -> double& { return c.channel.ps_power_w; });
    real("channel.slot_duration_s",
         [](ExperimentConfig& c) -> double& { return c.channel.slot_duration_s; });
    real("channel.sic_degradation",
         [](ExperimentConfig& c) -> double& { return c.channel.sic_degradation; });
    real("channel.cell_radius_m", [](ExperimentConfig& c) -> double& { return c.cell_radius_m; });
    real("channel.min_distance_m", [](ExperimentConfig& c) -> double& { return c.min_distance_m; });

    real("training.learning_rate", [](ExperimentConfig& c) -> double& { return c.learning_rate; });
    count("training.batch_size", [](ExperimentConfig& c) -> std::size_t& { return c.batch_size; });
    real("training.time_budget_s", [](ExperimentConfig& c) -> double& { return c.time_budget_s; });
    real("training.compute_speed_min",
         [](ExperimentConfig& c) -> double& { return c.compute_speed_min; });
    real("training.compute_speed_max",
         [](ExperimentConfig& c) -> double& { return c.compute_speed_max; });
    t.emplace_back("training.hidden_layers", [](ExperimentConfig& c, const std::string& v,
                                                const std::filesystem::path&) {
      c.hidden_layers = to_int_list("training.hidden_layers", v);
    });

    t.emplace_back("compression.force_quant_bits",
                   [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                     c.forced_quant_bits = static_cast<int>(to_uint("compression.force_quant_bits", v));
                   });

    t.emplace_back("dataset.source", [](ExperimentConfig& c, const std::string& v,
                                        const std::filesystem::path&) { c.dataset.source = trim(v); });
    t.emplace_back("dataset.images", [](ExperimentConfig& c, const std::string& v,
                                        const std::filesystem::path& base) {
      c.dataset.images = to_path(v, base);
    });
    t.emplace_back("dataset.labels", [](ExperimentConfig& c, const std::string& v,
                                        const std::filesystem::path& base) {
      c.dataset.labels = to_path(v, base);
    });
    count("dataset.limit", [](ExperimentConfig& c) -> std::size_t& { return c.dataset.limit; });
    count("dataset.shards_per_device",
          [](ExperimentConfig& c) -> std::size_t& { return c.dataset.shards_per_device; });
    real("dataset.train_fraction", [](ExperimentConfig& c) -> double& { return c.dataset.train_fraction; });
    t.emplace_back("dataset.num_classes", [](ExperimentConfig& c, const std::string& v,
                                             const std::filesystem::path&) {
      c.dataset.synthetic.num_classes = static_cast<int>(to_uint("dataset.num_classes", v));
    });
    count("dataset.feature_dim",
          [](ExperimentConfig& c) -> std::size_t& { return c.dataset.synthetic.feature_dim; });
    real("dataset.median_samples",
         [](ExperimentConfig& c) -> double& { return c.dataset.synthetic.median_samples; });
    real("dataset.samples_log_sigma",
         [](ExperimentConfig& c) -> double& { return c.dataset.synthetic.samples_log_sigma; });
    real("dataset.label_concentration",
         [](ExperimentConfig& c) -> double& { return c.dataset.synthetic.label_concentration; });
    real("dataset.class_separation",
         [](ExperimentConfig& c) -> double& { return c.dataset.synthetic.class_separation; });
    return t;
  }();
  return table;
}

void check(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kTdma:
      return "tdma";
    case Mode::kNomaQuant:
      return "noma-quant";
    case Mode::kNomaSparse:
      return "noma-sparse";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "tdma") return Mode::kTdma;
  if (text == "noma-quant" || text == "quant") return Mode::kNomaQuant;
  if (text == "noma-sparse" || text == "sparse") return Mode::kNomaSparse;
  throw DomainError("unknown mode '" + std::string(text) +
                    "' (expected tdma, noma-quant or noma-sparse)");
}

void ExperimentConfig::validate() const {
  check(num_users >= 1, "experiment.num_users", "must be >= 1");
  check(participation > 0.0 && participation <= 1.0, "experiment.participation",
        "must lie in (0, 1]");
  check(eval_interval >= 1, "experiment.eval_interval", "must be >= 1");
  try {
    channel.validate();
  } catch (const DomainError& e) {
    const std::string what = e.what();
    throw ConfigError(what.substr(0, what.find(' ')), what);
  }
  check(cell_radius_m > 0.0, "channel.cell_radius_m", "must be positive");
  check(min_distance_m > 0.0 && min_distance_m < cell_radius_m, "channel.min_distance_m",
        "must be positive and below the cell radius");
  check(learning_rate >= 0.0 && std::isfinite(learning_rate), "training.learning_rate",
        "must be finite and >= 0");
  check(batch_size >= 1, "training.batch_size", "must be >= 1");
  check(time_budget_s > 0.0, "training.time_budget_s", "must be positive");
  check(compute_speed_min > 0.0, "training.compute_speed_min", "must be positive");
  check(compute_speed_max >= compute_speed_min, "training.compute_speed_max",
        "must be >= compute_speed_min");
  for (int w : hidden_layers) check(w >= 1, "training.hidden_layers", "widths must be positive");
  check(forced_quant_bits >= 0 && forced_quant_bits <= 32, "compression.force_quant_bits",
        "must lie in [0, 32]");

  check(!dataset.source.empty(), "dataset.source", "required field is missing");
  check(dataset.source == "idx" || dataset.source == "synthetic", "dataset.source",
        "must be 'idx' or 'synthetic'");
  if (dataset.source == "idx") {
    check(!dataset.images.empty(), "dataset.images", "required when dataset.source = idx");
    check(!dataset.labels.empty(), "dataset.labels", "required when dataset.source = idx");
    check(dataset.shards_per_device >= 1, "dataset.shards_per_device", "must be >= 1");
  } else {
    check(dataset.synthetic.num_classes >= 2, "dataset.num_classes", "must be >= 2");
    check(dataset.synthetic.feature_dim >= 1, "dataset.feature_dim", "must be >= 1");
    check(dataset.synthetic.median_samples >= 2.0, "dataset.median_samples", "must be >= 2");
    check(dataset.synthetic.samples_log_sigma >= 0.0, "dataset.samples_log_sigma", "must be >= 0");
    check(dataset.synthetic.label_concentration > 0.0, "dataset.label_concentration",
          "must be positive");
  }
  check(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0, "dataset.train_fraction",
        "must lie in (0, 1)");
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(config, value, base_dir);
      return;
    }
  }
  throw ConfigError(key, "unknown configuration key");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : setters()) keys.push_back(entry.first);
  return keys;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(section, "keys must live inside a [section]");
    }
    for (const auto& [key, value] : body) {
      apply_setting(config, section + "." + key, value.get_value<std::string>(), base_dir);
    }
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(item, "override must look like section.key=value");
    }
    apply_setting(config, trim(item.substr(0, eq)), item.substr(eq + 1),
                  std::filesystem::current_path());
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot read " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path(), overrides);
}

}  // namespace nomafl
