#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "nomafl/compress.hpp"
#include "nomafl/config.hpp"
#include "nomafl/error.hpp"
#include "nomafl/sim.hpp"
#include "report.hpp"

namespace nomafl::cli {

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

struct ExperimentArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string mode;
  std::string out_dir;
};

void add_experiment_options(CLI::App& cmd, ExperimentArgs& a, bool with_mode) {
  cmd.add_option("config", a.config_path, "Experiment config file")->required();
  cmd.add_option("--seed", a.seed, "Override experiment.seed");
  if (with_mode) cmd.add_option("--mode", a.mode, "tdma, noma-quant or noma-sparse");
  cmd.add_option("--out-dir", a.out_dir, "Output directory");
  cmd.add_option("--override", a.overrides, "section.key=value, repeatable");
}

ExperimentConfig load(const ExperimentArgs& a) {
  std::vector<std::string> overrides = a.overrides;
  if (!a.seed.empty()) overrides.push_back("experiment.seed=" + a.seed);
  if (!a.mode.empty()) overrides.push_back("experiment.mode=" + a.mode);
  if (!a.out_dir.empty()) overrides.push_back("experiment.out_dir=" + a.out_dir);
  auto config = load_config(a.config_path, overrides);
  // --out-dir is relative to the working directory, not the config file.
  if (!a.out_dir.empty()) config.out_dir = a.out_dir;
  return config;
}

void print_summary(std::ostream& out, const ExperimentResult& r) {
  double final_acc = r.initial_accuracy;
  for (const auto& m : r.rounds) {
    if (m.accuracy) final_acc = *m.accuracy;
  }
  out << fmt::format("{:<12} K={} params={} initial_acc={:.4f} final_acc={:.4f} "
                     "mean_ratio={:.4f} comm_time={:.3f}s\n",
                     to_string(r.mode), r.cohort_size, r.param_count, r.initial_accuracy,
                     final_acc, report::run_mean_compression_ratio(r),
                     r.rounds.empty() ? 0.0 : r.rounds.back().cumulative_comm_time_s);
}

struct CodecArgs {
  std::string input;
  std::string output;
  std::uint64_t budget = 0;
  std::size_t count = 0;
  int bits = 0;
};

int codec_encode(Codec codec, const CodecArgs& a, std::ostream& out) {
  const auto floats = read_f32_file(a.input);
  const std::vector<double> values(floats.begin(), floats.end());
  const auto enc = codec == Codec::kQuantize ? encode_quantized(values, a.budget, a.bits)
                                             : encode_sparse(values, a.budget);
  write_bytes(a.output, enc.wire);
  out << fmt::format("count={} payload_bits={} parameter={} keep_ratio={:.9g} kept={}\n",
                     values.size(), enc.payload_bits, enc.parameter, enc.keep_ratio,
                     enc.kept_count);
  return kExitOk;
}

int codec_decode(Codec codec, const CodecArgs& a, std::ostream& out) {
  const auto wire = read_bytes(a.input);
  const auto values = decode(codec, wire, a.count);
  std::vector<float> floats(values.size());
  std::transform(values.begin(), values.end(), floats.begin(),
                 [](double v) { return static_cast<float>(v); });
  write_f32_file(a.output, floats);
  out << fmt::format("count={} bytes={}\n", floats.size(), wire.size());
  return kExitOk;
}

}  // namespace

std::vector<float> read_f32_file(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() % 4 != 0) {
    throw FormatError(path.string() + ": size is not a multiple of 4", bytes.size());
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t u = std::uint32_t{bytes[4 * i]} | std::uint32_t{bytes[4 * i + 1]} << 8 |
                            std::uint32_t{bytes[4 * i + 2]} << 16 |
                            std::uint32_t{bytes[4 * i + 3]} << 24;
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

void write_f32_file(const std::filesystem::path& path, const std::vector<float>& values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    for (int j = 0; j < 4; ++j) bytes[4 * i + j] = static_cast<std::uint8_t>(u >> (8 * j));
  }
  write_bytes(path, bytes);
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated learning over a NOMA uplink with compressed updates", "nomafl"};
  app.require_subcommand(1);

  ExperimentArgs run_args;
  auto* run = app.add_subcommand("run", "Run one experiment and write metrics and plots");
  add_experiment_options(*run, run_args, true);

  ExperimentArgs compare_args;
  auto* compare =
      app.add_subcommand("compare", "Run TDMA, NOMA-quant and NOMA-sparse on shared data");
  add_experiment_options(*compare, compare_args, false);

  CodecArgs codec_args;
  auto* codec = app.add_subcommand("codec", "Encode or decode raw little-endian f32 vectors");
  codec->require_subcommand(1);
  struct Leaf {
    Codec codec;
    bool encode;
    CLI::App* app;
  };
  std::vector<Leaf> leaves;
  for (auto [name, kind] : {std::pair{"quant", Codec::kQuantize}, {"sparse", Codec::kSparsify}}) {
    auto* c = codec->add_subcommand(name, name == std::string("quant") ? "Adaptive quantization"
                                                                      : "Top-k sparsification");
    c->require_subcommand(1);
    auto* enc = c->add_subcommand("encode", "f32 vector to wire payload");
    enc->add_option("--input", codec_args.input)->required();
    enc->add_option("--output", codec_args.output)->required();
    enc->add_option("--budget", codec_args.budget, "Bit budget including header")->required();
    if (kind == Codec::kQuantize) {
      enc->add_option("--bits", codec_args.bits, "Fixed bit length (1..32)")
          ->check(CLI::Range(1, 32));
    }
    auto* dec = c->add_subcommand("decode", "wire payload to f32 vector");
    dec->add_option("--input", codec_args.input)->required();
    dec->add_option("--output", codec_args.output)->required();
    dec->add_option("--count", codec_args.count, "Vector length")->required();
    leaves.push_back({kind, true, enc});
    leaves.push_back({kind, false, dec});
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      const auto config = load(run_args);
      const auto result = run_experiment(config);
      report::write_outputs(config.out_dir, std::span(&result, 1));
      print_summary(out, result);
      return kExitOk;
    }
    if (compare->parsed()) {
      const auto config = load(compare_args);
      const auto results = run_comparison(config);
      report::write_outputs(config.out_dir, results);
      for (const auto& r : results) print_summary(out, r);
      return kExitOk;
    }
    for (const auto& leaf : leaves) {
      if (!leaf.app->parsed()) continue;
      return leaf.encode ? codec_encode(leaf.codec, codec_args, out)
                         : codec_decode(leaf.codec, codec_args, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DecodeError& e) {
    err << "decode error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const OverBudgetError& e) {
    err << "over budget: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace nomafl::cli
