// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "nomafl/compress.hpp"
#include "nomafl/config.hpp"
#include "nomafl/flcore.hpp"
#include "nomafl/noma.hpp"
#include "nomafl/sim.hpp"

namespace fs = std::filesystem;
using namespace nomafl;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path config = NOMAFL_MNIST_CONFIG;
  fs::path work_dir = "acceptance_work";
};

// ------------------------------------------------------------------ helpers

std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Rows of a CSV file keyed by header name.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::vector<std::map<std::string, std::string>> rows;
  if (!std::getline(f, line)) return rows;
  const auto header = split(line, ',');
  while (std::getline(f, line)) {
    const auto cells = split(line, ',');
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs `compare` through the CLI into `dir` and records its wall time.
double run_compare(const Options& opt, const fs::path& dir) {
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code = cli::main({"compare", opt.config.string(), "--out-dir", dir.string()}, out, err);
  const double elapsed = seconds_since(t0);
  if (code != 0) throw std::runtime_error("compare failed: " + err.str());
  std::ofstream(dir / "elapsed_s.txt") << fmt::format("{:.3f}\n", elapsed);
  std::cout << out.str();
  return elapsed;
}

fs::path first_run(const Options& opt) {
  const fs::path dir = opt.work_dir / "compare_1";
  if (!fs::exists(dir / "elapsed_s.txt")) run_compare(opt, dir);
  return dir;
}

// ------------------------------------------------------------- criteria

Verdict codec_exactness(const Options&) {
  std::mt19937_64 rng(2024);
  const int bit_lengths[] = {1, 2, 4, 8, 16, 32};
  std::size_t sparse_mismatch = 0;
  double worst_quant = 0.0;  // error / bound
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t p = trial % 2 ? 10'000 : 1'000;
    const auto v = normal_vector(p, rng, trial % 3 ? 0.05 : 1.0);

    const double r = std::exp(std::uniform_real_distribution<double>(std::log(1e-3), 0.0)(rng));
    const auto wire = serialize(sparsify(v, r));
    const auto back = desparsify(deserialize_sparse(wire, p), p);
    // Naive mask oracle: top-s by magnitude, lower index first on ties.
    const auto s = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(r * static_cast<double>(p)), 1, static_cast<long long>(p)));
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
    std::vector<double> oracle(p, 0.0);
    for (std::size_t i = 0; i < s; ++i) oracle[idx[i]] = static_cast<float>(v[idx[i]]);
    if (back != oracle) ++sparse_mismatch;

    const int b = bit_lengths[trial % 6];
    const auto q = deserialize_quantized(serialize(quantize(v, b)), p);
    const auto deq = dequantize(q);
    const double bound = 1.0 / static_cast<double>((std::uint64_t{1} << b) - 1);
    for (std::size_t i = 0; i < p; ++i) {
      worst_quant = std::max(worst_quant, std::abs(std::clamp(v[i], -1.0, 1.0) - deq[i]) / bound);
    }
  }
  return {sparse_mismatch == 0 && worst_quant <= 1.0 + 1e-9,
          fmt::format("sparse mismatches {}/1000, worst quant error {:.6f} of bound",
                      sparse_mismatch, worst_quant)};
}

Verdict golomb_cost(const Options&) {
  std::mt19937_64 rng(7);
  constexpr std::size_t kP = 100'000;
  bool ok = true;
  std::string detail;
  for (double r : {0.001, 0.01, 0.1}) {
    std::uint64_t bits = 0, kept = 0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(kP, 0.0);
      std::bernoulli_distribution keep(r);
      std::size_t n = 0;
      for (auto& x : v) {
        if (keep(rng)) {
          x = 1.0;
          ++n;
        }
      }
      const auto s = sparsify(v, static_cast<double>(n) / kP);
      bits += s.position_bits;
      kept += s.kept_count;
    }
    const double measured = static_cast<double>(bits) / static_cast<double>(kept);
    const double model = avg_position_bits(r);
    const double rel = std::abs(measured / model - 1.0);
    ok &= rel <= 0.10;
    detail += fmt::format("r={} measured {:.3f} model {:.3f} ({:+.1f}%); ", r, measured, model,
                          100.0 * (measured / model - 1.0));
  }
  return {ok, detail};
}

Verdict solver(const Options&) {
  std::mt19937_64 rng(99);
  std::size_t interior = 0, full = 0, bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t g = 32 * (1'000 + rng() % 999'000);
    const double gd = static_cast<double>(g);
    const double full_cost = gd + gd / 32.0 * avg_position_bits(1.0) + kSparseHeaderBits;
    // Even draws: log-uniform budgets between the header and the full-keep
    // cost. Odd draws: budgets that cover everything.
    std::uniform_real_distribution<double> unit;
    const auto m = static_cast<std::uint64_t>(
        i % 2 == 0 ? 100.0 * std::exp(std::log(full_cost / 100.0) * unit(rng))
                   : std::ceil(full_cost) * (1.0 + unit(rng)));
    const double r = solve_sparsity_ratio(g, m);
    if (static_cast<double>(m) >= full_cost) {
      ++full;
      if (r != 1.0) ++bad;
      continue;
    }
    if (r >= 1.0) {
      ++bad;
      continue;
    }
    ++interior;
    const double f = gd * r + gd * r / 32.0 * avg_position_bits(r) -
                     (static_cast<double>(m) - kSparseHeaderBits);
    worst = std::max(worst, std::abs(f) / static_cast<double>(m));
    if (std::abs(f) > 1e-3 * static_cast<double>(m)) ++bad;
  }
  return {bad == 0, fmt::format("{} interior roots (worst |F|/m = {:.2e}), {} full-keep, {} bad",
                                interior, worst, full, bad)};
}

Verdict rate_suite(const Options&) {
  std::vector<std::string> failures;
  const auto expect = [&](bool ok, const char* what) {
    if (!ok) failures.emplace_back(what);
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ReceivedPower> p;
    for (int k = 0; k < 8; ++k) p.push_back({k, u(rng)});
    const auto order = sic_order(p);
    for (std::size_t k = 1; k < order.size(); ++k) {
      expect(order[k - 1].power_w >= order[k].power_w, "sic order descending");
    }
    std::vector<double> ordered;
    for (const auto& o : order) ordered.push_back(o.power_w);
    const auto rates = noma_rates(ordered, 0.5, 2.0);
    for (std::size_t drop = 1; drop < ordered.size(); ++drop) {
      auto fewer = ordered;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto r2 = noma_rates(fewer, 0.5, 2.0);
      for (std::size_t k = 0; k < drop; ++k) expect(r2[k] >= rates[k], "interference removal");
    }
    expect(rates.back() == tdma_rate(ordered.back(), 0.5, 2.0), "last user interference-free");
    const std::vector<double> one{ordered[0]};
    expect(noma_rates(one, 0.5, 2.0)[0] == tdma_rate(ordered[0], 0.5, 2.0), "K=1 reduction");
    std::shuffle(p.begin(), p.end(), rng);
    const auto again = sic_order(p);
    for (std::size_t k = 0; k < order.size(); ++k) {
      expect(again[k].user_id == order[k].user_id, "permutation safety");
    }
  }
  const std::vector<ReceivedPower> tied{{3, 1.0}, {1, 1.0}, {2, 1.0}};
  const auto t = sic_order(tied);
  expect(t[0].user_id == 1 && t[1].user_id == 2 && t[2].user_id == 3, "tie order");
  for (std::size_t k = 1; k <= 20; ++k) {
    expect(jain_index(std::vector<double>(k, 2.5)) == 1.0, "jain equal");
    std::vector<double> single(k, 0.0);
    single[k / 2] = 4.0;
    expect(std::abs(jain_index(single) - 1.0 / static_cast<double>(k)) < 1e-15, "jain single");
  }
  expect(std::abs(jain_index(std::vector<double>{1, 2, 3}) - 6.0 / 7.0) < 1e-15, "jain 1,2,3");
  expect(std::abs(noma_rates(std::vector<double>{3.0, 1.0}, 1.0, 1.0)[0] - std::log2(2.5)) < 1e-15,
         "two-user rate");
  std::string detail = failures.empty() ? "all identities hold" : failures.front();
  if (failures.size() > 1) detail += fmt::format(" (+{} more)", failures.size() - 1);
  return {failures.empty(), detail};
}

Verdict latency(const Options& opt) {
  const auto config = load_config(opt.config);
  const auto data = build_dataset(config);
  Simulator noma(config, data, Mode::kNomaSparse);
  Simulator tdma(config, data, Mode::kTdma);
  const double k = static_cast<double>(noma.cohort_size());
  const double t = config.channel.slot_duration_s;
  std::size_t eligible = 0, violations = 0, mismatches = 0, failed = 0;
  double sum_ratio = 0.0, sum_td = 0.0;
  for (std::size_t round = 1; round <= config.rounds; ++round) {
    const auto a = noma.plan_round(round);
    const auto b = tdma.plan_round(round);
    if (!a.schedule) {
      ++failed;
      continue;
    }
    const double td = a.downlink_time_s;
    const double ratio = b.comm_time_s / a.comm_time_s;
    if (std::abs(ratio - (k * t + td) / (t + td)) > 1e-12 * ratio) ++mismatches;
    sum_ratio += ratio;
    sum_td += td;
    if (td <= 0.25) {
      ++eligible;
      if (ratio < 7.0) ++violations;
    }
  }
  const std::size_t ok_rounds = config.rounds - failed;
  return {violations == 0 && mismatches == 0 && eligible > 0,
          fmt::format("K={}, {} rounds with T_d <= 0.25 s of {}, {} below 7x, mean ratio {:.2f}, "
                      "mean T_d {:.4f} s",
                      noma.cohort_size(), eligible, ok_rounds, violations,
                      sum_ratio / static_cast<double>(ok_rounds),
                      sum_td / static_cast<double>(ok_rounds))};
}

std::map<std::string, std::map<std::string, std::string>> summary_by_mode(const fs::path& dir) {
  std::map<std::string, std::map<std::string, std::string>> out;
  for (auto& row : read_csv(dir / "summary.csv")) out[row["mode"]] = row;
  return out;
}

Verdict learning(const Options& opt) {
  const auto dir = first_run(opt);
  const double elapsed = std::stod(slurp(dir / "elapsed_s.txt"));
  auto s = summary_by_mode(dir);
  const double tdma = std::stod(s["tdma"]["final_accuracy_frac"]);
  const double quant = std::stod(s["noma-quant"]["final_accuracy_frac"]);
  const double sparse = std::stod(s["noma-sparse"]["final_accuracy_frac"]);
  const bool ok = sparse >= 0.80 && std::abs(sparse - tdma) <= 0.03 && sparse >= quant &&
                  elapsed <= 15 * 60;
  return {ok, fmt::format("final accuracy tdma {:.4f}, noma-quant {:.4f}, noma-sparse {:.4f}; "
                          "compare took {:.0f} s",
                          tdma, quant, sparse, elapsed)};
}

Verdict compression_ratio(const Options& opt) {
  const auto dir = first_run(opt);
  auto s = summary_by_mode(dir);
  const double ratio = std::stod(s["noma-quant"]["mean_compression_ratio"]);
  return {ratio >= 0.35 && ratio <= 0.75,
          fmt::format("run-averaged quantization compression ratio {:.4f} (accepted [0.35, 0.75])",
                      ratio)};
}

Verdict determinism(const Options& opt) {
  const auto dir1 = first_run(opt);
  const double first = std::stod(slurp(dir1 / "elapsed_s.txt"));
  const auto dir2 = opt.work_dir / "compare_2";
  const double second = run_compare(opt, dir2);
  bool same = true;
  for (const char* f : {"metrics.csv", "summary.csv"}) same &= slurp(dir1 / f) == slurp(dir2 / f);
  const double budget = 2 * 15 * 60;
  return {same && first + second < budget,
          fmt::format("CSVs {}; two runs took {:.0f} s + {:.0f} s (limit {:.0f} s)",
                      same ? "byte-identical" : "DIFFER", first, second, budget)};
}

Verdict gradient_check(const Options&) {
  const Architecture arch{{12, 10, 8, 4}};
  auto model = init_model(arch, 31);
  std::mt19937_64 rng(32);
  Samples data;
  data.feature_dim = 12;
  std::normal_distribution<float> x(0.0f, 1.0f);
  std::vector<float> row(12);
  for (int i = 0; i < 24; ++i) {
    for (auto& v : row) v = x(rng);
    data.push_back(row, i % 4);
  }
  for (std::size_t i = 0; i < model.theta.size(); ++i) model.theta[i] += 0.01 * std::cos(i + 0.5);
  const auto grad = loss_and_grad(model, data).grad;
  std::vector<std::size_t> idx(model.theta.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(100);
  constexpr double kEps = 1e-5;
  double worst = 0.0;
  for (std::size_t i : idx) {
    auto plus = model, minus = model;
    plus.theta[i] += kEps;
    minus.theta[i] -= kEps;
    const double fd = (loss_and_grad(plus, data).loss - loss_and_grad(minus, data).loss) / (2 * kEps);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1e-8, std::abs(fd) + std::abs(grad[i])));
  }
  return {worst <= 1e-4, fmt::format("worst relative error {:.2e} over 100 parameters of a {}-parameter net",
                                     worst, model.theta.size())};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no separate runtime limit
  std::function<Verdict(const Options&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Options opt;
  std::vector<int> selected;
  bool prepare = false;
  app.add_option("--criterion", selected, "Criteria to run (default: all)");
  app.add_option("--config", opt.config, "Experiment config for criteria 5-8");
  app.add_option("--work-dir", opt.work_dir, "Scratch directory for compare outputs");
  app.add_flag("--prepare", prepare, "Run the shared compare experiment and exit");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(opt.work_dir);
  if (prepare) {
    try {
      const double s = run_compare(opt, opt.work_dir / "compare_1");
      std::cout << fmt::format("prepared shared compare run in {:.0f} s\n", s);
      return 0;
    } catch (const std::exception& e) {
      std::cout << "prepare failed: " << e.what() << '\n';
      return 1;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "codec exactness", 30, codec_exactness},
      {2, "Golomb position cost", 10, golomb_cost},
      {3, "sparsity-ratio solver", 5, solver},
      {4, "NOMA rate suite", 1, rate_suite},
      {5, "latency ratio", 0, latency},
      {6, "learning reproduction", 0, learning},
      {7, "compression-ratio plausibility", 0, compression_ratio},
      {8, "determinism", 0, determinism},
      {9, "gradient correctness", 5, gradient_check},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check(opt);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = seconds_since(t0);
    if (c.limit_s > 0 && s > c.limit_s) {
      v.pass = false;
      v.detail += fmt::format("; exceeded {:.0f} s limit", c.limit_s);
    }
    std::cout << fmt::format("criterion {} [{}]: {} ({:.2f} s) {}\n", c.id, c.name,
                             v.pass ? "PASS" : "FAIL", s, v.detail)
              << std::flush;
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
