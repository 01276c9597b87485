#include "report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nomafl::report {

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ';';
    out += format(items[i]);
  }
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, giving about `target` ticks over the span.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << "mode,round,failed,cohort_size,accuracy_frac,loss_nats,jain_index,"
         "mean_compression_ratio,over_budget_count,downlink_time_s,round_comm_time_s,"
         "cumulative_comm_time_s,cumulative_total_time_s,selected_users,bit_budgets_bits,"
         "compression_ratios\n";
  for (const auto& r : results) {
    for (const auto& m : r.rounds) {
      out << to_string(m.mode) << ',' << m.round_index << ',' << (m.failed ? 1 : 0) << ','
          << m.selected.size() << ',' << (m.accuracy ? num(*m.accuracy) : "") << ','
          << (m.loss ? num(*m.loss) : "") << ',' << num(m.jain_index) << ','
          << num(m.mean_compression_ratio) << ',' << m.over_budget_count << ','
          << num(m.downlink_time_s) << ',' << num(m.round_comm_time_s) << ','
          << num(m.cumulative_comm_time_s) << ',' << num(m.cumulative_total_time_s) << ','
          << join(m.selected, [](int v) { return std::to_string(v); }) << ','
          << join(m.bit_budgets, [](std::uint64_t v) { return std::to_string(v); }) << ','
          << join(m.compression_ratios, [](double v) { return num(v); }) << '\n';
    }
  }
}

double run_mean_compression_ratio(const ExperimentResult& result) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : result.rounds) {
    if (m.failed) continue;
    sum += m.mean_compression_ratio;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

void write_summary_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << "mode,param_count,cohort_size,rounds,initial_accuracy_frac,final_accuracy_frac,"
         "mean_compression_ratio,total_comm_time_s,failed_rounds\n";
  for (const auto& r : results) {
    std::string final_acc;
    for (auto it = r.rounds.rbegin(); it != r.rounds.rend(); ++it) {
      if (it->accuracy) {
        final_acc = num(*it->accuracy);
        break;
      }
    }
    const auto failed = std::count_if(r.rounds.begin(), r.rounds.end(),
                                      [](const RoundMetrics& m) { return m.failed; });
    out << to_string(r.mode) << ',' << r.param_count << ',' << r.cohort_size << ','
        << r.rounds.size() << ',' << num(r.initial_accuracy) << ',' << final_acc << ','
        << num(run_mean_compression_ratio(r)) << ','
        << num(r.rounds.empty() ? 0.0 : r.rounds.back().cumulative_comm_time_s) << ','
        << failed << '\n';
  }
}

std::vector<Series> accuracy_by_round(std::span<const ExperimentResult> results) {
  std::vector<Series> out;
  for (const auto& r : results) {
    Series s{std::string(to_string(r.mode)), {0.0}, {r.initial_accuracy}};
    for (const auto& m : r.rounds) {
      if (!m.accuracy) continue;
      s.x.push_back(static_cast<double>(m.round_index));
      s.y.push_back(*m.accuracy);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Series> accuracy_by_comm_time(std::span<const ExperimentResult> results) {
  std::vector<Series> out;
  for (const auto& r : results) {
    Series s{std::string(to_string(r.mode)), {0.0}, {r.initial_accuracy}};
    for (const auto& m : r.rounds) {
      if (!m.accuracy) continue;
      s.x.push_back(m.cumulative_comm_time_s);
      s.y.push_back(*m.accuracy);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 0.0;
  for (const auto& s : series) {
    for (double x : s.x) x_max = std::max(x_max, x);
  }
  if (x_max <= 0.0) x_max = 1.0;
  const double x_step = nice_step(x_max, 5);
  x_max = std::ceil(x_max / x_step) * x_step;
  const auto px = [&](double x) { return kLeft + plot_w * x / x_max; };
  const auto py = [&](double y) { return kTop + plot_h * (1.0 - std::clamp(y, 0.0, 1.0)); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kLeft + plot_w / 2, escape_xml(title));

  for (int i = 0; i <= 10; i += 2) {
    const double y = i / 10.0;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>"
        "<text x=\"{3}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.1f}</text>\n",
        kLeft, py(y), kLeft + plot_w, kLeft - 6, py(y) + 4, y);
  }
  for (double x = 0.0; x <= x_max + 1e-9; x += x_step) {
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>"
        "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4:g}</text>\n",
        px(x), kTop, kTop + plot_h, kTop + plot_h + 18, x);
  }
  svg += fmt::format(
      "<rect x=\"{0}\" y=\"{1}\" width=\"{2}\" height=\"{3}\" fill=\"none\" stroke=\"black\"/>\n"
      "<text x=\"{4}\" y=\"{5}\" text-anchor=\"middle\">{6}</text>\n"
      "<text transform=\"translate(18 {7}) rotate(-90)\" text-anchor=\"middle\">{8}</text>\n",
      kLeft, kTop, plot_w, plot_h, kLeft + plot_w / 2, kHeight - 15, escape_xml(x_label),
      kTop + plot_h / 2, escape_xml(y_label));

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::string points;
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      points += fmt::format("{}{:.2f},{:.2f}", j ? " " : "", px(s.x[j]), py(s.y[j]));
    }
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{0}\" stroke-width=\"1.8\" points=\"{1}\"/>\n"
        "<line x1=\"{2}\" y1=\"{3}\" x2=\"{4}\" y2=\"{3}\" stroke=\"{0}\" stroke-width=\"3\"/>"
        "<text x=\"{5}\" y=\"{6}\">{7}</text>\n",
        color, points, kLeft + plot_w + 12, kTop + 14 + 20.0 * static_cast<double>(i),
        kLeft + plot_w + 36, kLeft + plot_w + 42, kTop + 18 + 20.0 * static_cast<double>(i),
        escape_xml(s.name));
  }
  svg += "</svg>\n";
  return svg;
}

void write_outputs(const std::filesystem::path& dir, std::span<const ExperimentResult> results) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "metrics.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    write_metrics_csv(f, results);
  }
  {
    std::ofstream f(dir / "summary.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    write_summary_csv(f, results);
  }
  write_file(dir / "accuracy_vs_round.svg",
             render_svg(accuracy_by_round(results), "Test accuracy vs. round", "round",
                        "mean test accuracy"));
  write_file(dir / "accuracy_vs_time.svg",
             render_svg(accuracy_by_comm_time(results), "Test accuracy vs. communication time",
                        "cumulative communication time (s)", "mean test accuracy"));
}

}  // namespace nomafl::report
