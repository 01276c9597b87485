#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nomafl/sim.hpp"

namespace nomafl::report {

// One row per round and mode. Column names carry their units.
void write_metrics_csv(std::ostream& out, std::span<const ExperimentResult> results);

// One row per mode: initial/final accuracy, run-averaged compression ratio,
// total communication time.
void write_summary_csv(std::ostream& out, std::span<const ExperimentResult> results);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart.
std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

std::vector<Series> accuracy_by_round(std::span<const ExperimentResult> results);
std::vector<Series> accuracy_by_comm_time(std::span<const ExperimentResult> results);

// metrics.csv, summary.csv, accuracy_vs_round.svg, accuracy_vs_time.svg.
void write_outputs(const std::filesystem::path& dir, std::span<const ExperimentResult> results);

// Mean of per-round mean compression ratios over non-failed rounds.
double run_mean_compression_ratio(const ExperimentResult& result);

}  // namespace nomafl::report
