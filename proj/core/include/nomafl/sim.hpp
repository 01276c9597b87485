#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nomafl/channel.hpp"
#include "nomafl/config.hpp"
#include "nomafl/data.hpp"
#include "nomafl/flcore.hpp"
#include "nomafl/scheduler.hpp"
#include "nomafl/user_profile.hpp"

namespace nomafl {

struct RoundMetrics {
  std::size_t round_index = 0;
  Mode mode = Mode::kNomaSparse;
  bool failed = false;
  std::vector<int> selected;                 // ascending user_id
  std::vector<std::uint64_t> bit_budgets;    // parallel to `selected`
  std::vector<double> compression_ratios;    // payload_bits / G, 0 if nothing sent
  double mean_compression_ratio = 0.0;
  double jain_index = 0.0;                   // of the cohort's ranking capacities
  std::size_t over_budget_count = 0;
  std::optional<double> accuracy;            // set on evaluation rounds
  std::optional<double> loss;
  double downlink_time_s = 0.0;
  double round_comm_time_s = 0.0;
  double cumulative_comm_time_s = 0.0;
  double cumulative_total_time_s = 0.0;      // communication + compute budgets
};

// Per-user view of one round's compression step.
struct UserRoundTrace {
  std::size_t round_index = 0;
  int user_id = 0;
  std::span<const double> delta;           // local model change
  std::span<const double> prior_residual;
  std::span<const double> decoded;         // what the server reconstructed
  std::span<const double> residual;        // kept for the next round
  bool over_budget = false;
};

// Channels, cohort and air time for one round; independent of the model.
struct RoundPlan {
  std::size_t round_index = 0;
  RoundChannels channels;
  std::optional<Schedule> schedule;  // empty when scheduling failed
  std::vector<std::uint64_t> tdma_budgets;  // interference-free m_k, per selected user
  double downlink_time_s = 0.0;
  double comm_time_s = 0.0;
};

// Places users uniformly over the annulus [min_distance, radius] and draws
// log-uniform compute speeds.
std::vector<UserProfile> make_users(const ExperimentConfig& config, const FederatedDataset& data);

FederatedDataset build_dataset(const ExperimentConfig& config);

Architecture model_architecture(const ExperimentConfig& config, const FederatedDataset& data);

class Simulator {
 public:
  Simulator(ExperimentConfig config, const FederatedDataset& data, Mode mode);

  // Executes the next round (1-based) and returns its metrics.
  RoundMetrics run_round();

  RoundPlan plan_round(std::size_t round_index) const;
  Evaluation evaluate_model(std::span<const int> participants = {}) const;

  const ModelParams& model() const noexcept { return model_; }
  const std::vector<UserProfile>& users() const noexcept { return users_; }
  std::size_t rounds_run() const noexcept { return round_; }
  std::size_t cohort_size() const noexcept { return k_; }
  Mode mode() const noexcept { return mode_; }

  void set_trace(std::function<void(const UserRoundTrace&)> trace) { trace_ = std::move(trace); }

 private:
  ExperimentConfig config_;
  const FederatedDataset& data_;
  Mode mode_;
  std::size_t k_;
  ModelParams model_;
  std::vector<UserProfile> users_;
  std::size_t round_ = 0;
  double cumulative_comm_ = 0.0;
  double cumulative_total_ = 0.0;
  std::function<void(const UserRoundTrace&)> trace_;
};

struct ExperimentResult {
  Mode mode = Mode::kNomaSparse;
  std::size_t param_count = 0;
  std::size_t cohort_size = 0;
  double initial_accuracy = 0.0;
  double initial_loss = 0.0;
  std::vector<RoundMetrics> rounds;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const FederatedDataset& data,
                                Mode mode);
ExperimentResult run_experiment(const ExperimentConfig& config);

// TDMA, NOMA-quantization and NOMA-sparsification on the same data and seed.
std::vector<ExperimentResult> run_comparison(const ExperimentConfig& config);

}  // namespace nomafl
