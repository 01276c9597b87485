#include "nomafl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nomafl/compress.hpp"
#include "nomafl/error.hpp"
#include "nomafl/noma.hpp"

namespace nomafl {

namespace {

struct UserOutcome {
  std::vector<double> decoded;
  std::size_t dataset_size = 0;
  std::uint64_t payload_bits = 0;
  bool delivered = false;
};

}  // namespace

std::vector<UserProfile> make_users(const ExperimentConfig& config, const FederatedDataset& data) {
  if (data.devices.size() != config.num_users) {
    throw DomainError("make_users: dataset has " + std::to_string(data.devices.size()) +
                      " devices for " + std::to_string(config.num_users) + " users");
  }
  const double r0 = config.min_distance_m;
  const double r1 = config.cell_radius_m;
  std::vector<UserProfile> users(config.num_users);
  for (std::size_t i = 0; i < users.size(); ++i) {
    auto& u = users[i];
    u.user_id = static_cast<int>(i);
    u.shard_index = i;
    u.dataset_size = data.devices[i].train.size();

    Rng place = make_stream(config.seed, StreamTag::kPlacement, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = std::sqrt(r0 * r0 + unit(place) * (r1 * r1 - r0 * r0));
    const double angle = 2.0 * std::numbers::pi * unit(place);
    u.position = {radius * std::cos(angle), radius * std::sin(angle)};

    Rng speed = make_stream(config.seed, StreamTag::kComputeSpeed, i);
    const double lo = std::log(config.compute_speed_min);
    const double hi = std::log(config.compute_speed_max);
    u.compute_speed = std::exp(lo + (hi - lo) * unit(speed));
  }
  return users;
}

FederatedDataset build_dataset(const ExperimentConfig& config) {
  Rng rng = make_stream(config.seed, StreamTag::kDataset);
  if (config.dataset.source == "synthetic") {
    SyntheticSpec spec = config.dataset.synthetic;
    spec.num_devices = config.num_users;
    spec.train_fraction = config.dataset.train_fraction;
    return generate_synthetic(spec, rng);
  }
  Samples samples = load_idx(config.dataset.images, config.dataset.labels);
  if (config.dataset.limit > 0 && config.dataset.limit < samples.size()) {
    samples.features.resize(config.dataset.limit * samples.feature_dim);
    samples.labels.resize(config.dataset.limit);
  }
  Rng part = make_stream(config.seed, StreamTag::kPartition);
  return partition_noniid(samples, config.num_users, config.dataset.shards_per_device, part,
                          config.dataset.train_fraction);
}

Architecture model_architecture(const ExperimentConfig& config, const FederatedDataset& data) {
  Architecture arch;
  arch.layers.push_back(static_cast<int>(data.feature_dim));
  arch.layers.insert(arch.layers.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  arch.layers.push_back(data.num_classes);
  return arch;
}

Simulator::Simulator(ExperimentConfig config, const FederatedDataset& data, Mode mode)
    : config_(std::move(config)),
      data_(data),
      mode_(mode),
      k_(participant_count(config_.participation, config_.num_users)),
      model_(init_model(model_architecture(config_, data), config_.seed)),
      users_(make_users(config_, data)) {
  config_.validate();
  data_.validate();
  for (auto& u : users_) u.residual.assign(model_.theta.size(), 0.0);
}

RoundPlan Simulator::plan_round(std::size_t round_index) const {
  const auto& ch = config_.channel;
  RoundPlan plan;
  plan.round_index = round_index;
  plan.channels = realize_round_channels(users_, ch, round_index, config_.seed);
  try {
    plan.schedule = select_participants(users_, plan.channels.uplink, ch, k_,
                                        config_.time_budget_s, round_index);
  } catch (const SchedulingError&) {
    plan.schedule.reset();
  }

  const double slots = mode_ == Mode::kTdma ? static_cast<double>(k_) : 1.0;
  if (!plan.schedule) {
    plan.comm_time_s = slots * ch.slot_duration_s;
    return plan;
  }
  std::vector<double> gains;
  for (int id : plan.schedule->selected) {
    const auto i = static_cast<std::size_t>(id);
    gains.push_back(plan.channels.downlink_gain[i]);
    const double rate = tdma_rate(ch.tx_power_w * plan.channels.uplink[i].power_gain,
                                  ch.uplink_noise_w(), ch.sic_degradation);
    plan.tdma_budgets.push_back(bit_budget(rate, ch.uplink_bandwidth_hz, ch.slot_duration_s));
  }
  plan.downlink_time_s = downlink_time(model_.theta.size(), gains, ch);
  // NOMA users share one slot; TDMA gives each its own.
  const double cohort_slots =
      mode_ == Mode::kTdma ? static_cast<double>(plan.schedule->selected.size()) : 1.0;
  plan.comm_time_s = cohort_slots * ch.slot_duration_s + plan.downlink_time_s;
  return plan;
}

Evaluation Simulator::evaluate_model(std::span<const int> participants) const {
  std::vector<std::size_t> devices;
  if (config_.eval_participants_only) {
    for (int id : participants) devices.push_back(users_[static_cast<std::size_t>(id)].shard_index);
  }
  return evaluate(model_, data_, devices);
}

RoundMetrics Simulator::run_round() {
  const std::size_t t = ++round_;
  RoundPlan plan = plan_round(t);

  RoundMetrics m;
  m.round_index = t;
  m.mode = mode_;
  m.downlink_time_s = plan.downlink_time_s;
  m.round_comm_time_s = plan.comm_time_s;

  if (plan.schedule) {
    const Schedule& sched = *plan.schedule;
    const std::size_t p = model_.theta.size();
    const std::uint64_t gradient_bits = 32 * static_cast<std::uint64_t>(p);
    m.selected = sched.selected;
    m.jain_index = sched.provisional_jain;

    // NOMA budgets come from the SIC allocation, TDMA from private slots.
    std::vector<std::uint64_t> budgets(sched.selected.size());
    for (std::size_t j = 0; j < sched.selected.size(); ++j) {
      if (mode_ == Mode::kTdma) {
        budgets[j] = plan.tdma_budgets[j];
      } else {
        const auto it = std::find_if(sched.rates.begin(), sched.rates.end(), [&](const RateAllocation& r) {
          return r.user_id == sched.selected[j];
        });
        budgets[j] = it->bit_budget;
      }
    }
    m.bit_budgets = budgets;

    std::vector<UserOutcome> outcomes(sched.selected.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(sched.selected.size()); ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      auto& user = users_[static_cast<std::size_t>(sched.selected[j])];
      const Samples& shard = data_.devices[user.shard_index].train;
      Rng rng = make_stream(config_.seed, StreamTag::kLocalTraining,
                            static_cast<std::uint64_t>(user.user_id), t);
      TrainOptions opts{sched.local_epochs[j], config_.learning_rate, config_.batch_size};
      LocalUpdate local = local_train(model_, shard, opts, rng, user.user_id);

      UserOutcome& out = outcomes[j];
      out.dataset_size = local.dataset_size;
      if (mode_ == Mode::kTdma) {
        out.decoded = std::move(local.delta);
        out.payload_bits = gradient_bits;
        out.delivered = true;
        continue;
      }

      const std::vector<double> prior = user.residual;
      const std::vector<double> compensated = apply_residual(local.delta, prior);
      bool over_budget = false;
      try {
        const EncodedUpdate enc = mode_ == Mode::kNomaQuant
                                      ? encode_quantized(compensated, budgets[j], config_.forced_quant_bits)
                                      : encode_sparse(compensated, budgets[j]);
        const Codec codec = mode_ == Mode::kNomaQuant ? Codec::kQuantize : Codec::kSparsify;
        out.decoded = decode(codec, enc.wire, p);
        out.payload_bits = enc.payload_bits;
        out.delivered = true;
      } catch (const OverBudgetError&) {
        over_budget = true;
        out.decoded.assign(p, 0.0);
      }
      user.residual = update_residual(compensated, out.decoded);
      if (trace_) {
#if defined(_OPENMP)
#pragma omp critical(nomafl_trace)
#endif
        trace_({t, user.user_id, local.delta, prior, out.decoded, user.residual, over_budget});
      }
    }

    std::vector<WeightedDelta> received;
    m.compression_ratios.resize(outcomes.size());
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      const auto& o = outcomes[j];
      m.compression_ratios[j] =
          o.delivered ? static_cast<double>(o.payload_bits) / static_cast<double>(gradient_bits) : 0.0;
      if (o.delivered) {
        received.push_back({o.decoded, o.dataset_size});
      } else {
        ++m.over_budget_count;
      }
    }
    m.mean_compression_ratio =
        std::accumulate(m.compression_ratios.begin(), m.compression_ratios.end(), 0.0) /
        static_cast<double>(m.compression_ratios.size());
    if (!received.empty()) model_.theta = aggregate(model_.theta, received);
  } else {
    m.failed = true;
  }

  cumulative_comm_ += m.round_comm_time_s;
  cumulative_total_ += m.round_comm_time_s + config_.time_budget_s;
  m.cumulative_comm_time_s = cumulative_comm_;
  m.cumulative_total_time_s = cumulative_total_;

  if (t % config_.eval_interval == 0 || t == config_.rounds) {
    const Evaluation e = evaluate_model(m.selected);
    m.accuracy = e.mean_accuracy;
    m.loss = e.mean_loss;
  }
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const FederatedDataset& data,
                                Mode mode) {
  Simulator sim(config, data, mode);
  ExperimentResult result;
  result.mode = mode;
  result.param_count = sim.model().theta.size();
  result.cohort_size = sim.cohort_size();
  {
    // Round 0 has no cohort; score every device.
    const Evaluation e = evaluate(sim.model(), data);
    result.initial_accuracy = e.mean_accuracy;
    result.initial_loss = e.mean_loss;
  }
  result.rounds.reserve(config.rounds);
  for (std::size_t t = 0; t < config.rounds; ++t) result.rounds.push_back(sim.run_round());
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const FederatedDataset data = build_dataset(config);
  return run_experiment(config, data, config.mode);
}

std::vector<ExperimentResult> run_comparison(const ExperimentConfig& config) {
  const FederatedDataset data = build_dataset(config);
  std::vector<ExperimentResult> out;
  for (Mode mode : {Mode::kTdma, Mode::kNomaQuant, Mode::kNomaSparse}) {
    out.push_back(run_experiment(config, data, mode));
  }
  return out;
}

}  // namespace nomafl
