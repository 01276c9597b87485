#include "nomafl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nomafl/error.hpp"

namespace nomafl {

namespace {

struct Eligible {
  int user_id;
  int epochs;
  double capacity;
  double received_power_w;
};

// Relative slack for treating two Jain indices as equal.
constexpr double kJainTieTolerance = 1e-12;

}  // namespace

int estimate_local_epochs(const UserProfile& profile, double time_budget_s) {
  if (!(time_budget_s > 0.0)) {
    throw DomainError("estimate_local_epochs: time budget must be positive");
  }
  if (profile.dataset_size == 0) return 0;
  const double epochs =
      std::floor(time_budget_s * profile.compute_speed / static_cast<double>(profile.dataset_size));
  return epochs > 0.0 ? static_cast<int>(epochs) : 0;
}

WindowChoice fair_window(std::vector<Candidate> candidates, std::size_t k) {
  if (k == 0 || candidates.size() < k) {
    throw DomainError("fair_window: need at least K candidates");
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.capacity != b.capacity) return a.capacity > b.capacity;
    return a.user_id < b.user_id;
  });

  std::size_t best_start = 0;
  double best_jain = -1.0;
  long best_epochs = 0;
  long best_id_sum = 0;
  std::vector<double> window(k);
  for (std::size_t start = 0; start + k <= candidates.size(); ++start) {
    long epochs = 0;
    long id_sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      window[j] = candidates[start + j].capacity;
      epochs += candidates[start + j].epochs;
      id_sum += candidates[start + j].user_id;
    }
    // An all-zero window is perfectly fair but carries nothing.
    const bool all_zero =
        std::all_of(window.begin(), window.end(), [](double v) { return v == 0.0; });
    const double jain = all_zero ? 0.0 : jain_index(window);

    bool better = false;
    if (jain > best_jain * (1.0 + kJainTieTolerance)) {
      better = true;
    } else if (jain >= best_jain * (1.0 - kJainTieTolerance)) {
      better = epochs > best_epochs || (epochs == best_epochs && id_sum < best_id_sum);
    }
    if (better) {
      best_start = start;
      best_jain = jain;
      best_epochs = epochs;
      best_id_sum = id_sum;
    }
  }

  WindowChoice out;
  out.jain = best_jain;
  out.members.assign(candidates.begin() + static_cast<std::ptrdiff_t>(best_start),
                     candidates.begin() + static_cast<std::ptrdiff_t>(best_start + k));
  return out;
}

std::size_t participant_count(double fraction, std::size_t num_users) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(num_users)));
  return std::max<std::size_t>(k, 1);
}

Schedule select_participants(std::span<const UserProfile> profiles,
                             std::span<const ChannelRealization> uplink,
                             const ChannelParams& params, std::size_t k, double time_budget_s,
                             std::uint64_t round_index) {
  if (profiles.size() != uplink.size()) {
    throw DomainError("select_participants: one channel realization per user required");
  }
  if (k == 0) {
    throw DomainError("select_participants: K must be >= 1");
  }
  const double noise = params.uplink_noise_w();

  std::vector<Eligible> eligible;
  eligible.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const int epochs = estimate_local_epochs(profiles[i], time_budget_s);
    if (epochs < 1) continue;
    const double power = params.tx_power_w * uplink[i].power_gain;
    const double rate = tdma_rate(power, noise, params.sic_degradation);
    eligible.push_back({profiles[i].user_id, epochs,
                        effective_capacity(rate, params.uplink_bandwidth_hz,
                                           params.slot_duration_s, profiles[i].dataset_size),
                        power});
  }
  if (eligible.size() < k) {
    throw SchedulingError("round " + std::to_string(round_index) + ": only " +
                          std::to_string(eligible.size()) + " eligible users for K=" +
                          std::to_string(k));
  }

  std::vector<Candidate> ranked;
  ranked.reserve(eligible.size());
  for (const auto& e : eligible) ranked.push_back({e.user_id, e.epochs, e.capacity});
  WindowChoice window = fair_window(std::move(ranked), k);
  std::sort(window.members.begin(), window.members.end(),
            [](const Candidate& a, const Candidate& b) { return a.user_id < b.user_id; });

  Schedule schedule;
  schedule.round_index = round_index;
  schedule.provisional_jain = window.jain;
  std::vector<ReceivedPower> powers;
  for (const auto& c : window.members) {
    schedule.selected.push_back(c.user_id);
    schedule.local_epochs.push_back(c.epochs);
    const auto it = std::find_if(eligible.begin(), eligible.end(),
                                 [&](const Eligible& e) { return e.user_id == c.user_id; });
    powers.push_back({c.user_id, it->received_power_w});
  }
  schedule.rates = allocate_noma(powers, params);
  return schedule;
}

}  // namespace nomafl
