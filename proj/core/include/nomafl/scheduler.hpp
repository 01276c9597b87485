#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nomafl/channel.hpp"
#include "nomafl/noma.hpp"
#include "nomafl/user_profile.hpp"

namespace nomafl {

struct Schedule {
  std::uint64_t round_index = 0;
  std::vector<int> selected;        // ascending user_id
  std::vector<int> local_epochs;    // parallel to `selected`
  std::vector<RateAllocation> rates;  // SIC order
  double provisional_jain = 0.0;
};

struct Candidate {
  int user_id = 0;
  int epochs = 0;
  double capacity = 0.0;  // effective update capacity used for ranking
};

struct WindowChoice {
  std::vector<Candidate> members;  // in ranking order
  double jain = 0.0;
};

// Ranks candidates by capacity (descending, then user_id) and returns the
// length-k contiguous window with the highest Jain index. Ties go to the
// window with more total epochs, then the smaller sum of user ids.
WindowChoice fair_window(std::vector<Candidate> candidates, std::size_t k);

// Full passes over the local shard that fit in the compute budget; 0 means
// the user cannot finish a single epoch and is ineligible.
int estimate_local_epochs(const UserProfile& profile, double time_budget_s);

// K = round(C N), at least 1.
std::size_t participant_count(double fraction, std::size_t num_users);

// Picks K eligible users. Candidates are ranked by an interference-free
// effective update capacity; the contiguous window of K with the highest
// Jain index wins (ties: more total epochs, then smaller sum of ids). Rates
// for the winners are then recomputed under SIC. Throws SchedulingError when
// fewer than K users can finish one epoch.
Schedule select_participants(std::span<const UserProfile> profiles,
                             std::span<const ChannelRealization> uplink,
                             const ChannelParams& params, std::size_t k,
                             double time_budget_s, std::uint64_t round_index = 0);

}  // namespace nomafl
